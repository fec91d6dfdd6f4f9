#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "riskmesh/catalog.hpp"
#include "riskmesh/contagion.hpp"

namespace riskmesh {

enum class LayoutAlgorithm { fruchterman_reingold, force_atlas };

/// Accepts "fruchterman_reingold"/"fr" and "force_atlas"/"forceatlas".
std::optional<LayoutAlgorithm> layout_algorithm_from_name(std::string_view name);
std::string_view layout_algorithm_name(LayoutAlgorithm algorithm);

struct LayoutConfig {
  LayoutAlgorithm algorithm = LayoutAlgorithm::fruchterman_reingold;
  int iterations = 500;
  double area = 1.0;
  double gravity = 1.0;  // force_atlas only
  std::uint64_t seed = 0;
};

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

struct LayoutResult {
  std::vector<std::string> ids;
  std::vector<Point> positions;
  std::vector<double> radii;
  /// Sum of node displacements applied in each iteration.
  std::vector<double> energy_trace;

  friend bool operator==(const LayoutResult&, const LayoutResult&) = default;
};

/// Deterministic force-directed layout.
///
/// Fruchterman-Reingold: ideal distance k = sqrt(area / n), attraction d^2/k
/// along edges, repulsion k^2/d between all pairs, displacement capped by a
/// temperature cooling linearly from 0.1*sqrt(area) to zero. The final
/// positions are scaled about the origin, if needed, to fit the square of side
/// sqrt(area).
///
/// ForceAtlas: linear attraction along edges, repulsion
/// k^2 (deg_u + 1)(deg_v + 1) / d, and a pull of gravity*(deg + 1)*k toward the
/// origin, with the same cooling cap.
///
/// Throws std::invalid_argument for an empty graph or a bad config.
LayoutResult layout(const ContagionGraph& graph, const LayoutConfig& config);

inline constexpr double kMinRadius = 2.0;
inline constexpr double kMaxRadius = 30.0;

/// Affine map of metric values onto [kMinRadius, kMaxRadius]. A constant
/// metric maps every node to the midpoint.
std::vector<double> metric_radii(const std::vector<double>& values);

struct RenderStyle {
  Metric metric = Metric::importance;
  bool color_by_category = true;
};

/// Thrown when the layout, graph, and metric node sets disagree.
class RenderError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// SVG document with one <circle class="node"> per node (radius from the
/// selected metric) and one arrowed <line class="edge"> per edge. The
/// catalog supplies categories for colouring; nodes missing from it are grey.
std::string render_svg(const LayoutResult& layout, const ContagionGraph& graph, const NodeMetrics& metrics,
                       const RenderStyle& style, const Catalog* catalog = nullptr);

std::string export_dot(const ContagionGraph& graph);

/// GraphML with x, y, radius and category node attributes.
std::string export_graphml(const LayoutResult& layout, const ContagionGraph& graph, const NodeMetrics& metrics,
                           Metric metric, const Catalog* catalog = nullptr);

}  // namespace riskmesh
