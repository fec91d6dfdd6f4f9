#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "riskmesh/catalog.hpp"

namespace riskmesh {

/// Directed contagion graph: adjacency g(i, j) = 1 when risk i directly
/// induces risk j. Node order is the sorted id order of the source catalog.
class ContagionGraph {
 public:
  ContagionGraph() = default;
  explicit ContagionGraph(std::vector<std::string> ids);

  std::size_t size() const { return ids_.size(); }
  const std::vector<std::string>& ids() const { return ids_; }
  std::optional<std::size_t> index_of(std::string_view id) const;

  bool edge(std::size_t src, std::size_t dst) const { return adj_[src * ids_.size() + dst] != 0; }
  /// Adds src -> dst. Self-loops are rejected with std::invalid_argument.
  void add_edge(std::size_t src, std::size_t dst);

  std::size_t edge_count() const { return edge_count_; }
  const std::vector<std::size_t>& successors(std::size_t i) const { return out_[i]; }
  const std::vector<std::size_t>& predecessors(std::size_t i) const { return in_[i]; }

 private:
  std::vector<std::string> ids_;
  std::vector<std::uint8_t> adj_;
  std::vector<std::vector<std::size_t>> out_;
  std::vector<std::vector<std::size_t>> in_;
  std::size_t edge_count_ = 0;
};

ContagionGraph build_graph(const Catalog& catalog);

enum class Metric { importance, contagion, sensitivity };

/// Accepts "p_importance"/"importance" and the like; nullopt otherwise.
std::optional<Metric> metric_from_name(std::string_view name);
std::string_view metric_name(Metric metric);

struct NodeMetrics {
  std::vector<std::string> ids;
  std::vector<int> k_out;
  std::vector<int> k_in;
  std::vector<int> k_total;
  std::vector<double> p_importance;
  std::vector<double> p_contagion;
  std::vector<double> p_sensitivity;

  std::size_t size() const { return ids.size(); }
  const std::vector<double>& values(Metric metric) const;
};

/// Degree counts and the three degree shares. Each share vector is normalised
/// by the sum of its own degree kind; with no edges all three are uniform 1/n.
NodeMetrics node_metrics(const ContagionGraph& graph);

/// Descending by the selected metric, ties by ascending id. Throws
/// std::invalid_argument when top exceeds the node count.
std::vector<std::pair<std::string, double>> rank_nodes(const NodeMetrics& metrics, Metric by, std::size_t top);
std::vector<std::pair<std::string, double>> rank_nodes(const NodeMetrics& metrics, std::string_view by,
                                                       std::size_t top);

struct TailFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  std::size_t points = 0;

  bool scale_free_like() const { return r2 >= 0.9 && points >= 3; }
};

struct DegreeDistribution {
  std::map<int, std::size_t> histogram;  // total degree -> node count
  double mean_degree = 0.0;
  std::optional<TailFit> tail_fit;
};

/// Histogram of total degree and a least-squares fit of log CCDF against
/// log degree over the distinct degrees >= mean. The fit is absent with
/// fewer than three such degrees.
DegreeDistribution degree_distribution(const ContagionGraph& graph);

enum class RemovalStrategy { random, targeted };

struct RobustnessStep {
  double removed_fraction = 0.0;
  double lwcc_mean = 0.0;
  double lwcc_std = 0.0;
};

struct RobustnessReport {
  RemovalStrategy strategy = RemovalStrategy::random;
  std::uint64_t seed = 0;
  std::size_t trials = 1;
  std::vector<RobustnessStep> steps;
};

/// Size of the largest weakly connected component among nodes not removed.
std::size_t largest_wcc(const ContagionGraph& graph, std::span<const std::uint8_t> removed);

/// Node-removal experiment. For each fraction f, floor(f*n) nodes are removed
/// (random: a fresh uniform permutation per trial, trial streams derived from
/// (seed, trial); targeted: descending p_importance, ties by id) and the LWCC
/// size over the original n is recorded.
RobustnessReport robustness(const ContagionGraph& graph, RemovalStrategy strategy, std::span<const double> fractions,
                            std::size_t trials, std::uint64_t seed);

/// Preferential-attachment growth: m0 mutually connected seed nodes, then each
/// new node sends m edges to distinct existing nodes drawn with probability
/// proportional to total degree. Nodes are X1..Xn in category X.
Catalog generate_preferential(std::size_t m0, std::size_t m, std::size_t n_final, std::uint64_t seed);

/// CSV with header id,k_in,k_out,k_total,p_importance,p_contagion,p_sensitivity.
std::string metrics_csv(const NodeMetrics& metrics);
/// CSV with header fraction,lwcc_mean,lwcc_std.
std::string robustness_csv(const RobustnessReport& report);

}  // namespace riskmesh
