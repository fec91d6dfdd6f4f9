#include "riskmesh/layout.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "riskmesh/random.hpp"

namespace riskmesh {

namespace {

struct Vec {
  double x = 0.0;
  double y = 0.0;
};

// Direction and length from b to a. Coincident points get a seeded random
// unit direction and a tiny separation so repulsion stays finite.
void separation(const Point& a, const Point& b, double min_dist, Rng& rng, Vec& dir, double& dist) {
  double dx = a.x - b.x;
  double dy = a.y - b.y;
  dist = std::hypot(dx, dy);
  if (dist < min_dist) {
    const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
    dx = std::cos(angle);
    dy = std::sin(angle);
    dist = min_dist;
    dir = {dx, dy};
    return;
  }
  dir = {dx / dist, dy / dist};
}

// Moves every node along its force by at most `temperature` and returns the
// total displacement applied.
double apply(std::vector<Point>& pos, const std::vector<Vec>& force, double temperature) {
  double moved = 0.0;
  for (std::size_t v = 0; v < pos.size(); ++v) {
    const double len = std::hypot(force[v].x, force[v].y);
    if (len <= 0.0) continue;
    const double step = std::min(len, temperature);
    pos[v].x += force[v].x / len * step;
    pos[v].y += force[v].y / len * step;
    moved += step;
  }
  return moved;
}

}  // namespace

std::optional<LayoutAlgorithm> layout_algorithm_from_name(std::string_view name) {
  if (name == "fruchterman_reingold" || name == "fr") return LayoutAlgorithm::fruchterman_reingold;
  if (name == "force_atlas" || name == "forceatlas") return LayoutAlgorithm::force_atlas;
  return std::nullopt;
}

std::string_view layout_algorithm_name(LayoutAlgorithm algorithm) {
  return algorithm == LayoutAlgorithm::force_atlas ? "force_atlas" : "fruchterman_reingold";
}

LayoutResult layout(const ContagionGraph& graph, const LayoutConfig& config) {
  const std::size_t n = graph.size();
  if (n == 0) throw std::invalid_argument("layout of an empty graph");
  if (config.iterations < 1) throw std::invalid_argument("layout needs at least one iteration");
  if (!(config.area > 0.0)) throw std::invalid_argument("layout area must be positive");
  if (!(config.gravity >= 0.0)) throw std::invalid_argument("gravity must be non-negative");

  const double side = std::sqrt(config.area);
  const double half = side / 2.0;
  const double k = std::sqrt(config.area / static_cast<double>(n));
  const double min_dist = 1e-9 * k;
  const bool fr = config.algorithm == LayoutAlgorithm::fruchterman_reingold;

  Rng rng(config.seed);
  LayoutResult result;
  result.ids = graph.ids();
  result.positions.resize(n);
  if (n > 1) {
    for (auto& p : result.positions) p = {rng.uniform(-half, half), rng.uniform(-half, half)};
  }

  std::vector<double> weight(n, 1.0);
  if (!fr) {
    for (std::size_t v = 0; v < n; ++v) {
      weight[v] = static_cast<double>(graph.successors(v).size() + graph.predecessors(v).size()) + 1.0;
    }
  }

  auto& pos = result.positions;
  std::vector<Vec> force(n);
  const double t0 = 0.1 * side;
  for (int it = 0; it < config.iterations; ++it) {
    std::fill(force.begin(), force.end(), Vec{});
    Vec dir;
    double d = 0.0;
    for (std::size_t u = 0; u < n; ++u) {
      for (std::size_t v = u + 1; v < n; ++v) {
        separation(pos[u], pos[v], min_dist, rng, dir, d);
        const double f = k * k * weight[u] * weight[v] / d;
        force[u].x += dir.x * f;
        force[u].y += dir.y * f;
        force[v].x -= dir.x * f;
        force[v].y -= dir.y * f;
      }
    }
    for (std::size_t u = 0; u < n; ++u) {
      for (std::size_t v : graph.successors(u)) {
        separation(pos[u], pos[v], min_dist, rng, dir, d);
        const double f = fr ? d * d / k : d;
        force[u].x -= dir.x * f;
        force[u].y -= dir.y * f;
        force[v].x += dir.x * f;
        force[v].y += dir.y * f;
      }
    }
    if (!fr && config.gravity > 0.0) {
      for (std::size_t v = 0; v < n; ++v) {
        const double r = std::hypot(pos[v].x, pos[v].y);
        if (r <= 0.0) continue;
        const double f = config.gravity * weight[v] * k;
        force[v].x -= pos[v].x / r * f;
        force[v].y -= pos[v].y / r * f;
      }
    }
    const double temperature =
        t0 * (1.0 - static_cast<double>(it) / static_cast<double>(config.iterations));
    result.energy_trace.push_back(apply(pos, force, temperature));
  }

  if (fr) {
    double extent = 0.0;
    for (const auto& p : pos) extent = std::max({extent, std::abs(p.x), std::abs(p.y)});
    if (extent > half) {
      for (auto& p : pos) p = {p.x * half / extent, p.y * half / extent};
    }
  }

  result.radii.assign(n, (kMinRadius + kMaxRadius) / 2.0);
  return result;
}

std::vector<double> metric_radii(const std::vector<double>& values) {
  if (values.empty()) return {};
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  std::vector<double> out(values.size(), (kMinRadius + kMaxRadius) / 2.0);
  if (*hi - *lo <= 0.0) return out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    out[i] = kMinRadius + (kMaxRadius - kMinRadius) * (values[i] - *lo) / (*hi - *lo);
  }
  return out;
}

}  // namespace riskmesh
