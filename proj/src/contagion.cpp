#include "riskmesh/contagion.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>

#include "riskmesh/random.hpp"

namespace riskmesh {

namespace {

std::string format_g12(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", value);
  return buf;
}

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n), size_(n, 1) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
  }

  std::size_t size_of(std::size_t x) { return size_[find(x)]; }

 private:
  std::vector<std::size_t> parent_;
  std::vector<std::size_t> size_;
};

std::vector<double> shares(const std::vector<int>& degrees) {
  const double total = std::accumulate(degrees.begin(), degrees.end(), 0.0);
  std::vector<double> out(degrees.size());
  for (std::size_t i = 0; i < degrees.size(); ++i) out[i] = degrees[i] / total;
  return out;
}

}  // namespace

ContagionGraph::ContagionGraph(std::vector<std::string> ids)
    : ids_(std::move(ids)), adj_(ids_.size() * ids_.size(), 0), out_(ids_.size()), in_(ids_.size()) {}

std::optional<std::size_t> ContagionGraph::index_of(std::string_view id) const {
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    if (ids_[i] == id) return i;
  }
  return std::nullopt;
}

void ContagionGraph::add_edge(std::size_t src, std::size_t dst) {
  if (src == dst) throw std::invalid_argument("self-loop on " + ids_[src]);
  auto& cell = adj_[src * ids_.size() + dst];
  if (cell) return;
  cell = 1;
  out_[src].push_back(dst);
  in_[dst].push_back(src);
  ++edge_count_;
}

ContagionGraph build_graph(const Catalog& catalog) {
  const Catalog sorted = catalog.sorted();
  std::vector<std::string> ids;
  ids.reserve(sorted.nodes.size());
  for (const auto& node : sorted.nodes) ids.push_back(node.id);

  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < ids.size(); ++i) index.emplace(ids[i], i);

  ContagionGraph graph(std::move(ids));
  for (const auto& edge : sorted.edges) {
    const auto s = index.find(edge.src);
    const auto d = index.find(edge.dst);
    if (s == index.end() || d == index.end()) {
      throw std::invalid_argument("edge " + edge.src + "->" + edge.dst + " has an unknown endpoint");
    }
    graph.add_edge(s->second, d->second);
  }
  return graph;
}

std::optional<Metric> metric_from_name(std::string_view name) {
  if (name == "p_importance" || name == "importance") return Metric::importance;
  if (name == "p_contagion" || name == "contagion") return Metric::contagion;
  if (name == "p_sensitivity" || name == "sensitivity") return Metric::sensitivity;
  return std::nullopt;
}

std::string_view metric_name(Metric metric) {
  switch (metric) {
    case Metric::importance:
      return "p_importance";
    case Metric::contagion:
      return "p_contagion";
    case Metric::sensitivity:
      return "p_sensitivity";
  }
  return "";
}

const std::vector<double>& NodeMetrics::values(Metric metric) const {
  switch (metric) {
    case Metric::contagion:
      return p_contagion;
    case Metric::sensitivity:
      return p_sensitivity;
    case Metric::importance:
      break;
  }
  return p_importance;
}

NodeMetrics node_metrics(const ContagionGraph& graph) {
  const std::size_t n = graph.size();
  NodeMetrics m;
  m.ids = graph.ids();
  m.k_out.resize(n);
  m.k_in.resize(n);
  m.k_total.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    m.k_out[i] = static_cast<int>(graph.successors(i).size());
    m.k_in[i] = static_cast<int>(graph.predecessors(i).size());
    m.k_total[i] = m.k_out[i] + m.k_in[i];
  }
  if (graph.edge_count() == 0) {
    const std::vector<double> uniform(n, n == 0 ? 0.0 : 1.0 / static_cast<double>(n));
    m.p_importance = m.p_contagion = m.p_sensitivity = uniform;
    return m;
  }
  m.p_importance = shares(m.k_total);
  m.p_contagion = shares(m.k_out);
  m.p_sensitivity = shares(m.k_in);
  return m;
}

std::vector<std::pair<std::string, double>> rank_nodes(const NodeMetrics& metrics, Metric by, std::size_t top) {
  if (top > metrics.size()) {
    throw std::invalid_argument("top " + std::to_string(top) + " exceeds node count " +
                                std::to_string(metrics.size()));
  }
  const auto& values = metrics.values(by);
  std::vector<std::size_t> order(metrics.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (values[a] != values[b]) return values[a] > values[b];
    return id_less(metrics.ids[a], metrics.ids[b]);
  });
  std::vector<std::pair<std::string, double>> out;
  out.reserve(top);
  for (std::size_t i = 0; i < top; ++i) out.emplace_back(metrics.ids[order[i]], values[order[i]]);
  return out;
}

std::vector<std::pair<std::string, double>> rank_nodes(const NodeMetrics& metrics, std::string_view by,
                                                       std::size_t top) {
  const auto metric = metric_from_name(by);
  if (!metric) throw std::invalid_argument("unknown metric selector '" + std::string(by) + "'");
  return rank_nodes(metrics, *metric, top);
}

DegreeDistribution degree_distribution(const ContagionGraph& graph) {
  const std::size_t n = graph.size();
  if (n == 0) throw std::invalid_argument("degree distribution of an empty graph");
  DegreeDistribution dist;
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const int k = static_cast<int>(graph.successors(i).size() + graph.predecessors(i).size());
    ++dist.histogram[k];
    total += k;
  }
  dist.mean_degree = total / static_cast<double>(n);

  // CCDF(k) = P(K >= k), evaluated at each distinct degree >= mean and > 0.
  std::vector<double> xs;
  std::vector<double> ys;
  std::size_t at_least = n;
  for (const auto& [k, count] : dist.histogram) {
    if (k > 0 && k >= dist.mean_degree) {
      xs.push_back(std::log(static_cast<double>(k)));
      ys.push_back(std::log(static_cast<double>(at_least) / static_cast<double>(n)));
    }
    at_least -= count;
  }
  if (xs.size() < 3) return dist;

  const double m = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / m;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / m;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  TailFit fit;
  fit.points = xs.size();
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  dist.tail_fit = fit;
  return dist;
}

std::size_t largest_wcc(const ContagionGraph& graph, std::span<const std::uint8_t> removed) {
  const std::size_t n = graph.size();
  DisjointSets sets(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (removed[i]) continue;
    for (std::size_t j : graph.successors(i)) {
      if (!removed[j]) sets.unite(i, j);
    }
  }
  std::size_t best = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!removed[i]) best = std::max(best, sets.size_of(i));
  }
  return best;
}

RobustnessReport robustness(const ContagionGraph& graph, RemovalStrategy strategy, std::span<const double> fractions,
                            std::size_t trials, std::uint64_t seed) {
  const std::size_t n = graph.size();
  if (n == 0) throw std::invalid_argument("robustness of an empty graph");
  if (trials == 0) throw std::invalid_argument("trials must be at least 1");
  for (double f : fractions) {
    if (!(f >= 0.0 && f <= 1.0)) throw std::invalid_argument("removal fractions must lie in [0, 1]");
  }

  RobustnessReport report;
  report.strategy = strategy;
  report.seed = seed;
  if (strategy == RemovalStrategy::targeted) trials = 1;
  report.trials = trials;

  std::vector<std::size_t> targeted_order;
  if (strategy == RemovalStrategy::targeted) {
    const NodeMetrics metrics = node_metrics(graph);
    for (const auto& [id, value] : rank_nodes(metrics, Metric::importance, n)) {
      targeted_order.push_back(*graph.index_of(id));
    }
  }

  // samples[f][t]
  std::vector<std::vector<double>> samples(fractions.size(), std::vector<double>(trials));
  for (std::size_t t = 0; t < trials; ++t) {
    std::vector<std::size_t> order;
    if (strategy == RemovalStrategy::targeted) {
      order = targeted_order;
    } else {
      order.resize(n);
      std::iota(order.begin(), order.end(), std::size_t{0});
      Rng rng(mix_seed(seed, t));
      for (std::size_t i = n - 1; i > 0; --i) std::swap(order[i], order[rng.below(i + 1)]);
    }
    for (std::size_t fi = 0; fi < fractions.size(); ++fi) {
      const auto count = static_cast<std::size_t>(std::floor(fractions[fi] * static_cast<double>(n) + 1e-9));
      std::vector<std::uint8_t> removed(n, 0);
      for (std::size_t r = 0; r < std::min(count, n); ++r) removed[order[r]] = 1;
      samples[fi][t] = static_cast<double>(largest_wcc(graph, removed)) / static_cast<double>(n);
    }
  }

  for (std::size_t fi = 0; fi < fractions.size(); ++fi) {
    const auto& s = samples[fi];
    const double mean = std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(trials);
    double var = 0.0;
    for (double x : s) var += (x - mean) * (x - mean);
    var /= static_cast<double>(trials);
    report.steps.push_back({fractions[fi], mean, std::sqrt(var)});
  }
  return report;
}

Catalog generate_preferential(std::size_t m0, std::size_t m, std::size_t n_final, std::uint64_t seed) {
  if (m < 1 || m > m0 || m0 >= n_final) {
    throw std::invalid_argument("preferential attachment needs 1 <= m <= m0 < n_final");
  }
  const auto category = *RiskCategory::from_code('X');
  Catalog catalog;
  catalog.nodes.reserve(n_final);
  for (std::size_t i = 0; i < n_final; ++i) {
    const std::string id = "X" + std::to_string(i + 1);
    catalog.nodes.push_back({id, "Synthetic node " + std::to_string(i + 1), category, Layer::context});
  }
  std::vector<double> degree(n_final, 0.0);
  const auto link = [&](std::size_t s, std::size_t d, const char* note) {
    catalog.edges.push_back({catalog.nodes[s].id, catalog.nodes[d].id, note});
    degree[s] += 1.0;
    degree[d] += 1.0;
  };
  for (std::size_t i = 0; i < m0; ++i) {
    for (std::size_t j = 0; j < m0; ++j) {
      if (i != j) link(i, j, "seed");
    }
  }

  Rng rng(seed);
  std::vector<std::size_t> chosen;
  for (std::size_t v = m0; v < n_final; ++v) {
    chosen.clear();
    double pool = std::accumulate(degree.begin(), degree.begin() + static_cast<std::ptrdiff_t>(v), 0.0);
    for (std::size_t e = 0; e < m; ++e) {
      // Roulette draw over existing nodes, excluding ones already chosen.
      double target = rng.uniform() * pool;
      std::size_t pick = v;
      for (std::size_t u = 0; u < v; ++u) {
        if (std::find(chosen.begin(), chosen.end(), u) != chosen.end()) continue;
        target -= degree[u];
        pick = u;
        if (target < 0.0) break;
      }
      chosen.push_back(pick);
      pool -= degree[pick];
    }
    for (std::size_t u : chosen) link(v, u, "attach");
  }
  return catalog;
}

std::string metrics_csv(const NodeMetrics& metrics) {
  std::vector<std::size_t> order(metrics.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return id_less(metrics.ids[a], metrics.ids[b]); });
  std::string out = "id,k_in,k_out,k_total,p_importance,p_contagion,p_sensitivity\n";
  for (std::size_t i : order) {
    out += metrics.ids[i] + ',' + std::to_string(metrics.k_in[i]) + ',' + std::to_string(metrics.k_out[i]) + ',' +
           std::to_string(metrics.k_total[i]) + ',' + format_g12(metrics.p_importance[i]) + ',' +
           format_g12(metrics.p_contagion[i]) + ',' + format_g12(metrics.p_sensitivity[i]) + '\n';
  }
  return out;
}

std::string robustness_csv(const RobustnessReport& report) {
  std::string out = "fraction,lwcc_mean,lwcc_std\n";
  for (const auto& step : report.steps) {
    out += format_g12(step.removed_fraction) + ',' + format_g12(step.lwcc_mean) + ',' + format_g12(step.lwcc_std) +
           '\n';
  }
  return out;
}

}  // namespace riskmesh
