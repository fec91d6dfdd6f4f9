#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "riskmesh/catalog.hpp"
#include "riskmesh/contagion.hpp"
#include "riskmesh/random.hpp"

using namespace riskmesh;

namespace {

const std::string kReference = std::string(RISKMESH_DATA_DIR) + "/reference.catalog";

Catalog make_catalog(const std::vector<std::string>& ids, const std::vector<std::pair<std::string, std::string>>& edges) {
  Catalog c;
  for (const auto& id : ids) {
    const auto category = *RiskCategory::from_code(id[0]);
    c.nodes.push_back({id, "node " + id, category, category.layer()});
  }
  for (const auto& [a, b] : edges) c.edges.push_back({a, b, ""});
  return c;
}

Catalog path3() { return make_catalog({"A1", "A2", "A3"}, {{"A1", "A2"}, {"A2", "A3"}}); }

Catalog random_catalog(Rng& rng, std::size_t n, double p) {
  std::vector<std::string> ids;
  for (std::size_t i = 1; i <= n; ++i) ids.push_back("K" + std::to_string(i));
  std::vector<std::pair<std::string, std::string>> edges;
  for (const auto& a : ids) {
    for (const auto& b : ids) {
      if (a != b && rng.uniform() < p) edges.push_back({a, b});
    }
  }
  return make_catalog(ids, edges);
}

// Tallies the raw edge list per id; no graph structure involved.
struct Tally {
  std::map<std::string, int> out, in;
  int edges = 0;
};

Tally tally(const Catalog& c) {
  Tally t;
  for (const auto& n : c.nodes) t.out[n.id] = t.in[n.id] = 0;
  for (const auto& e : c.edges) {
    ++t.out[e.src];
    ++t.in[e.dst];
    ++t.edges;
  }
  return t;
}

double sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

}  // namespace

TEST_CASE("adjacency of the smallest catalogs") {
  const ContagionGraph g = build_graph(make_catalog({"A2", "A1"}, {{"A1", "A2"}}));
  REQUIRE(g.ids() == std::vector<std::string>{"A1", "A2"});
  CHECK(g.edge(0, 1));
  CHECK_FALSE(g.edge(1, 0));
  CHECK_FALSE(g.edge(0, 0));
  CHECK(g.edge_count() == 1);

  const ContagionGraph empty = build_graph(make_catalog({"A1", "A2", "A3"}, {}));
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) CHECK_FALSE(empty.edge(i, j));
  }
  CHECK_THROWS_AS(ContagionGraph({"A1"}).add_edge(0, 0), std::invalid_argument);
}

TEST_CASE("node order is the natural id order") {
  const ContagionGraph g = build_graph(make_catalog({"G10", "G2", "A1"}, {}));
  CHECK(g.ids() == std::vector<std::string>{"A1", "G2", "G10"});
  CHECK(g.index_of("G10") == 2);
  CHECK_FALSE(g.index_of("B1").has_value());
}

TEST_CASE("path A->B->C metrics by hand") {
  const NodeMetrics m = node_metrics(build_graph(path3()));
  CHECK(m.k_out == std::vector<int>{1, 1, 0});
  CHECK(m.k_in == std::vector<int>{0, 1, 1});
  CHECK(m.k_total == std::vector<int>{1, 2, 1});
  CHECK(m.p_importance == std::vector<double>{0.25, 0.5, 0.25});
  CHECK(m.p_contagion == std::vector<double>{0.5, 0.5, 0.0});
  CHECK(m.p_sensitivity == std::vector<double>{0.0, 0.5, 0.5});
}

TEST_CASE("single edge: source transmits everything, receives nothing") {
  const NodeMetrics m = node_metrics(build_graph(make_catalog({"A1", "A2"}, {{"A1", "A2"}})));
  CHECK(m.p_contagion[0] == 1.0);
  CHECK(m.p_sensitivity[0] == 0.0);
}

TEST_CASE("zero-edge graph gets uniform metrics") {
  const NodeMetrics m = node_metrics(build_graph(make_catalog({"A1", "A2", "A3", "A4"}, {})));
  for (const auto* v : {&m.p_importance, &m.p_contagion, &m.p_sensitivity}) {
    for (double x : *v) CHECK(x == 0.25);
  }
}

TEST_CASE("metrics equal a brute-force edge-list tally on random graphs") {
  Rng rng(20240);
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 2 + rng.below(24);
    const Catalog c = random_catalog(rng, n, rng.uniform(0.02, 0.4));
    const NodeMetrics m = node_metrics(build_graph(c));
    const Tally tl = tally(c);
    int total_out = 0, total_in = 0;
    for (std::size_t i = 0; i < m.size(); ++i) {
      CHECK(m.k_out[i] == tl.out.at(m.ids[i]));
      CHECK(m.k_in[i] == tl.in.at(m.ids[i]));
      CHECK(m.k_total[i] == m.k_in[i] + m.k_out[i]);
      total_out += m.k_out[i];
      total_in += m.k_in[i];
    }
    CHECK(total_out == tl.edges);
    CHECK(total_in == tl.edges);
    if (tl.edges == 0) continue;
    for (std::size_t i = 0; i < m.size(); ++i) {
      const std::string& id = m.ids[i];
      CHECK(m.p_contagion[i] == doctest::Approx(double(tl.out.at(id)) / tl.edges).epsilon(1e-15));
      CHECK(m.p_sensitivity[i] == doctest::Approx(double(tl.in.at(id)) / tl.edges).epsilon(1e-15));
      CHECK(m.p_importance[i] ==
            doctest::Approx(double(tl.out.at(id) + tl.in.at(id)) / (2.0 * tl.edges)).epsilon(1e-15));
    }
    CHECK(std::abs(sum(m.p_importance) - 1.0) <= 1e-12);
    CHECK(std::abs(sum(m.p_contagion) - 1.0) <= 1e-12);
    CHECK(std::abs(sum(m.p_sensitivity) - 1.0) <= 1e-12);
  }
}

TEST_CASE("reference catalog metrics") {
  const Catalog c = load_catalog_file(kReference);
  const ContagionGraph g = build_graph(c);
  const NodeMetrics m = node_metrics(g);
  const Tally tl = tally(c);
  for (std::size_t i = 0; i < m.size(); ++i) {
    CHECK(m.k_out[i] == tl.out.at(m.ids[i]));
    CHECK(m.k_in[i] == tl.in.at(m.ids[i]));
  }
  CHECK(std::abs(sum(m.p_importance) - 1.0) <= 1e-12);
  CHECK(std::abs(sum(m.p_contagion) - 1.0) <= 1e-12);
  CHECK(std::abs(sum(m.p_sensitivity) - 1.0) <= 1e-12);

  // F7 leads the internet finance layer by importance.
  const auto ranked = rank_nodes(m, Metric::importance, m.size());
  const auto first_if = std::find_if(ranked.begin(), ranked.end(), [&](const auto& entry) {
    return c.find(entry.first)->layer == Layer::internet_finance;
  });
  REQUIRE(first_if != ranked.end());
  CHECK(first_if->first == "F7");
  CHECK(first_if[1].second < first_if->second);

  std::vector<std::uint8_t> none(g.size(), 0);
  CHECK(largest_wcc(g, none) == g.size());
}

TEST_CASE("ranking order, ties and selectors") {
  const NodeMetrics m = node_metrics(build_graph(path3()));
  const auto by_importance = rank_nodes(m, Metric::importance, 3);
  CHECK(by_importance[0].first == "A2");
  CHECK(by_importance[1].first == "A1");  // tie with A3, broken by id
  CHECK(by_importance[2].first == "A3");
  CHECK(rank_nodes(m, Metric::importance, 0).empty());
  CHECK(rank_nodes(m, "p_contagion", 1)[0].first == "A1");
  CHECK(rank_nodes(m, "sensitivity", 1)[0].first == "A2");
  CHECK_THROWS_AS(rank_nodes(m, "betweenness", 1), std::invalid_argument);
  CHECK_THROWS_AS(rank_nodes(m, Metric::importance, 4), std::invalid_argument);
}

TEST_CASE("ranking is invariant under positive scaling of the metric") {
  Rng rng(5);
  for (int t = 0; t < 20; ++t) {
    NodeMetrics m = node_metrics(build_graph(random_catalog(rng, 15, 0.15)));
    const auto before = rank_nodes(m, Metric::contagion, m.size());
    const double scale = rng.uniform(0.1, 10.0);
    for (double& v : m.p_contagion) v *= scale;
    const auto after = rank_nodes(m, Metric::contagion, m.size());
    for (std::size_t i = 0; i < before.size(); ++i) CHECK(before[i].first == after[i].first);
  }
}

TEST_CASE("degree distribution by hand") {
  const DegreeDistribution d = degree_distribution(build_graph(path3()));
  CHECK(d.histogram == std::map<int, std::size_t>{{1, 2}, {2, 1}});
  CHECK(d.mean_degree == doctest::Approx(4.0 / 3.0));
  CHECK_FALSE(d.tail_fit.has_value());

  std::vector<std::string> ids;
  std::vector<std::pair<std::string, std::string>> edges;
  for (int i = 1; i <= 8; ++i) ids.push_back("J" + std::to_string(i));
  for (int i = 0; i < 8; ++i) {
    edges.push_back({ids[i], ids[(i + 1) % 8]});
    edges.push_back({ids[(i + 1) % 8], ids[i]});
  }
  const DegreeDistribution ring = degree_distribution(build_graph(make_catalog(ids, edges)));
  CHECK(ring.histogram.size() == 1);
  CHECK(ring.histogram.at(4) == 8);
  CHECK_FALSE(ring.tail_fit.has_value());
}

TEST_CASE("tail fit against an independent least-squares computation") {
  Rng rng(9);
  const ContagionGraph g = build_graph(random_catalog(rng, 25, 0.2));
  const DegreeDistribution d = degree_distribution(g);
  std::vector<int> degrees;
  for (std::size_t i = 0; i < g.size(); ++i) {
    degrees.push_back(static_cast<int>(g.successors(i).size() + g.predecessors(i).size()));
  }
  const double mean = std::accumulate(degrees.begin(), degrees.end(), 0.0) / degrees.size();
  std::set<int> distinct(degrees.begin(), degrees.end());
  std::vector<double> xs, ys;
  for (int k : distinct) {
    if (k < mean || k == 0) continue;
    const double ccdf = double(std::count_if(degrees.begin(), degrees.end(), [&](int x) { return x >= k; })) /
                        degrees.size();
    xs.push_back(std::log(k));
    ys.push_back(std::log(ccdf));
  }
  REQUIRE(xs.size() >= 3);
  REQUIRE(d.tail_fit.has_value());
  // Normal equations solved directly.
  const double n = xs.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const double intercept = (sy - slope * sx) / n;
  double ss_res = 0, ss_tot = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    ss_res += std::pow(ys[i] - (intercept + slope * xs[i]), 2);
    ss_tot += std::pow(ys[i] - sy / n, 2);
  }
  CHECK(d.tail_fit->points == xs.size());
  CHECK(d.tail_fit->slope == doctest::Approx(slope).epsilon(1e-9));
  CHECK(d.tail_fit->intercept == doctest::Approx(intercept).epsilon(1e-9));
  CHECK(d.tail_fit->r2 == doctest::Approx(1.0 - ss_res / ss_tot).epsilon(1e-9));
  std::size_t counted = 0;
  for (const auto& [k, count] : d.histogram) counted += count;
  CHECK(counted == g.size());
}

TEST_CASE("robustness examples") {
  const std::vector<double> zero = {0.0};
  const ContagionGraph path = build_graph(path3());
  CHECK(robustness(path, RemovalStrategy::random, zero, 5, 1).steps[0].lwcc_mean == 1.0);

  const ContagionGraph star =
      build_graph(make_catalog({"A1", "A2", "A3", "A4", "A5"}, {{"A1", "A2"}, {"A1", "A3"}, {"A1", "A4"}, {"A1", "A5"}}));
  const std::vector<double> just_above = {0.21};
  const auto report = robustness(star, RemovalStrategy::targeted, just_above, 1, 0);
  CHECK(report.steps[0].lwcc_mean == doctest::Approx(0.2));
  CHECK(report.steps[0].lwcc_std == 0.0);

  CHECK_THROWS_AS(robustness(ContagionGraph{}, RemovalStrategy::random, zero, 1, 0), std::invalid_argument);
  CHECK_THROWS_AS(robustness(path, RemovalStrategy::random, zero, 0, 0), std::invalid_argument);
  const std::vector<double> out_of_range = {1.5};
  CHECK_THROWS_AS(robustness(path, RemovalStrategy::random, out_of_range, 1, 0), std::invalid_argument);
}

TEST_CASE("largest weak component ignores direction and removed nodes") {
  const ContagionGraph g = build_graph(make_catalog({"A1", "A2", "A3", "A4"}, {{"A1", "A2"}, {"A3", "A2"}}));
  std::vector<std::uint8_t> removed(4, 0);
  CHECK(largest_wcc(g, removed) == 3);
  removed[1] = 1;
  CHECK(largest_wcc(g, removed) == 1);
}

TEST_CASE("robustness curves: bounds, targeted monotone, reproducible") {
  const ContagionGraph g = build_graph(load_catalog_file(kReference));
  std::vector<double> fractions;
  for (int i = 0; i <= 10; ++i) fractions.push_back(0.05 * i);
  const auto targeted = robustness(g, RemovalStrategy::targeted, fractions, 1, 0);
  const auto random = robustness(g, RemovalStrategy::random, fractions, 50, 7);
  CHECK(targeted.steps[0].lwcc_mean == 1.0);
  for (std::size_t i = 0; i < fractions.size(); ++i) {
    CHECK(targeted.steps[i].lwcc_mean >= 0.0);
    CHECK(random.steps[i].lwcc_mean <= 1.0);
    if (i > 0) CHECK(targeted.steps[i].lwcc_mean <= targeted.steps[i - 1].lwcc_mean);
  }
  const auto again = robustness(g, RemovalStrategy::random, fractions, 50, 7);
  CHECK(robustness_csv(again) == robustness_csv(random));
  CHECK(targeted.steps[2].lwcc_mean <= random.steps[2].lwcc_mean - 0.02);
}

TEST_CASE("targeted removal hurts preferential-attachment graphs more than random removal") {
  const std::vector<double> fractions = {0.05, 0.1, 0.2, 0.3};
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const ContagionGraph g = build_graph(generate_preferential(3, 2, 300, seed));
    const auto targeted = robustness(g, RemovalStrategy::targeted, fractions, 1, 0);
    const auto random = robustness(g, RemovalStrategy::random, fractions, 50, seed);
    for (std::size_t i = 0; i < fractions.size(); ++i) {
      CHECK(targeted.steps[i].lwcc_mean <= random.steps[i].lwcc_mean + 0.02);
    }
  }
}

TEST_CASE("preferential attachment counts and determinism") {
  const Catalog small = generate_preferential(2, 1, 3, 0);
  CHECK(small.nodes.size() == 3);
  CHECK(small.edges.size() == 3);

  const Catalog big = generate_preferential(2, 2, 1000, 42);
  CHECK(big.nodes.size() == 1000);
  CHECK(big.edges.size() == 2 + 2 * 998);
  CHECK(validate_catalog(big).empty());
  for (const auto& n : big.nodes) CHECK(n.category.code() == 'X');

  CHECK(serialize_catalog(generate_preferential(3, 2, 200, 8)) == serialize_catalog(generate_preferential(3, 2, 200, 8)));
  CHECK(serialize_catalog(generate_preferential(3, 2, 200, 8)) != serialize_catalog(generate_preferential(3, 2, 200, 9)));

  // Each new node sends exactly m edges to distinct older nodes.
  // Seed nodes are mutually connected.
  const ContagionGraph g = build_graph(generate_preferential(4, 2, 60, 1));
  const NodeMetrics m = node_metrics(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const int index = std::stoi(g.ids()[i].substr(1));
    CHECK(m.k_out[i] == (index <= 4 ? 3 : 2));
    for (std::size_t j : g.successors(i)) {
      if (index > 4) CHECK(std::stoi(g.ids()[j].substr(1)) < index);
    }
  }

  CHECK_THROWS_AS(generate_preferential(2, 3, 10, 0), std::invalid_argument);
  CHECK_THROWS_AS(generate_preferential(2, 0, 10, 0), std::invalid_argument);
  CHECK_THROWS_AS(generate_preferential(5, 2, 5, 0), std::invalid_argument);
}

TEST_CASE("preferential attachment tail looks scale-free") {
  const DegreeDistribution d = degree_distribution(build_graph(generate_preferential(2, 2, 2000, 1)));
  REQUIRE(d.tail_fit.has_value());
  CHECK(d.tail_fit->slope >= -3.5);
  CHECK(d.tail_fit->slope <= -1.5);
  CHECK(d.tail_fit->scale_free_like());
}

TEST_CASE("CSV exports") {
  const NodeMetrics m = node_metrics(build_graph(path3()));
  const std::string csv = metrics_csv(m);
  CHECK(csv.rfind("id,k_in,k_out,k_total,p_importance,p_contagion,p_sensitivity\n", 0) == 0);
  CHECK(csv.find("A2,1,1,2,0.5,0.5,0.5\n") != std::string::npos);
  const std::vector<double> fractions = {0.0, 0.5};
  const std::string rob = robustness_csv(robustness(build_graph(path3()), RemovalStrategy::targeted, fractions, 1, 0));
  CHECK(rob.rfind("fraction,lwcc_mean,lwcc_std\n", 0) == 0);
}
