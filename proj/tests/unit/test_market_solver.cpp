#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "riskmesh/market_diagnostics.hpp"
#include "riskmesh/market_io.hpp"
#include "riskmesh/market_solver.hpp"
#include "riskmesh/random.hpp"

using namespace riskmesh;

namespace {

const std::string kData = RISKMESH_DATA_DIR;
const std::string kFixtures = std::string(RISKMESH_DATA_DIR) + "/../tests/fixtures/market";

double max_flow_gap(const EquilibriumState& a, const EquilibriumState& b) {
  double gap = 0.0;
  for (std::size_t l = 0; l < kLayerCount; ++l) {
    const auto& x = a.flows.layers[l].data();
    const auto& y = b.flows.layers[l].data();
    for (std::size_t n = 0; n < x.size(); ++n) gap = std::max(gap, std::abs(x[n] - y[n]));
  }
  return gap;
}

double max_flow_gap_layer(const EquilibriumState& a, const EquilibriumState& b, std::size_t l) {
  double gap = 0.0;
  const auto& x = a.flows.layers[l].data();
  const auto& y = b.flows.layers[l].data();
  for (std::size_t n = 0; n < x.size(); ++n) gap = std::max(gap, std::abs(x[n] - y[n]));
  return gap;
}

// Only squared terms: every equilibrium condition is then homogeneous in
// flows, multipliers, prices, endowments and demand intercepts.
SupernetworkModel quadratic_model(double scale) {
  SupernetworkModel m = SupernetworkModel::blank({2, 1, 2, 2});
  m.S = {3.0 * scale, 2.0 * scale};
  m.d0 = {4.0 * scale, 3.0 * scale};
  m.d1 = {0.5, 0.8};
  m.alpha_H = {0.5, 1.0};
  m.alpha_I = {0.3};
  m.alpha_J = {0.2, 0.4};
  m.conversion_I = {0.05};
  m.conversion_J = {0.1, 0.02};
  Rng rng(6);
  for (auto& layer : m.layers) {
    for (auto& k : layer.sender) {
      k.c2 = 0.2 + rng.uniform();
      k.r2 = rng.uniform();
      k.f1 = 0.5;
    }
    for (auto& k : layer.receiver) k.c2 = 0.1 + rng.uniform();
  }
  m.solver.step = 0.05;
  m.solver.epsilon = 1e-10;
  m.solver.max_iterations = 400000;
  m.solver.method = SolverMethod::extragradient;
  return m;
}

}  // namespace

TEST_CASE("simplex projection") {
  CHECK(project_simplex({0.2, 0.3, 0.5}, 1.0) == std::vector<double>{0.2, 0.3, 0.5});
  const auto p = project_simplex({3.0, 0.0, -1.0}, 1.0);
  CHECK(p[0] == doctest::Approx(1.0));
  CHECK(p[1] == 0.0);
  CHECK(p[2] == 0.0);
  const auto even = project_simplex({1.0, 1.0}, 1.0);
  CHECK(even[0] == doctest::Approx(0.5));
  CHECK(even[1] == doctest::Approx(0.5));
  CHECK(project_simplex({5.0}, 2.0) == std::vector<double>{2.0});

  Rng rng(10);
  for (int t = 0; t < 300; ++t) {
    std::vector<double> v(1 + rng.below(7));
    for (double& x : v) x = rng.uniform(-4.0, 4.0);
    const double total = rng.uniform(0.0, 5.0);
    const auto p = project_simplex(v, total);
    CHECK(std::accumulate(p.begin(), p.end(), 0.0) == doctest::Approx(total));
    for (double x : p) CHECK(x >= 0.0);
    // Idempotent, and no feasible point is closer to v.
    const auto pp = project_simplex(p, total);
    for (std::size_t n = 0; n < p.size(); ++n) CHECK(pp[n] == doctest::Approx(p[n]).epsilon(1e-12));
    double dist = 0.0;
    for (std::size_t n = 0; n < p.size(); ++n) dist += (p[n] - v[n]) * (p[n] - v[n]);
    for (int s = 0; s < 20; ++s) {
      std::vector<double> w(v.size());
      for (double& x : w) x = -std::log(1.0 - rng.uniform());
      const double sum = std::accumulate(w.begin(), w.end(), 0.0);
      double other = 0.0;
      for (std::size_t n = 0; n < w.size(); ++n) {
        const double y = w[n] / sum * total;
        other += (y - v[n]) * (y - v[n]);
      }
      CHECK(dist <= other + 1e-12);
    }
  }
}

TEST_CASE("projection onto the feasible set") {
  const SupernetworkModel model = load_model(kData + "/demo_market.toml");
  Rng rng(2);
  EquilibriumState x = EquilibriumState::zero(model.shape);
  for (auto& q : x.flows.layers)
    for (double& v : q.data()) v = rng.uniform(-10.0, 40.0);
  for (auto& e : x.relations.layers)
    for (double& v : e.data()) v = rng.uniform(-1.0, 2.0);
  x.prices.gamma_I = {-1.0, 2.0};
  x.prices.rho4 = {-3.0, 0.5, 7.0};
  const EquilibriumState p = project_feasible(x, model);
  for (std::size_t h = 0; h < 2; ++h) {
    CHECK(p.flows.layers[0].row_sum(h) + p.flows.layers[1].row_sum(h) + p.flows.slack[h] ==
          doctest::Approx(model.S[h]));
  }
  for (const auto& e : p.relations.layers)
    for (double v : e.data()) CHECK((v >= 0.0 && v <= 1.0));
  CHECK(p.prices.gamma_I == std::vector<double>{0.0, 2.0});
  CHECK(p.prices.rho4 == std::vector<double>{0.0, 0.5, 7.0});
  for (std::size_t l = 2; l < kLayerCount; ++l)
    for (double v : p.flows.layers[l].data()) CHECK(v >= 0.0);
}

TEST_CASE("solver agrees with the grid-search oracle") {
  for (const char* name : {"prohibitive", "symmetric", "standard"}) {
    CAPTURE(name);
    const SupernetworkModel model = load_model(kFixtures + "/" + name + ".toml");
    const SolveResult result = solve(model);
    CHECK(result.report.converged);
    const EquilibriumState oracle = brute_force_equilibrium(model, 0.05);
    CHECK(max_flow_gap(result.state, oracle) <= 0.05);
    const EquilibriumCheck check = check_equilibrium(model, result.state);
    CHECK(check.vi_residual <= 1e-4);
    CHECK(check.feasibility_residual <= 1e-4);
  }
}

TEST_CASE("prohibitive costs leave capital uninvested") {
  const SupernetworkModel model = load_model(kFixtures + "/prohibitive.toml");
  const SolveResult result = solve(model);
  for (double total : aggregate_flows(result.state)) CHECK(total <= 1e-6);
  CHECK(result.state.flows.slack[0] == doctest::Approx(1.0));
}

TEST_CASE("mirror-image routes carry equal flow") {
  const SupernetworkModel model = load_model(kFixtures + "/symmetric.toml");
  const SolveResult result = solve(model);
  const auto totals = aggregate_flows(result.state);
  CHECK(totals[0] == doctest::Approx(totals[1]).epsilon(1e-5));
  CHECK(totals[3] == doctest::Approx(totals[4]).epsilon(1e-5));
  CHECK(totals[2] <= 1e-6);
}

TEST_CASE("solver is deterministic for a fixed seed") {
  SupernetworkModel model = load_model(kFixtures + "/standard.toml");
  model.solver.epsilon = 1e-6;
  const SolveResult a = solve(model);
  const SolveResult b = solve(model);
  CHECK(a.state == b.state);
  CHECK(a.report == b.report);
  CHECK(initial_state(model, 1) == initial_state(model, 1));
  CHECK_FALSE(initial_state(model, 1) == initial_state(model, 2));
}

TEST_CASE("equilibrium does not depend on the starting point") {
  SupernetworkModel model = load_model(kFixtures + "/standard.toml");
  SolveConfig config = model.solver;
  config.seed = 99;
  CHECK(max_flow_gap(solve(model).state, solve(model, config).state) <= 1e-6);
  config.method = SolverMethod::euler;
  config.step = 0.05;
  const SolveResult euler = solve(model, config);
  CHECK(euler.report.converged);
  CHECK(max_flow_gap(solve(model).state, euler.state) <= 1e-5);
}

TEST_CASE("flows scale with endowments and demand in a purely quadratic market") {
  const SolveResult base = solve(quadratic_model(1.0));
  REQUIRE(base.report.converged);
  for (double lambda : {0.5, 2.0, 3.0}) {
    CAPTURE(lambda);
    const SolveResult scaled = solve(quadratic_model(lambda));
    REQUIRE(scaled.report.converged);
    for (std::size_t l = 0; l < kLayerCount; ++l) {
      const auto& x = base.state.flows.layers[l].data();
      const auto& y = scaled.state.flows.layers[l].data();
      for (std::size_t n = 0; n < x.size(); ++n) CHECK(std::abs(y[n] - lambda * x[n]) <= 1e-6 * lambda + 1e-7);
    }
    for (std::size_t k = 0; k < 2; ++k) {
      CHECK(std::abs(scaled.state.prices.rho4[k] - lambda * base.state.prices.rho4[k]) <= 1e-5 * lambda);
    }
    for (const auto& e : scaled.state.relations.layers)
      for (double v : e.data()) CHECK(v == doctest::Approx(0.0));
  }
}

TEST_CASE("solver configuration errors and divergence") {
  const SupernetworkModel model = load_model(kData + "/demo_market.toml");
  SolveConfig config = model.solver;
  config.step = 0.0;
  CHECK_THROWS_AS(solve(model, config), std::invalid_argument);
  config = model.solver;
  config.epsilon = -1.0;
  CHECK_THROWS_AS(solve(model, config), std::invalid_argument);
  config = model.solver;
  config.max_iterations = 0;
  CHECK_THROWS_AS(solve(model, config), std::invalid_argument);
  config = model.solver;
  config.step = 1000.0;
  CHECK_THROWS_AS(solve(model, config), DivergenceError);

  SupernetworkModel bad = model;
  bad.layers[2].sender_at(0, 0).c2 = -1.0;
  CHECK_THROWS_AS(solve(bad), ModelError);
}

TEST_CASE("iteration cap stops without convergence") {
  SupernetworkModel model = load_model(kData + "/demo_market.toml");
  model.solver.max_iterations = 5;
  const SolveResult r = solve(model);
  CHECK_FALSE(r.report.converged);
  CHECK(r.report.iterations == 5);
}

TEST_CASE("existence bounds") {
  const SupernetworkModel demo = load_model(kData + "/demo_market.toml");
  const ExistenceReport ok = check_existence_bounds(demo, 40.0, 200.0, 700.0, 200);
  CHECK(ok.pairs == 200);
  CHECK(ok.monotone);
  CHECK(ok.worst_monotonicity >= -1e-9);
  CHECK(ok.demand_bound);
  CHECK(ok.all());

  const ExistenceReport tight = check_existence_bounds(demo, 1.0, 1.0, 1.0, 10);
  CHECK_FALSE(tight.all());
  CHECK_FALSE(tight.demand_bound);

  SupernetworkModel concave = SupernetworkModel::blank({1, 1, 1, 1});
  concave.alpha_H = {1.0};
  for (auto& layer : concave.layers) layer.sender[0].c2 = 0.1;
  concave.layers[0].sender[0].r2 = -2.0;
  CHECK_FALSE(model_violations(concave).empty());
  const ExistenceReport bad = check_existence_bounds(concave, 1.0, 10.0, 10.0, 200);
  CHECK_FALSE(bad.monotone);
  CHECK(bad.worst_monotonicity < 0.0);

  CHECK_THROWS_AS(check_existence_bounds(demo, 0.0, 1.0, 1.0), std::invalid_argument);
}

TEST_CASE("relationship scenario comparison on the demo market") {
  const SupernetworkModel model = load_model(kData + "/demo_market.toml");
  const ScenarioComparison cmp = compare_scenarios(model);
  CHECK(cmp.full.report.converged);
  CHECK(cmp.frozen.report.converged);
  for (const auto& e : cmp.frozen.state.relations.layers)
    for (double v : e.data()) CHECK(v == 0.0);
  for (std::size_t l = 0; l < kLayerCount; ++l) {
    CHECK(cmp.full_totals[l] == doctest::Approx(aggregate_flows(cmp.full.state)[l]));
    CHECK(cmp.max_change[l] == doctest::Approx(max_flow_gap_layer(cmp.full.state, cmp.frozen.state, l)));
  }
  // Relationships move the platform-to-platform and downstream layers more
  // than the investor layers.
  CHECK(cmp.max_change[3] > cmp.max_change[0]);
  CHECK(cmp.max_change[3] > cmp.max_change[1]);
}

TEST_CASE("transaction prices at a solved equilibrium") {
  const SupernetworkModel model = load_model(kFixtures + "/standard.toml");
  const SolveResult r = solve(model);
  const TierPrices prices = recover_prices(model, r.state);
  for (std::size_t l = 0; l < kLayerCount; ++l) {
    REQUIRE(prices.layers[l].size() == 1);
    CHECK(prices.layers[l][0].has_value() == (r.state.flows.layers[l](0, 0) > 1e-6));
  }
  // The traditional platform sells at its own marginal cost plus its multiplier.
  const double q5 = r.state.flows.layers[4](0, 0);
  const double e5 = r.state.relations.layers[4](0, 0);
  const LinkCoefficients& k5 = model.layers[4].sender_at(0, 0);
  if (prices.layers[4][0]) {
    CHECK(*prices.layers[4][0] == doctest::Approx(side_dq(k5, 0.7, q5, e5) + r.state.prices.gamma_J[0]).epsilon(1e-6));
    // and the demander pays its demand price less its own marginal cost
    const double buyer = side_dq(model.layers[4].receiver_at(0, 0), 0.0, q5, e5);
    CHECK(*prices.layers[4][0] == doctest::Approx(r.state.prices.rho4[0] - buyer).epsilon(1e-4));
  }
  CHECK(std::isfinite(platform_utility(model, r.state, 0)));

  EquilibriumState off = r.state;
  off.flows.layers[3](0, 0) += 0.5;
  CHECK_THROWS_AS(recover_prices(model, off), NotEquilibriumError);
}
