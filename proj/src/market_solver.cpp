#include "riskmesh/market_solver.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "riskmesh/market_diagnostics.hpp"
#include "riskmesh/market_operator.hpp"
#include "riskmesh/random.hpp"

namespace riskmesh {

DivergenceError::DivergenceError(const std::string& message, int iteration)
    : std::runtime_error(message), iteration_(iteration) {}

std::vector<double> project_simplex(const std::vector<double>& v, double total) {
  if (v.empty()) return {};
  std::vector<double> sorted = v;
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    cumulative += sorted[i];
    const double t = (cumulative - total) / static_cast<double>(i + 1);
    if (sorted[i] - t > 0.0) theta = t;
  }
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::max(0.0, v[i] - theta);
  return out;
}

namespace {

void project_in_place(EquilibriumState& x, const SupernetworkModel& model, const std::optional<double>& frozen) {
  const MarketShape& sh = model.shape;
  Matrix& q1 = x.flows.layers[0];
  Matrix& q2 = x.flows.layers[1];
  std::vector<double> row(sh.I + sh.J + 1);
  for (std::size_t h = 0; h < sh.H; ++h) {
    for (std::size_t i = 0; i < sh.I; ++i) row[i] = q1(h, i);
    for (std::size_t j = 0; j < sh.J; ++j) row[sh.I + j] = q2(h, j);
    row.back() = x.flows.slack[h];
    const std::vector<double> p = project_simplex(row, model.S[h]);
    for (std::size_t i = 0; i < sh.I; ++i) q1(h, i) = p[i];
    for (std::size_t j = 0; j < sh.J; ++j) q2(h, j) = p[sh.I + j];
    x.flows.slack[h] = p.back();
  }
  for (std::size_t l = 2; l < kLayerCount; ++l) {
    for (double& v : x.flows.layers[l].data()) v = std::max(0.0, v);
  }
  for (auto& m : x.relations.layers) {
    for (double& v : m.data()) v = frozen ? *frozen : std::clamp(v, 0.0, 1.0);
  }
  for (auto* prices : {&x.prices.gamma_I, &x.prices.gamma_J, &x.prices.rho4}) {
    for (double& v : *prices) v = std::max(0.0, v);
  }
}

}  // namespace

EquilibriumState project_feasible(const EquilibriumState& state, const SupernetworkModel& model) {
  EquilibriumState out = state;
  project_in_place(out, model, std::nullopt);
  return out;
}

EquilibriumState initial_state(const SupernetworkModel& model, std::uint64_t seed) {
  const MarketShape& sh = model.shape;
  Rng rng(seed);
  EquilibriumState x = EquilibriumState::zero(sh);
  const double parts = static_cast<double>(sh.I + sh.J + 1);
  const double mean_s = std::accumulate(model.S.begin(), model.S.end(), 0.0) / static_cast<double>(sh.H);
  for (std::size_t l = 0; l < kLayerCount; ++l) {
    Matrix& q = x.flows.layers[l];
    for (std::size_t r = 0; r < q.rows(); ++r) {
      const double cap = (l < 2 ? model.S[r] : mean_s) / parts;
      for (std::size_t c = 0; c < q.cols(); ++c) q(r, c) = rng.uniform(0.0, cap);
    }
    for (double& v : x.relations.layers[l].data()) v = 0.5;
  }
  for (std::size_t h = 0; h < sh.H; ++h) {
    x.flows.slack[h] = model.S[h] - x.flows.layers[0].row_sum(h) - x.flows.layers[1].row_sum(h);
  }
  std::fill(x.prices.gamma_I.begin(), x.prices.gamma_I.end(), 1.0);
  std::fill(x.prices.gamma_J.begin(), x.prices.gamma_J.end(), 1.0);
  std::fill(x.prices.rho4.begin(), x.prices.rho4.end(), 1.0);
  return project_feasible(x, model);
}

SolveResult solve(const SupernetworkModel& model, const SolveConfig& config) {
  if (!(config.step > 0.0)) throw std::invalid_argument("step size must be positive");
  if (!(config.epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  if (config.max_iterations < 1) throw std::invalid_argument("max_iterations must be at least 1");

  SupernetworkModel effective = model;
  if (config.frozen_relations) {
    std::fill(effective.beta_H.begin(), effective.beta_H.end(), 0.0);
    std::fill(effective.beta_I.begin(), effective.beta_I.end(), 0.0);
    std::fill(effective.beta_J.begin(), effective.beta_J.end(), 0.0);
  }
  const MarketOperator F = assemble_operator(effective);

  EquilibriumState x = initial_state(effective, config.seed);
  project_in_place(x, effective, config.frozen_relations);
  std::vector<double> xf = flatten(x);
  EquilibriumState trial = x;

  // One projected step from `base` along the operator evaluated at `at`.
  const auto step_from = [&](const std::vector<double>& base, const EquilibriumState& at, double a) {
    const std::vector<double> fv = flatten(F(at));
    std::vector<double> next(base.size());
    for (std::size_t n = 0; n < base.size(); ++n) next[n] = base[n] - a * fv[n];
    unflatten(next, trial);
    project_in_place(trial, effective, config.frozen_relations);
    return trial;
  };

  SolveReport report;
  double first_delta = 0.0;
  for (int it = 1; it <= config.max_iterations; ++it) {
    const double a = config.diminishing ? config.step / std::sqrt(static_cast<double>(it)) : config.step;
    EquilibriumState next = step_from(xf, x, a);
    if (config.method == SolverMethod::extragradient) next = step_from(xf, next, a);
    const std::vector<double> nf = flatten(next);
    double delta = 0.0;
    for (std::size_t n = 0; n < nf.size(); ++n) delta = std::max(delta, std::abs(nf[n] - xf[n]));
    if (!std::isfinite(delta)) throw DivergenceError("iterates became non-finite", it);
    if (it == 1) first_delta = std::max(delta, 1e-12);
    if (delta > 1e6 * first_delta) {
      throw DivergenceError("successive change grew beyond 1e6 times its initial value", it);
    }
    x = std::move(next);
    xf = nf;
    report.iterations = it;
    report.final_delta = delta;
    if (delta < config.epsilon) {
      report.converged = true;
      break;
    }
  }

  const EquilibriumCheck check = check_equilibrium(effective, x, 1e-6, config.frozen_relations.has_value());
  report.vi_residual = check.vi_residual;
  report.feasibility_residual = check.feasibility_residual;
  return {std::move(x), report};
}

std::array<double, kLayerCount> aggregate_flows(const EquilibriumState& state) {
  std::array<double, kLayerCount> out{};
  for (std::size_t l = 0; l < kLayerCount; ++l) out[l] = state.flows.layers[l].sum();
  return out;
}

ScenarioComparison compare_scenarios(const SupernetworkModel& model, const SolveConfig& config) {
  ScenarioComparison out;
  SolveConfig full = config;
  full.frozen_relations.reset();
  SolveConfig frozen = config;
  frozen.frozen_relations = 0.0;
  out.full = solve(model, full);
  out.frozen = solve(model, frozen);
  out.full_totals = aggregate_flows(out.full.state);
  out.frozen_totals = aggregate_flows(out.frozen.state);
  for (std::size_t l = 0; l < kLayerCount; ++l) {
    const auto& a = out.full.state.flows.layers[l].data();
    const auto& b = out.frozen.state.flows.layers[l].data();
    double worst = 0.0;
    for (std::size_t n = 0; n < a.size(); ++n) worst = std::max(worst, std::abs(a[n] - b[n]));
    out.max_change[l] = worst;
  }
  return out;
}

}  // namespace riskmesh
