#pragma once

#include <array>
#include <stdexcept>
#include <vector>

#include "riskmesh/market_model.hpp"

namespace riskmesh {

struct SolveReport {
  int iterations = 0;
  bool converged = false;
  double final_delta = 0.0;           // max-norm change of the last iterate
  double vi_residual = 0.0;           // worst complementarity violation
  double feasibility_residual = 0.0;  // worst constraint violation

  friend bool operator==(const SolveReport&, const SolveReport&) = default;
};

struct SolveResult {
  EquilibriumState state;
  SolveReport report;
};

/// Thrown when successive changes grow beyond 1e6 times the first one or
/// become non-finite.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& message, int iteration);
  int iteration() const { return iteration_; }

 private:
  int iteration_;
};

/// Euclidean projection of `v` onto {x >= 0, sum x = total}.
std::vector<double> project_simplex(const std::vector<double>& v, double total);

/// Projects each investor row (Q1 row, Q2 row, slack) onto its budget
/// simplex, clips relations to [0, 1] and prices to [0, inf). Platform
/// conservation is left to the gamma multipliers.
EquilibriumState project_feasible(const EquilibriumState& state, const SupernetworkModel& model);

/// Seeded starting point: flows uniform in [0, S/(I+J+1)], relations 0.5,
/// multipliers and demand prices 1, then projected.
EquilibriumState initial_state(const SupernetworkModel& model, std::uint64_t seed);

/// Projected dynamics X <- P(X - a F(X)) (Euler) or the extragradient
/// variant, stopping once the max-norm change drops below epsilon.
SolveResult solve(const SupernetworkModel& model, const SolveConfig& config);
inline SolveResult solve(const SupernetworkModel& model) { return solve(model, model.solver); }

/// Per-layer totals of Q1..Q5.
std::array<double, kLayerCount> aggregate_flows(const EquilibriumState& state);

struct ScenarioComparison {
  SolveResult full;
  SolveResult frozen;  // beta = 0 and every relation level held at 0
  std::array<double, kLayerCount> full_totals{};
  std::array<double, kLayerCount> frozen_totals{};
  std::array<double, kLayerCount> max_change{};  // max-norm of the per-layer flow difference
};

ScenarioComparison compare_scenarios(const SupernetworkModel& model, const SolveConfig& config);
inline ScenarioComparison compare_scenarios(const SupernetworkModel& model) {
  return compare_scenarios(model, model.solver);
}

}  // namespace riskmesh
