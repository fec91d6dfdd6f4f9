#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "riskmesh/market_model.hpp"
#include "riskmesh/market_operator.hpp"

namespace riskmesh {

struct EquilibriumCheck {
  double vi_residual = 0.0;           // worst complementarity violation over all variables
  std::string worst_variable;         // where vi_residual was attained
  double feasibility_residual = 0.0;  // worst of budget, bounds and conservation violations
  double budget_residual = 0.0;
  double bound_residual = 0.0;
  double clearing_residual = 0.0;     // |inflow - demand| where rho4 > tol
  /// Per platform: outflow-over-inflow violation, or |inflow - outflow| when
  /// the platform's multiplier is positive.
  std::vector<double> conservation_I;
  std::vector<double> conservation_J;
  /// Budget multipliers used to reduce the investor-row components.
  std::vector<double> budget_multiplier;
};

/// Complementarity and feasibility residuals of `state`. A variable above
/// `tol` contributes |F_x|, one at its bound the sign violation of F_x.
/// Investor-row components are taken net of the budget multiplier. With
/// `relations_frozen` the relation conditions are skipped.
EquilibriumCheck check_equilibrium(const SupernetworkModel& model, const EquilibriumState& state, double tol = 1e-6,
                                   bool relations_frozen = false);

class NotEquilibriumError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tier prices from each payee's vanishing bracket: rho1 from the investor
/// (net of its budget multiplier), rho2 from the internet platform
/// (marginal costs plus gamma_i), rho3 from the traditional platform.
/// Throws NotEquilibriumError when the complementarity residual exceeds
/// `tol`.
TierPrices recover_prices(const SupernetworkModel& model, const EquilibriumState& state, double tol = 1e-3);

/// platform_utility with prices from recover_prices.
double platform_utility(const SupernetworkModel& model, const EquilibriumState& state, std::size_t i);

/// Grid-search oracle for 1x1x1x1 models: enumerates every feasible flow
/// vector on the grid, sets each relation level to its exact minimiser, and
/// keeps the point of least potential; the search is then repeated twice on
/// grids five times finer around the incumbent. Demand prices come from the
/// inverse demand curve and multipliers from the vanishing brackets of the
/// platforms' outgoing links.
EquilibriumState brute_force_equilibrium(const SupernetworkModel& model, double grid_step);

struct ExistenceReport {
  /// Per layer Q1..Q5: the marginal-cost sum of every link stays >= M at
  /// q = N over the sampled relation levels.
  std::array<bool, kLayerCount> flow_bound{};
  std::array<double, kLayerCount> flow_minimum{};
  bool demand_bound = false;  // d_k(R) <= M for every k
  double demand_maximum = 0.0;
  bool monotone = false;
  double worst_monotonicity = 0.0;  // most negative <F(X)-F(Y), X-Y> / |X-Y|^2
  std::size_t pairs = 0;

  bool all() const;
};

ExistenceReport check_existence_bounds(const SupernetworkModel& model, double M, double N, double R,
                                       std::size_t pairs = 1000, std::uint64_t seed = 0);

}  // namespace riskmesh
