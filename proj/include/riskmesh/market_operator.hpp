#pragma once

#include <array>
#include <optional>
#include <vector>

#include "riskmesh/market_model.hpp"

namespace riskmesh {

/// Flat ordering of every state variable: flows Q1..Q5 (row-major), slack,
/// relations H1..H5, gamma_I, gamma_J, rho4.
std::vector<double> flatten(const EquilibriumState& state);
/// Writes `values` back into a state that already has the right shape.
void unflatten(const std::vector<double>& values, EquilibriumState& state);

/// Per-party marginals and value of one link's cost terms.
///   dq   = alpha (2 r2 q - r3 eta) + 2 c2 q + c1 - c3 eta + 2 g2 q - g3 eta - aE + 2 bT q
///   deta = -alpha r3 q + 2 f1 eta - c3 q - g3 q - beta v1
double side_dq(const LinkCoefficients& k, double alpha, double q, double eta);
double side_deta(const LinkCoefficients& k, double alpha, double beta, double q, double eta);
/// alpha r + c + g + f - beta v - e
double side_value(const LinkCoefficients& k, double alpha, double beta, double q, double eta);

/// The combined variational-inequality operator. Its value has the shape of
/// an EquilibriumState: each field holds the operator component of the
/// matching variable (slack components are zero).
class MarketOperator {
 public:
  explicit MarketOperator(SupernetworkModel model);

  EquilibriumState operator()(const EquilibriumState& state) const;
  const SupernetworkModel& model() const { return model_; }

 private:
  SupernetworkModel model_;
};

MarketOperator assemble_operator(const SupernetworkModel& model);

/// Sum of every party's link costs plus conversion costs.
double system_cost(const SupernetworkModel& model, const EquilibriumState& state);

/// Saddle function whose partial derivatives reproduce the operator:
/// F_x = dL/dx for flows and relations, F_y = -dL/dy for gamma and rho4.
double lagrangian(const SupernetworkModel& model, const EquilibriumState& state);

/// system_cost minus the demanders' benefit (integral of inverse demand).
/// Its minimiser over the budget and conservation constraints is an
/// equilibrium.
double potential(const SupernetworkModel& model, const EquilibriumState& state);

/// Transaction prices rho1 (Q1, Q2), rho2 (Q3, Q4), rho3 (Q5) per link.
/// Absent on links without flow.
struct TierPrices {
  std::array<std::vector<std::optional<double>>, kLayerCount> layers;
};

/// Multi-objective utility of internet platform i: net income minus
/// alpha_i times risk plus beta_i times relationship value. Missing prices
/// count as zero.
double platform_utility(const SupernetworkModel& model, const EquilibriumState& state, std::size_t i,
                        const TierPrices& prices);

}  // namespace riskmesh
