#include "riskmesh/market_diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "riskmesh/random.hpp"

namespace riskmesh {

namespace {

std::string cell(std::string_view what, std::size_t r, std::size_t c) {
  return std::string(what) + "[" + std::to_string(r) + "," + std::to_string(c) + "]";
}

std::string entry(std::string_view what, std::size_t i) { return std::string(what) + "[" + std::to_string(i) + "]"; }

// Residual of a variable bounded below by zero.
double lower_bound_residual(double x, double f, double tol) { return x > tol ? std::abs(f) : std::max(0.0, -f); }

}  // namespace

EquilibriumCheck check_equilibrium(const SupernetworkModel& model, const EquilibriumState& x, double tol,
                                   bool relations_frozen) {
  const MarketShape& sh = model.shape;
  const EquilibriumState f = MarketOperator(model)(x);
  EquilibriumCheck out;
  const auto note = [&](double residual, const std::string& where) {
    if (residual > out.vi_residual) {
      out.vi_residual = residual;
      out.worst_variable = where;
    }
  };

  // Investor rows carry the budget equality; its multiplier mu_h shifts the
  // row's components. Slack has no cost, so mu_h = 0 whenever u_h > 0.
  out.budget_multiplier.assign(sh.H, 0.0);
  for (std::size_t h = 0; h < sh.H; ++h) {
    double mu = 0.0;
    if (x.flows.slack[h] <= tol) {
      double sum = 0.0;
      std::size_t count = 0;
      for (std::size_t l = 0; l < 2; ++l) {
        const Matrix& q = x.flows.layers[l];
        for (std::size_t c = 0; c < q.cols(); ++c) {
          if (q(h, c) > tol) {
            sum += f.flows.layers[l](h, c);
            ++count;
          }
        }
      }
      if (count > 0) mu = std::min(0.0, sum / static_cast<double>(count));
    }
    out.budget_multiplier[h] = mu;
    for (std::size_t l = 0; l < 2; ++l) {
      const Matrix& q = x.flows.layers[l];
      for (std::size_t c = 0; c < q.cols(); ++c) {
        note(lower_bound_residual(q(h, c), f.flows.layers[l](h, c) - mu, tol),
             cell(std::string(layer_info(l).name) + " flow", h, c));
      }
    }
    note(lower_bound_residual(x.flows.slack[h], -mu, tol), entry("slack", h));
    const double budget = x.flows.layers[0].row_sum(h) + x.flows.layers[1].row_sum(h) + x.flows.slack[h];
    out.budget_residual = std::max(out.budget_residual, std::abs(budget - model.S[h]));
  }

  for (std::size_t l = 0; l < kLayerCount; ++l) {
    const Matrix& q = x.flows.layers[l];
    const Matrix& eta = x.relations.layers[l];
    const std::string name(layer_info(l).name);
    for (std::size_t r = 0; r < q.rows(); ++r) {
      for (std::size_t c = 0; c < q.cols(); ++c) {
        if (l >= 2) note(lower_bound_residual(q(r, c), f.flows.layers[l](r, c), tol), cell(name + " flow", r, c));
        out.bound_residual = std::max(out.bound_residual, -q(r, c));
        out.bound_residual = std::max({out.bound_residual, -eta(r, c), eta(r, c) - 1.0});
        if (relations_frozen) continue;
        const double fe = f.relations.layers[l](r, c);
        double res = std::abs(fe);
        if (eta(r, c) <= tol) {
          res = std::max(0.0, -fe);
        } else if (eta(r, c) >= 1.0 - tol) {
          res = std::max(0.0, fe);
        }
        note(res, cell(name + " eta", r, c));
      }
    }
  }
  for (double u : x.flows.slack) out.bound_residual = std::max(out.bound_residual, -u);

  out.conservation_I.assign(sh.I, 0.0);
  out.conservation_J.assign(sh.J, 0.0);
  for (std::size_t p = 0; p < sh.I + sh.J; ++p) {
    const bool internet = p < sh.I;
    const std::size_t idx = internet ? p : p - sh.I;
    const double gamma = internet ? x.prices.gamma_I[idx] : x.prices.gamma_J[idx];
    const double fg = internet ? f.prices.gamma_I[idx] : f.prices.gamma_J[idx];
    const double in = platform_inflow(x, internet, idx);
    const double outflow = platform_outflow(x, internet, idx);
    double residual = std::max(0.0, outflow - in);
    if (gamma > tol) residual = std::max(residual, std::abs(in - outflow));
    (internet ? out.conservation_I : out.conservation_J)[idx] = residual;
    out.bound_residual = std::max(out.bound_residual, -gamma);
    note(lower_bound_residual(gamma, fg, tol), entry(internet ? "gamma_I" : "gamma_J", idx));
  }
  for (std::size_t k = 0; k < sh.K; ++k) {
    const double rho = x.prices.rho4[k];
    out.bound_residual = std::max(out.bound_residual, -rho);
    note(lower_bound_residual(rho, f.prices.rho4[k], tol), entry("rho4", k));
    if (rho > tol) out.clearing_residual = std::max(out.clearing_residual, std::abs(f.prices.rho4[k]));
  }

  out.bound_residual = std::max(0.0, out.bound_residual);
  double conservation = 0.0;
  for (double v : out.conservation_I) conservation = std::max(conservation, v);
  for (double v : out.conservation_J) conservation = std::max(conservation, v);
  out.feasibility_residual = std::max({out.budget_residual, out.bound_residual, conservation});
  return out;
}

TierPrices recover_prices(const SupernetworkModel& model, const EquilibriumState& x, double tol) {
  const EquilibriumCheck check = check_equilibrium(model, x);
  if (check.vi_residual > tol) {
    throw NotEquilibriumError("state is not an equilibrium: residual " + std::to_string(check.vi_residual) + " at " +
                              check.worst_variable);
  }
  constexpr double kPositive = 1e-6;
  TierPrices out;
  for (std::size_t l = 0; l < kLayerCount; ++l) {
    const LayerInfo& info = layer_info(l);
    const Matrix& q = x.flows.layers[l];
    const Matrix& eta = x.relations.layers[l];
    out.layers[l].assign(q.rows() * q.cols(), std::nullopt);
    for (std::size_t r = 0; r < q.rows(); ++r) {
      for (std::size_t c = 0; c < q.cols(); ++c) {
        if (q(r, c) <= kPositive) continue;
        double price = side_dq(model.layers[l].sender_at(r, c), model.alpha(info.sender, r), q(r, c), eta(r, c));
        switch (info.sender) {
          case Agent::investor: price -= check.budget_multiplier[r]; break;
          case Agent::internet: price += x.prices.gamma_I[r]; break;
          case Agent::traditional: price += x.prices.gamma_J[r]; break;
          default: break;
        }
        out.layers[l][r * q.cols() + c] = price;
      }
    }
  }
  return out;
}

double platform_utility(const SupernetworkModel& model, const EquilibriumState& state, std::size_t i) {
  return platform_utility(model, state, i, recover_prices(model, state));
}

namespace {

// Exact minimiser over [0, 1] of the link's total cost in eta at flow q.
double best_eta(const SupernetworkModel& m, std::size_t layer, double q) {
  const LayerInfo& info = layer_info(layer);
  const LinkCoefficients& s = m.layers[layer].sender_at(0, 0);
  const LinkCoefficients& r = m.layers[layer].receiver_at(0, 0);
  const double as = m.alpha(info.sender, 0), bs = m.beta(info.sender, 0);
  const double ar = m.alpha(info.receiver, 0), br = m.beta(info.receiver, 0);
  const double quad = s.f1 + r.f1;
  const double lin = -q * (as * s.r3 + s.c3 + s.g3 + ar * r.r3 + r.c3 + r.g3) - (bs * s.v1 + br * r.v1);
  if (quad > 0.0) return std::clamp(-lin / (2.0 * quad), 0.0, 1.0);
  return lin < 0.0 ? 1.0 : 0.0;
}

}  // namespace

EquilibriumState brute_force_equilibrium(const SupernetworkModel& m, double grid_step) {
  if (!(m.shape == MarketShape{1, 1, 1, 1})) throw std::invalid_argument("brute force needs a 1x1x1x1 model");
  if (!(grid_step > 0.0)) throw std::invalid_argument("grid_step must be positive");
  check_model(m);

  const double S = m.S[0];
  constexpr double kSlop = 1e-12;
  EquilibriumState x = EquilibriumState::zero(m.shape);
  const auto evaluate = [&](const std::array<double, 5>& q) {
    for (std::size_t l = 0; l < kLayerCount; ++l) {
      x.flows.layers[l](0, 0) = q[l];
      x.relations.layers[l](0, 0) = best_eta(m, l, q[l]);
    }
    return potential(m, x);
  };

  std::array<double, 5> best{};
  double best_value = std::numeric_limits<double>::infinity();
  // Searches the grid of spacing `h` on [lo, hi] per flow, restricted to
  // the budget and conservation constraints.
  const auto search = [&](const std::array<double, 5>& lo, const std::array<double, 5>& hi, double h) {
    const auto steps = [&](std::size_t l, double upper) {
      return static_cast<long>(std::floor((std::min(hi[l], upper) - lo[l]) / h + 1e-9));
    };
    std::array<double, 5> q{};
    for (long a = 0, na = steps(0, S); a <= na; ++a) {
      q[0] = lo[0] + static_cast<double>(a) * h;
      for (long b = 0, nb = steps(1, S - q[0] + kSlop); b <= nb; ++b) {
        q[1] = lo[1] + static_cast<double>(b) * h;
        if (q[0] + q[1] > S + kSlop) break;
        for (long c = 0, nc = steps(2, q[0] + kSlop); c <= nc; ++c) {
          q[2] = lo[2] + static_cast<double>(c) * h;
          for (long d = 0, nd = steps(3, q[0] - q[2] + kSlop); d <= nd; ++d) {
            q[3] = lo[3] + static_cast<double>(d) * h;
            for (long e = 0, ne = steps(4, q[1] + q[2] + kSlop); e <= ne; ++e) {
              q[4] = lo[4] + static_cast<double>(e) * h;
              const double v = evaluate(q);
              if (v < best_value) {
                best_value = v;
                best = q;
              }
            }
          }
        }
      }
    }
  };

  std::array<double, 5> lo{};
  std::array<double, 5> hi;
  hi.fill(S);
  search(lo, hi, grid_step);
  double h = grid_step;
  for (int level = 0; level < 2; ++level) {
    for (std::size_t l = 0; l < 5; ++l) {
      lo[l] = std::max(0.0, best[l] - h);
      hi[l] = best[l] + h;
    }
    h /= 5.0;
    search(lo, hi, h);
  }

  evaluate(best);
  x.flows.slack[0] = S - best[0] - best[1];
  const double in_k = best[3] + best[4];
  x.prices.rho4[0] = std::max(0.0, (m.d0[0] - in_k) / m.d1[0]);

  // Multipliers from the brackets of outgoing links that carry flow.
  const auto link_dq = [&](std::size_t l) {
    const LayerInfo& info = layer_info(l);
    const double q = x.flows.layers[l](0, 0);
    const double eta = x.relations.layers[l](0, 0);
    return side_dq(m.layers[l].sender_at(0, 0), m.alpha(info.sender, 0), q, eta) +
           side_dq(m.layers[l].receiver_at(0, 0), m.alpha(info.receiver, 0), q, eta);
  };
  constexpr double kPositive = 1e-9;
  if (best[4] > kPositive) x.prices.gamma_J[0] = std::max(0.0, x.prices.rho4[0] - link_dq(4));
  if (best[3] > kPositive) {
    x.prices.gamma_I[0] = std::max(0.0, x.prices.rho4[0] - link_dq(3));
  } else if (best[2] > kPositive) {
    const double conversion = 2.0 * m.conversion_J[0] * (best[1] + best[2]);
    x.prices.gamma_I[0] = std::max(0.0, x.prices.gamma_J[0] - link_dq(2) - conversion);
  }
  return x;
}

bool ExistenceReport::all() const {
  return std::all_of(flow_bound.begin(), flow_bound.end(), [](bool b) { return b; }) && demand_bound && monotone;
}

ExistenceReport check_existence_bounds(const SupernetworkModel& m, double M, double N, double R, std::size_t pairs,
                                       std::uint64_t seed) {
  if (!(M > 0.0 && N > 0.0 && R > 0.0)) throw std::invalid_argument("M, N and R must be positive");
  const MarketShape& sh = m.shape;
  ExistenceReport out;

  constexpr std::array<double, 5> kEta = {0.0, 0.25, 0.5, 0.75, 1.0};
  for (std::size_t l = 0; l < kLayerCount; ++l) {
    const LayerInfo& info = layer_info(l);
    double lowest = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < layer_rows(sh, l); ++r) {
      for (std::size_t c = 0; c < layer_cols(sh, l); ++c) {
        // The receiving platform's inflow is at least N.
        double conversion = 0.0;
        if (info.receiver == Agent::internet) conversion = 2.0 * m.conversion_I[c] * N;
        if (info.receiver == Agent::traditional) conversion = 2.0 * m.conversion_J[c] * N;
        for (double eta : kEta) {
          const double v = side_dq(m.layers[l].sender_at(r, c), m.alpha(info.sender, r), N, eta) +
                           side_dq(m.layers[l].receiver_at(r, c), m.alpha(info.receiver, c), N, eta) + conversion;
          lowest = std::min(lowest, v);
        }
      }
    }
    out.flow_minimum[l] = lowest;
    out.flow_bound[l] = lowest >= M;
  }

  out.demand_maximum = 0.0;
  for (std::size_t k = 0; k < sh.K; ++k) out.demand_maximum = std::max(out.demand_maximum, m.demand(k, R));
  out.demand_bound = out.demand_maximum <= M;

  const MarketOperator F(m);
  Rng rng(seed);
  const auto sample = [&]() {
    EquilibriumState x = EquilibriumState::zero(sh);
    for (auto& layer : x.flows.layers) {
      for (double& v : layer.data()) v = rng.uniform(0.0, N);
    }
    for (auto& layer : x.relations.layers) {
      for (double& v : layer.data()) v = rng.uniform();
    }
    for (auto* p : {&x.prices.gamma_I, &x.prices.gamma_J, &x.prices.rho4}) {
      for (double& v : *p) v = rng.uniform(0.0, R);
    }
    return x;
  };
  out.worst_monotonicity = std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p < pairs; ++p) {
    const EquilibriumState x = sample();
    const EquilibriumState y = sample();
    const std::vector<double> xf = flatten(x), yf = flatten(y);
    const std::vector<double> fx = flatten(F(x)), fy = flatten(F(y));
    double inner = 0.0, norm = 0.0;
    for (std::size_t n = 0; n < xf.size(); ++n) {
      inner += (fx[n] - fy[n]) * (xf[n] - yf[n]);
      norm += (xf[n] - yf[n]) * (xf[n] - yf[n]);
    }
    if (norm > 0.0) out.worst_monotonicity = std::min(out.worst_monotonicity, inner / norm);
    ++out.pairs;
  }
  if (out.pairs == 0) out.worst_monotonicity = 0.0;
  out.monotone = out.worst_monotonicity >= -1e-9;
  return out;
}

}  // namespace riskmesh
