#include "riskmesh/market_operator.hpp"

#include <stdexcept>

namespace riskmesh {

std::vector<double> flatten(const EquilibriumState& state) {
  std::vector<double> out;
  for (const auto& m : state.flows.layers) out.insert(out.end(), m.data().begin(), m.data().end());
  out.insert(out.end(), state.flows.slack.begin(), state.flows.slack.end());
  for (const auto& m : state.relations.layers) out.insert(out.end(), m.data().begin(), m.data().end());
  out.insert(out.end(), state.prices.gamma_I.begin(), state.prices.gamma_I.end());
  out.insert(out.end(), state.prices.gamma_J.begin(), state.prices.gamma_J.end());
  out.insert(out.end(), state.prices.rho4.begin(), state.prices.rho4.end());
  return out;
}

void unflatten(const std::vector<double>& values, EquilibriumState& state) {
  std::size_t pos = 0;
  const auto take = [&](std::vector<double>& dst) {
    if (pos + dst.size() > values.size()) throw std::invalid_argument("flat state too short");
    std::copy(values.begin() + static_cast<std::ptrdiff_t>(pos),
              values.begin() + static_cast<std::ptrdiff_t>(pos + dst.size()), dst.begin());
    pos += dst.size();
  };
  for (auto& m : state.flows.layers) take(m.data());
  take(state.flows.slack);
  for (auto& m : state.relations.layers) take(m.data());
  take(state.prices.gamma_I);
  take(state.prices.gamma_J);
  take(state.prices.rho4);
  if (pos != values.size()) throw std::invalid_argument("flat state too long");
}

double side_dq(const LinkCoefficients& k, double alpha, double q, double eta) {
  return alpha * (2.0 * k.r2 * q - k.r3 * eta) + 2.0 * k.c2 * q + k.c1 - k.c3 * eta + 2.0 * k.g2 * q - k.g3 * eta -
         k.aE + 2.0 * k.bT * q;
}

double side_deta(const LinkCoefficients& k, double alpha, double beta, double q, double eta) {
  return -alpha * k.r3 * q + 2.0 * k.f1 * eta - k.c3 * q - k.g3 * q - beta * k.v1;
}

double side_value(const LinkCoefficients& k, double alpha, double beta, double q, double eta) {
  const double risk = k.r2 * q * q - k.r3 * q * eta;
  const double transaction = k.c2 * q * q + k.c1 * q - k.c3 * q * eta;
  const double credit = k.g2 * q * q - k.g3 * q * eta;
  const double relation = k.f1 * eta * eta;
  const double level = k.v1 * eta;
  const double operational = k.aE * q - k.bT * q * q;
  return alpha * risk + transaction + credit + relation - beta * level - operational;
}

MarketOperator::MarketOperator(SupernetworkModel model) : model_(std::move(model)) {}

EquilibriumState MarketOperator::operator()(const EquilibriumState& x) const {
  const SupernetworkModel& m = model_;
  const MarketShape& sh = m.shape;
  EquilibriumState f = EquilibriumState::zero(sh);

  std::vector<double> in_I(sh.I), in_J(sh.J);
  for (std::size_t i = 0; i < sh.I; ++i) in_I[i] = platform_inflow(x, true, i);
  for (std::size_t j = 0; j < sh.J; ++j) in_J[j] = platform_inflow(x, false, j);

  for (std::size_t l = 0; l < kLayerCount; ++l) {
    const LayerInfo& info = layer_info(l);
    const LayerFunctions& fn = m.layers[l];
    const Matrix& q = x.flows.layers[l];
    const Matrix& eta = x.relations.layers[l];
    for (std::size_t r = 0; r < q.rows(); ++r) {
      const double as = m.alpha(info.sender, r);
      const double bs = m.beta(info.sender, r);
      for (std::size_t c = 0; c < q.cols(); ++c) {
        const double ar = m.alpha(info.receiver, c);
        const double br = m.beta(info.receiver, c);
        const LinkCoefficients& ks = fn.sender_at(r, c);
        const LinkCoefficients& kr = fn.receiver_at(r, c);
        double fq = side_dq(ks, as, q(r, c), eta(r, c)) + side_dq(kr, ar, q(r, c), eta(r, c));
        switch (info.sender) {
          case Agent::internet: fq += x.prices.gamma_I[r]; break;
          case Agent::traditional: fq += x.prices.gamma_J[r]; break;
          default: break;
        }
        switch (info.receiver) {
          case Agent::internet: fq += 2.0 * m.conversion_I[c] * in_I[c] - x.prices.gamma_I[c]; break;
          case Agent::traditional: fq += 2.0 * m.conversion_J[c] * in_J[c] - x.prices.gamma_J[c]; break;
          case Agent::demander: fq -= x.prices.rho4[c]; break;
          default: break;
        }
        f.flows.layers[l](r, c) = fq;
        f.relations.layers[l](r, c) =
            side_deta(ks, as, bs, q(r, c), eta(r, c)) + side_deta(kr, ar, br, q(r, c), eta(r, c));
      }
    }
  }
  for (std::size_t i = 0; i < sh.I; ++i) f.prices.gamma_I[i] = in_I[i] - platform_outflow(x, true, i);
  for (std::size_t j = 0; j < sh.J; ++j) f.prices.gamma_J[j] = in_J[j] - platform_outflow(x, false, j);
  for (std::size_t k = 0; k < sh.K; ++k) f.prices.rho4[k] = demander_inflow(x, k) - m.demand(k, x.prices.rho4[k]);
  return f;
}

MarketOperator assemble_operator(const SupernetworkModel& model) {
  check_model(model);
  return MarketOperator(model);
}

double system_cost(const SupernetworkModel& m, const EquilibriumState& x) {
  double total = 0.0;
  for (std::size_t l = 0; l < kLayerCount; ++l) {
    const LayerInfo& info = layer_info(l);
    const Matrix& q = x.flows.layers[l];
    const Matrix& eta = x.relations.layers[l];
    for (std::size_t r = 0; r < q.rows(); ++r) {
      for (std::size_t c = 0; c < q.cols(); ++c) {
        total += side_value(m.layers[l].sender_at(r, c), m.alpha(info.sender, r), m.beta(info.sender, r), q(r, c),
                            eta(r, c));
        total += side_value(m.layers[l].receiver_at(r, c), m.alpha(info.receiver, c), m.beta(info.receiver, c),
                            q(r, c), eta(r, c));
      }
    }
  }
  for (std::size_t i = 0; i < m.shape.I; ++i) {
    const double in = platform_inflow(x, true, i);
    total += m.conversion_I[i] * in * in;
  }
  for (std::size_t j = 0; j < m.shape.J; ++j) {
    const double in = platform_inflow(x, false, j);
    total += m.conversion_J[j] * in * in;
  }
  return total;
}

double lagrangian(const SupernetworkModel& m, const EquilibriumState& x) {
  double total = system_cost(m, x);
  for (std::size_t i = 0; i < m.shape.I; ++i) {
    total += x.prices.gamma_I[i] * (platform_outflow(x, true, i) - platform_inflow(x, true, i));
  }
  for (std::size_t j = 0; j < m.shape.J; ++j) {
    total += x.prices.gamma_J[j] * (platform_outflow(x, false, j) - platform_inflow(x, false, j));
  }
  for (std::size_t k = 0; k < m.shape.K; ++k) {
    const double rho = x.prices.rho4[k];
    const double choke = m.d0[k] / m.d1[k];
    // Integral of the demand curve from 0 to rho.
    const double area = rho <= choke ? m.d0[k] * rho - 0.5 * m.d1[k] * rho * rho : 0.5 * m.d0[k] * choke;
    total += area - rho * demander_inflow(x, k);
  }
  return total;
}

double potential(const SupernetworkModel& m, const EquilibriumState& x) {
  double total = system_cost(m, x);
  for (std::size_t k = 0; k < m.shape.K; ++k) {
    const double s = demander_inflow(x, k);
    // Integral of the inverse demand max(0, (d0 - t) / d1) from 0 to s.
    const double benefit = s <= m.d0[k] ? (m.d0[k] * s - 0.5 * s * s) / m.d1[k] : 0.5 * m.d0[k] * m.d0[k] / m.d1[k];
    total -= benefit;
  }
  return total;
}

double platform_utility(const SupernetworkModel& m, const EquilibriumState& x, std::size_t i,
                        const TierPrices& prices) {
  if (i >= m.shape.I) throw std::out_of_range("internet platform index out of range");
  const double alpha = m.alpha_I[i];
  const double beta = m.beta_I[i];
  const auto price = [&](std::size_t layer, std::size_t idx) {
    const auto& v = prices.layers[layer];
    return idx < v.size() && v[idx] ? *v[idx] : 0.0;
  };

  double u = 0.0;
  for (std::size_t l : {std::size_t{2}, std::size_t{3}}) {
    const Matrix& q = x.flows.layers[l];
    const Matrix& eta = x.relations.layers[l];
    for (std::size_t c = 0; c < q.cols(); ++c) {
      u += price(l, i * q.cols() + c) * q(i, c) - side_value(m.layers[l].sender_at(i, c), alpha, beta, q(i, c), eta(i, c));
    }
  }
  const double in = platform_inflow(x, true, i);
  u -= m.conversion_I[i] * in * in;
  const Matrix& q1 = x.flows.layers[0];
  const Matrix& eta1 = x.relations.layers[0];
  for (std::size_t h = 0; h < q1.rows(); ++h) {
    u -= price(0, h * q1.cols() + i) * q1(h, i) + side_value(m.layers[0].receiver_at(h, i), alpha, beta, q1(h, i), eta1(h, i));
  }
  return u;
}

}  // namespace riskmesh
