#include "riskmesh/market_model.hpp"

#include <cmath>
#include <numeric>

namespace riskmesh {

namespace {

constexpr std::array<LayerInfo, kLayerCount> kLayers = {{
    {"Q1", Agent::investor, Agent::internet},
    {"Q2", Agent::investor, Agent::traditional},
    {"Q3", Agent::internet, Agent::traditional},
    {"Q4", Agent::internet, Agent::demander},
    {"Q5", Agent::traditional, Agent::demander},
}};

std::string link_name(std::size_t layer, std::string_view side, std::size_t r, std::size_t c) {
  return "layers." + std::string(kLayers[layer].name) + "." + std::string(side) + " link (" + std::to_string(r) +
         "," + std::to_string(c) + ")";
}

}  // namespace

const LayerInfo& layer_info(std::size_t layer) { return kLayers.at(layer); }

std::size_t agent_count(const MarketShape& shape, Agent agent) {
  switch (agent) {
    case Agent::investor: return shape.H;
    case Agent::internet: return shape.I;
    case Agent::traditional: return shape.J;
    case Agent::demander: return shape.K;
  }
  return 0;
}

std::size_t layer_rows(const MarketShape& shape, std::size_t layer) {
  return agent_count(shape, layer_info(layer).sender);
}

std::size_t layer_cols(const MarketShape& shape, std::size_t layer) {
  return agent_count(shape, layer_info(layer).receiver);
}

double Matrix::sum() const { return std::accumulate(data_.begin(), data_.end(), 0.0); }

double Matrix::row_sum(std::size_t r) const {
  double s = 0.0;
  for (std::size_t c = 0; c < cols_; ++c) s += (*this)(r, c);
  return s;
}

double Matrix::col_sum(std::size_t c) const {
  double s = 0.0;
  for (std::size_t r = 0; r < rows_; ++r) s += (*this)(r, c);
  return s;
}

EquilibriumState EquilibriumState::zero(const MarketShape& shape) {
  EquilibriumState s;
  for (std::size_t l = 0; l < kLayerCount; ++l) {
    s.flows.layers[l] = Matrix(layer_rows(shape, l), layer_cols(shape, l));
    s.relations.layers[l] = Matrix(layer_rows(shape, l), layer_cols(shape, l));
  }
  s.flows.slack.assign(shape.H, 0.0);
  s.prices.gamma_I.assign(shape.I, 0.0);
  s.prices.gamma_J.assign(shape.J, 0.0);
  s.prices.rho4.assign(shape.K, 0.0);
  return s;
}

MarketShape EquilibriumState::shape() const {
  return {flows.layers[0].rows(), flows.layers[0].cols(), flows.layers[1].cols(), flows.layers[3].cols()};
}

double platform_inflow(const EquilibriumState& state, bool internet, std::size_t index) {
  const auto& q = state.flows.layers;
  if (internet) return q[0].col_sum(index);
  return q[1].col_sum(index) + q[2].col_sum(index);
}

double platform_outflow(const EquilibriumState& state, bool internet, std::size_t index) {
  const auto& q = state.flows.layers;
  if (internet) return q[2].row_sum(index) + q[3].row_sum(index);
  return q[4].row_sum(index);
}

double demander_inflow(const EquilibriumState& state, std::size_t k) {
  return state.flows.layers[3].col_sum(k) + state.flows.layers[4].col_sum(k);
}

double& coefficient(LinkCoefficients& link, std::string_view name) {
  if (name == "c2") return link.c2;
  if (name == "c1") return link.c1;
  if (name == "c3") return link.c3;
  if (name == "f1") return link.f1;
  if (name == "v1") return link.v1;
  if (name == "g2") return link.g2;
  if (name == "g3") return link.g3;
  if (name == "r2") return link.r2;
  if (name == "r3") return link.r3;
  if (name == "aE") return link.aE;
  if (name == "bT") return link.bT;
  throw ModelError("unknown coefficient '" + std::string(name) + "'");
}

double coefficient(const LinkCoefficients& link, std::string_view name) {
  return coefficient(const_cast<LinkCoefficients&>(link), name);
}

SupernetworkModel SupernetworkModel::blank(const MarketShape& shape) {
  SupernetworkModel m;
  m.shape = shape;
  m.S.assign(shape.H, 1.0);
  m.alpha_H.assign(shape.H, 0.0);
  m.beta_H.assign(shape.H, 0.0);
  m.alpha_I.assign(shape.I, 0.0);
  m.beta_I.assign(shape.I, 0.0);
  m.alpha_J.assign(shape.J, 0.0);
  m.beta_J.assign(shape.J, 0.0);
  m.d0.assign(shape.K, 1.0);
  m.d1.assign(shape.K, 1.0);
  m.conversion_I.assign(shape.I, 0.0);
  m.conversion_J.assign(shape.J, 0.0);
  for (std::size_t l = 0; l < kLayerCount; ++l) m.layers[l] = LayerFunctions(layer_rows(shape, l), layer_cols(shape, l));
  return m;
}

double SupernetworkModel::alpha(Agent agent, std::size_t index) const {
  switch (agent) {
    case Agent::investor: return alpha_H[index];
    case Agent::internet: return alpha_I[index];
    case Agent::traditional: return alpha_J[index];
    case Agent::demander: return 0.0;
  }
  return 0.0;
}

double SupernetworkModel::beta(Agent agent, std::size_t index) const {
  switch (agent) {
    case Agent::investor: return beta_H[index];
    case Agent::internet: return beta_I[index];
    case Agent::traditional: return beta_J[index];
    case Agent::demander: return 0.0;
  }
  return 0.0;
}

double SupernetworkModel::demand(std::size_t k, double rho) const { return std::max(0.0, d0[k] - d1[k] * rho); }

std::vector<std::string> model_violations(const SupernetworkModel& model) {
  std::vector<std::string> out;
  const MarketShape& sh = model.shape;
  if (sh.H < 1 || sh.I < 1 || sh.J < 1 || sh.K < 1) {
    out.push_back("shape: every agent count must be at least 1");
    return out;
  }

  const auto check_vector = [&](const std::vector<double>& v, std::size_t n, const std::string& name, bool positive) {
    if (v.size() != n) {
      out.push_back(name + ": expected " + std::to_string(n) + " values, got " + std::to_string(v.size()));
      return;
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (!std::isfinite(v[i])) {
        out.push_back(name + "[" + std::to_string(i) + "] is not finite");
      } else if (positive ? !(v[i] > 0.0) : v[i] < 0.0) {
        out.push_back(name + "[" + std::to_string(i) + "] must be " + (positive ? "positive" : "non-negative"));
      }
    }
  };
  check_vector(model.S, sh.H, "investors.S", true);
  check_vector(model.alpha_H, sh.H, "investors.alpha", false);
  check_vector(model.beta_H, sh.H, "investors.beta", false);
  check_vector(model.alpha_I, sh.I, "internet.alpha", false);
  check_vector(model.beta_I, sh.I, "internet.beta", false);
  check_vector(model.alpha_J, sh.J, "traditional.alpha", false);
  check_vector(model.beta_J, sh.J, "traditional.beta", false);
  check_vector(model.d0, sh.K, "demand.d0", true);
  check_vector(model.d1, sh.K, "demand.d1", true);
  check_vector(model.conversion_I, sh.I, "conversion.internet", false);
  check_vector(model.conversion_J, sh.J, "conversion.traditional", false);
  if (!out.empty()) return out;

  for (std::size_t l = 0; l < kLayerCount; ++l) {
    const LayerFunctions& fn = model.layers[l];
    const std::size_t rows = layer_rows(sh, l);
    const std::size_t cols = layer_cols(sh, l);
    const std::string lname = "layers." + std::string(kLayers[l].name);
    if (fn.rows != rows || fn.cols != cols || fn.sender.size() != rows * cols || fn.receiver.size() != rows * cols) {
      out.push_back(lname + ": coefficient tables do not match the " + std::to_string(rows) + "x" +
                    std::to_string(cols) + " layer");
      continue;
    }
    const bool investor_sender = kLayers[l].sender == Agent::investor;
    const bool demander_receiver = kLayers[l].receiver == Agent::demander;
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < cols; ++c) {
        const LinkCoefficients& s = fn.sender_at(r, c);
        const LinkCoefficients& v = fn.receiver_at(r, c);
        bool ok = true;
        for (const auto& [side, link] : {std::pair<std::string_view, const LinkCoefficients*>{"sender", &s},
                                         std::pair<std::string_view, const LinkCoefficients*>{"receiver", &v}}) {
          for (std::string_view name : kCoefficientNames) {
            const double x = coefficient(*link, name);
            const std::string where = lname + "." + std::string(side) + "." + std::string(name) + " at (" +
                                      std::to_string(r) + "," + std::to_string(c) + ")";
            if (!std::isfinite(x)) {
              out.push_back(where + " is not finite");
              ok = false;
            } else if ((name == "c2" || name == "f1" || name == "g2" || name == "r2" || name == "bT") && x < 0.0) {
              out.push_back(where + " is negative; the function would not be convex");
              ok = false;
            }
          }
        }
        if (investor_sender && (s.aE != 0.0 || s.bT != 0.0)) {
          out.push_back(link_name(l, "sender", r, c) + ": aE/bT apply to platform senders only");
          ok = false;
        }
        if (v.aE != 0.0 || v.bT != 0.0) {
          out.push_back(link_name(l, "receiver", r, c) + ": aE/bT apply to platform senders only");
          ok = false;
        }
        if (demander_receiver &&
            (v.c3 != 0.0 || v.f1 != 0.0 || v.v1 != 0.0 || v.g3 != 0.0 || v.r2 != 0.0 || v.r3 != 0.0)) {
          out.push_back(link_name(l, "receiver", r, c) + ": demanders carry only c2, c1 and g2");
          ok = false;
        }
        if (!ok) continue;

        const double as = model.alpha(kLayers[l].sender, r);
        const double ar = model.alpha(kLayers[l].receiver, c);
        const double qq = 2.0 * (as * s.r2 + s.c2 + s.g2 + s.bT + ar * v.r2 + v.c2 + v.g2);
        const double qe = -(as * s.r3 + s.c3 + s.g3 + ar * v.r3 + v.c3 + v.g3);
        const double ee = 2.0 * (s.f1 + v.f1);
        const double scale = std::max({1.0, qq * ee, qe * qe});
        if (qq * ee - qe * qe < -1e-12 * scale) {
          out.push_back(lname + " link (" + std::to_string(r) + "," + std::to_string(c) +
                        "): q/eta coupling (c3, g3, r3) too strong for the curvature (c2, g2, r2, bT, f1); "
                        "the combined link cost is not convex");
        }
      }
    }
  }
  return out;
}

void check_model(const SupernetworkModel& model) {
  const auto violations = model_violations(model);
  if (!violations.empty()) throw ModelError(violations.front());
}

}  // namespace riskmesh
