#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace riskmesh {

/// H investors, I internet platforms, J traditional platforms, K demanders.
struct MarketShape {
  std::size_t H = 1;
  std::size_t I = 1;
  std::size_t J = 1;
  std::size_t K = 1;

  friend bool operator==(const MarketShape&, const MarketShape&) = default;
};

/// The five flow layers:
///   Q1 investor -> internet (H x I)       Q2 investor -> traditional (H x J)
///   Q3 internet -> traditional (I x J)    Q4 internet -> demander (I x K)
///   Q5 traditional -> demander (J x K)
inline constexpr std::size_t kLayerCount = 5;

enum class Agent { investor, internet, traditional, demander };

struct LayerInfo {
  std::string_view name;
  Agent sender;
  Agent receiver;
};

const LayerInfo& layer_info(std::size_t layer);
std::size_t agent_count(const MarketShape& shape, Agent agent);
std::size_t layer_rows(const MarketShape& shape, std::size_t layer);
std::size_t layer_cols(const MarketShape& shape, std::size_t layer);

class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }
  double sum() const;
  double row_sum(std::size_t r) const;
  double col_sum(std::size_t c) const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct FlowState {
  std::array<Matrix, kLayerCount> layers;
  std::vector<double> slack;  // u_h, uninvested funds

  friend bool operator==(const FlowState&, const FlowState&) = default;
};

struct RelationState {
  std::array<Matrix, kLayerCount> layers;  // eta in [0, 1]

  friend bool operator==(const RelationState&, const RelationState&) = default;
};

struct PriceState {
  std::vector<double> gamma_I;
  std::vector<double> gamma_J;
  std::vector<double> rho4;

  friend bool operator==(const PriceState&, const PriceState&) = default;
};

struct EquilibriumState {
  FlowState flows;
  RelationState relations;
  PriceState prices;

  static EquilibriumState zero(const MarketShape& shape);
  MarketShape shape() const;

  friend bool operator==(const EquilibriumState&, const EquilibriumState&) = default;
};

/// Total inflow and outflow of a platform. Platform index refers to the
/// internet platforms when `internet` is true, otherwise to traditional ones.
double platform_inflow(const EquilibriumState& state, bool internet, std::size_t index);
double platform_outflow(const EquilibriumState& state, bool internet, std::size_t index);
double demander_inflow(const EquilibriumState& state, std::size_t k);

/// One party's cost coefficients on one link.
///   transaction  c(q, eta) = c2 q^2 + c1 q - c3 q eta
///   relationship f(eta)    = f1 eta^2
///   level value  v(eta)    = v1 eta
///   credit       g(q, eta) = g2 q^2 - g3 q eta
///   risk         r(q, eta) = r2 q^2 - r3 q eta
///   operational  e(q)      = aE q - bT q^2   (platform senders only)
struct LinkCoefficients {
  double c2 = 0.0;
  double c1 = 0.0;
  double c3 = 0.0;
  double f1 = 0.0;
  double v1 = 0.0;
  double g2 = 0.0;
  double g3 = 0.0;
  double r2 = 0.0;
  double r3 = 0.0;
  double aE = 0.0;
  double bT = 0.0;

  friend bool operator==(const LinkCoefficients&, const LinkCoefficients&) = default;
};

inline constexpr std::array<std::string_view, 11> kCoefficientNames = {"c2", "c1", "c3", "f1", "v1", "g2",
                                                                       "g3", "r2", "r3", "aE", "bT"};
double& coefficient(LinkCoefficients& link, std::string_view name);
double coefficient(const LinkCoefficients& link, std::string_view name);

/// Coefficients of both parties for every link of a layer, row-major.
struct LayerFunctions {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<LinkCoefficients> sender;
  std::vector<LinkCoefficients> receiver;

  LayerFunctions() = default;
  LayerFunctions(std::size_t r, std::size_t c) : rows(r), cols(c), sender(r * c), receiver(r * c) {}
  const LinkCoefficients& sender_at(std::size_t r, std::size_t c) const { return sender[r * cols + c]; }
  const LinkCoefficients& receiver_at(std::size_t r, std::size_t c) const { return receiver[r * cols + c]; }
  LinkCoefficients& sender_at(std::size_t r, std::size_t c) { return sender[r * cols + c]; }
  LinkCoefficients& receiver_at(std::size_t r, std::size_t c) { return receiver[r * cols + c]; }

  friend bool operator==(const LayerFunctions&, const LayerFunctions&) = default;
};

enum class SolverMethod { euler, extragradient };

struct SolveConfig {
  double step = 0.01;
  double epsilon = 1e-4;
  int max_iterations = 100000;
  SolverMethod method = SolverMethod::euler;
  bool diminishing = false;  // a / sqrt(iteration)
  std::uint64_t seed = 0;
  /// When set, every relation level is held at this value and its
  /// variational condition is dropped.
  std::optional<double> frozen_relations;

  friend bool operator==(const SolveConfig&, const SolveConfig&) = default;
};

struct SupernetworkModel {
  MarketShape shape;
  std::vector<double> S;  // endowment per investor
  std::vector<double> alpha_H, beta_H;
  std::vector<double> alpha_I, beta_I;
  std::vector<double> alpha_J, beta_J;
  std::vector<double> d0, d1;  // demand d_k(rho) = max(0, d0 - d1 rho)
  std::vector<double> conversion_I, conversion_J;  // c(inflow) = cc * inflow^2
  std::array<LayerFunctions, kLayerCount> layers;
  SolveConfig solver;

  /// A model of the given shape with every coefficient zero, unit
  /// endowments and unit demand curves.
  static SupernetworkModel blank(const MarketShape& shape);

  double alpha(Agent agent, std::size_t index) const;
  double beta(Agent agent, std::size_t index) const;
  double demand(std::size_t k, double rho) const;

  friend bool operator==(const SupernetworkModel&, const SupernetworkModel&) = default;
};

class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Structural problems (sizes, signs, non-finite values) and convexity guard
/// violations, each message naming the offending coefficient. Empty when the
/// model is usable.
std::vector<std::string> model_violations(const SupernetworkModel& model);

/// Throws ModelError carrying the first violation.
void check_model(const SupernetworkModel& model);

}  // namespace riskmesh
