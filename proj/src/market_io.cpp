#include "riskmesh/market_io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "riskmesh/toml.hpp"

namespace riskmesh {

namespace {

using nlohmann::json;

void reject_unknown(const json& table, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [key, value] : table.items()) {
    if (!allowed.contains(key)) throw ModelError(where + ": unknown key '" + key + "'");
  }
}

double as_number(const json& v, const std::string& where) {
  if (!v.is_number()) throw ModelError(where + " must be a number");
  return v.get<double>();
}

const json& section(const json& root, const std::string& name, bool required) {
  static const json empty = json::object();
  auto it = root.find(name);
  if (it == root.end()) {
    if (required) throw ModelError("missing [" + name + "] section");
    return empty;
  }
  if (!it->is_object()) throw ModelError("'" + name + "' must be a table");
  return *it;
}

// Scalar (broadcast) or one value per agent.
std::vector<double> read_vector(const json& table, const std::string& key, std::size_t n, std::optional<double> fallback,
                                const std::string& where) {
  const std::string name = where + "." + key;
  auto it = table.find(key);
  if (it == table.end()) {
    if (!fallback) throw ModelError("missing " + name);
    return std::vector<double>(n, *fallback);
  }
  if (it->is_array()) {
    if (it->size() != n) {
      throw ModelError(name + ": expected " + std::to_string(n) + " values, got " + std::to_string(it->size()));
    }
    std::vector<double> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(as_number((*it)[i], name + "[" + std::to_string(i) + "]"));
    return out;
  }
  return std::vector<double>(n, as_number(*it, name));
}

std::size_t read_count(const json& table, const std::string& key) {
  auto it = table.find(key);
  if (it == table.end()) throw ModelError("missing shape." + key);
  if (!it->is_number_integer() || it->get<std::int64_t>() < 1) {
    throw ModelError("shape." + key + " must be a positive integer");
  }
  return static_cast<std::size_t>(it->get<std::int64_t>());
}

void read_side(const json& table, std::vector<LinkCoefficients>& links, std::size_t rows, std::size_t cols,
               const std::string& where) {
  for (const auto& [key, value] : table.items()) {
    const auto known = std::find(kCoefficientNames.begin(), kCoefficientNames.end(), key);
    if (known == kCoefficientNames.end()) throw ModelError(where + ": unknown coefficient '" + key + "'");
    const std::string name = where + "." + key;
    if (!value.is_array()) {
      const double v = as_number(value, name);
      for (auto& link : links) coefficient(link, key) = v;
      continue;
    }
    if (value.size() != rows) throw ModelError(name + ": expected " + std::to_string(rows) + " rows");
    for (std::size_t r = 0; r < rows; ++r) {
      const json& row = value[r];
      if (!row.is_array() || row.size() != cols) {
        throw ModelError(name + ": row " + std::to_string(r + 1) + " needs " + std::to_string(cols) + " values");
      }
      for (std::size_t c = 0; c < cols; ++c) {
        coefficient(links[r * cols + c], key) = as_number(row[c], name);
      }
    }
  }
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path, std::string_view header,
                                               bool required) {
  std::ifstream in(path);
  if (!in) {
    if (required) throw std::runtime_error("cannot read " + path.string());
    return {};
  }
  std::string line;
  if (!std::getline(in, line) || line != header) {
    throw std::runtime_error(path.string() + ": expected header '" + std::string(header) + "'");
  }
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    rows.push_back(std::move(fields));
  }
  return rows;
}

double parse_double(const std::string& text, const std::filesystem::path& path) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error(path.string() + ": invalid number '" + text + "'");
  }
}

std::size_t parse_index(const std::string& text, std::size_t limit, const std::filesystem::path& path) {
  const double v = parse_double(text, path);
  if (v < 1.0 || v > static_cast<double>(limit) || v != static_cast<double>(static_cast<std::size_t>(v))) {
    throw std::runtime_error(path.string() + ": index " + text + " out of range 1.." + std::to_string(limit));
  }
  return static_cast<std::size_t>(v) - 1;
}

}  // namespace

SupernetworkModel parse_model(std::string_view text) {
  const json root = parse_toml(text);
  reject_unknown(root, {"shape", "investors", "internet", "traditional", "demand", "conversion", "layers", "solver"},
                 "model");

  const json& shape = section(root, "shape", true);
  reject_unknown(shape, {"H", "I", "J", "K"}, "shape");
  SupernetworkModel m =
      SupernetworkModel::blank({read_count(shape, "H"), read_count(shape, "I"), read_count(shape, "J"),
                                read_count(shape, "K")});
  const MarketShape& sh = m.shape;

  const json& investors = section(root, "investors", true);
  reject_unknown(investors, {"S", "alpha", "beta"}, "investors");
  m.S = read_vector(investors, "S", sh.H, std::nullopt, "investors");
  m.alpha_H = read_vector(investors, "alpha", sh.H, 0.0, "investors");
  m.beta_H = read_vector(investors, "beta", sh.H, 0.0, "investors");

  const json& internet = section(root, "internet", false);
  reject_unknown(internet, {"alpha", "beta"}, "internet");
  m.alpha_I = read_vector(internet, "alpha", sh.I, 0.0, "internet");
  m.beta_I = read_vector(internet, "beta", sh.I, 0.0, "internet");

  const json& traditional = section(root, "traditional", false);
  reject_unknown(traditional, {"alpha", "beta"}, "traditional");
  m.alpha_J = read_vector(traditional, "alpha", sh.J, 0.0, "traditional");
  m.beta_J = read_vector(traditional, "beta", sh.J, 0.0, "traditional");

  const json& demand = section(root, "demand", true);
  reject_unknown(demand, {"d0", "d1"}, "demand");
  m.d0 = read_vector(demand, "d0", sh.K, std::nullopt, "demand");
  m.d1 = read_vector(demand, "d1", sh.K, std::nullopt, "demand");

  const json& conversion = section(root, "conversion", false);
  reject_unknown(conversion, {"internet", "traditional"}, "conversion");
  m.conversion_I = read_vector(conversion, "internet", sh.I, 0.0, "conversion");
  m.conversion_J = read_vector(conversion, "traditional", sh.J, 0.0, "conversion");

  const json& layers = section(root, "layers", false);
  reject_unknown(layers, {"Q1", "Q2", "Q3", "Q4", "Q5"}, "layers");
  for (std::size_t l = 0; l < kLayerCount; ++l) {
    const std::string name(layer_info(l).name);
    const json& layer = section(layers, name, false);
    reject_unknown(layer, {"sender", "receiver"}, "layers." + name);
    LayerFunctions& fn = m.layers[l];
    read_side(section(layer, "sender", false), fn.sender, fn.rows, fn.cols, "layers." + name + ".sender");
    read_side(section(layer, "receiver", false), fn.receiver, fn.rows, fn.cols, "layers." + name + ".receiver");
  }

  const json& solver = section(root, "solver", false);
  reject_unknown(solver, {"a", "epsilon", "max_iterations", "method", "seed", "diminishing"}, "solver");
  if (solver.contains("a")) m.solver.step = as_number(solver["a"], "solver.a");
  if (solver.contains("epsilon")) m.solver.epsilon = as_number(solver["epsilon"], "solver.epsilon");
  if (solver.contains("max_iterations")) {
    if (!solver["max_iterations"].is_number_integer()) throw ModelError("solver.max_iterations must be an integer");
    m.solver.max_iterations = solver["max_iterations"].get<int>();
  }
  if (solver.contains("method")) {
    const json& method = solver["method"];
    if (method == "euler") {
      m.solver.method = SolverMethod::euler;
    } else if (method == "extragradient") {
      m.solver.method = SolverMethod::extragradient;
    } else {
      throw ModelError("solver.method must be \"euler\" or \"extragradient\"");
    }
  }
  if (solver.contains("seed")) {
    if (!solver["seed"].is_number_integer() || solver["seed"].get<std::int64_t>() < 0) {
      throw ModelError("solver.seed must be a non-negative integer");
    }
    m.solver.seed = solver["seed"].get<std::uint64_t>();
  }
  if (solver.contains("diminishing")) {
    if (!solver["diminishing"].is_boolean()) throw ModelError("solver.diminishing must be true or false");
    m.solver.diminishing = solver["diminishing"].get<bool>();
  }
  if (!(m.solver.step > 0.0)) throw ModelError("solver.a must be positive");
  if (!(m.solver.epsilon > 0.0)) throw ModelError("solver.epsilon must be positive");
  if (m.solver.max_iterations < 1) throw ModelError("solver.max_iterations must be at least 1");

  check_model(m);
  return m;
}

SupernetworkModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read model file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_model(buffer.str());
}

void write_solution(const std::filesystem::path& dir, const EquilibriumState& state, const SolveReport& report) {
  std::filesystem::create_directories(dir);
  const auto open = [&](const std::string& name) {
    std::ofstream out(dir / name);
    if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
    return out;
  };
  for (std::size_t l = 0; l < kLayerCount; ++l) {
    std::ofstream out = open(std::string(layer_info(l).name) + ".csv");
    out << "row,col,flow,eta\n";
    const Matrix& q = state.flows.layers[l];
    for (std::size_t r = 0; r < q.rows(); ++r) {
      for (std::size_t c = 0; c < q.cols(); ++c) {
        out << r + 1 << ',' << c + 1 << ',' << fmt(q(r, c)) << ',' << fmt(state.relations.layers[l](r, c)) << '\n';
      }
    }
  }
  {
    std::ofstream out = open("prices.csv");
    out << "kind,index,value\n";
    const auto dump = [&](std::string_view kind, const std::vector<double>& v) {
      for (std::size_t i = 0; i < v.size(); ++i) out << kind << ',' << i + 1 << ',' << fmt(v[i]) << '\n';
    };
    dump("gamma_I", state.prices.gamma_I);
    dump("gamma_J", state.prices.gamma_J);
    dump("rho4", state.prices.rho4);
  }
  {
    std::ofstream out = open("slack.csv");
    out << "investor,slack\n";
    for (std::size_t h = 0; h < state.flows.slack.size(); ++h) out << h + 1 << ',' << fmt(state.flows.slack[h]) << '\n';
  }
  {
    std::ofstream out = open("report.csv");
    out << "key,value\n";
    out << "iterations," << report.iterations << '\n';
    out << "converged," << (report.converged ? "true" : "false") << '\n';
    out << "final_delta," << fmt(report.final_delta) << '\n';
    out << "vi_residual," << fmt(report.vi_residual) << '\n';
    out << "feasibility_residual," << fmt(report.feasibility_residual) << '\n';
    const auto totals = aggregate_flows(state);
    for (std::size_t l = 0; l < kLayerCount; ++l) out << layer_info(l).name << "_total," << fmt(totals[l]) << '\n';
  }
}

EquilibriumState read_solution(const std::filesystem::path& dir, const SupernetworkModel& model) {
  const MarketShape& sh = model.shape;
  EquilibriumState x = EquilibriumState::zero(sh);
  for (std::size_t l = 0; l < kLayerCount; ++l) {
    const auto path = dir / (std::string(layer_info(l).name) + ".csv");
    Matrix& q = x.flows.layers[l];
    for (const auto& row : read_csv(path, "row,col,flow,eta", true)) {
      if (row.size() != 4) throw std::runtime_error(path.string() + ": expected 4 fields per line");
      const std::size_t r = parse_index(row[0], q.rows(), path);
      const std::size_t c = parse_index(row[1], q.cols(), path);
      q(r, c) = parse_double(row[2], path);
      x.relations.layers[l](r, c) = row[3].empty() ? 0.0 : parse_double(row[3], path);
    }
  }
  const auto prices_path = dir / "prices.csv";
  for (const auto& row : read_csv(prices_path, "kind,index,value", true)) {
    if (row.size() != 3) throw std::runtime_error(prices_path.string() + ": expected 3 fields per line");
    std::vector<double>* target = nullptr;
    if (row[0] == "gamma_I") target = &x.prices.gamma_I;
    if (row[0] == "gamma_J") target = &x.prices.gamma_J;
    if (row[0] == "rho4") target = &x.prices.rho4;
    if (target == nullptr) throw std::runtime_error(prices_path.string() + ": unknown price kind '" + row[0] + "'");
    (*target)[parse_index(row[1], target->size(), prices_path)] = parse_double(row[2], prices_path);
  }
  const auto slack_path = dir / "slack.csv";
  const auto slack_rows = read_csv(slack_path, "investor,slack", false);
  if (std::filesystem::exists(slack_path)) {
    for (const auto& row : slack_rows) {
      if (row.size() != 2) throw std::runtime_error(slack_path.string() + ": expected 2 fields per line");
      x.flows.slack[parse_index(row[0], sh.H, slack_path)] = parse_double(row[1], slack_path);
    }
  } else {
    for (std::size_t h = 0; h < sh.H; ++h) {
      x.flows.slack[h] = model.S[h] - x.flows.layers[0].row_sum(h) - x.flows.layers[1].row_sum(h);
    }
  }
  return x;
}

std::string format_check(const EquilibriumCheck& check) {
  std::string out;
  out += "vi_residual," + fmt(check.vi_residual) + "\n";
  out += "worst_variable," + (check.worst_variable.empty() ? std::string("-") : check.worst_variable) + "\n";
  out += "feasibility_residual," + fmt(check.feasibility_residual) + "\n";
  out += "budget_residual," + fmt(check.budget_residual) + "\n";
  out += "bound_residual," + fmt(check.bound_residual) + "\n";
  out += "clearing_residual," + fmt(check.clearing_residual) + "\n";
  for (std::size_t i = 0; i < check.conservation_I.size(); ++i) {
    out += "conservation_internet_" + std::to_string(i + 1) + "," + fmt(check.conservation_I[i]) + "\n";
  }
  for (std::size_t j = 0; j < check.conservation_J.size(); ++j) {
    out += "conservation_traditional_" + std::to_string(j + 1) + "," + fmt(check.conservation_J[j]) + "\n";
  }
  return out;
}

std::string format_comparison(const ScenarioComparison& cmp) {
  std::string out = "layer,full_total,frozen_total,max_change\n";
  for (std::size_t l = 0; l < kLayerCount; ++l) {
    out += std::string(layer_info(l).name) + "," + fmt(cmp.full_totals[l]) + "," + fmt(cmp.frozen_totals[l]) + "," +
           fmt(cmp.max_change[l]) + "\n";
  }
  return out;
}

}  // namespace riskmesh
