// riskmesh command-line front end.
//
// Exit codes: 0 success, 1 domain or validation error, 2 I/O or parse error,
// 3 numerical divergence.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "riskmesh/catalog.hpp"
#include "riskmesh/contagion.hpp"
#include "riskmesh/layout.hpp"
#include "riskmesh/market_diagnostics.hpp"
#include "riskmesh/market_io.hpp"
#include "riskmesh/market_solver.hpp"
#include "riskmesh/toml.hpp"

namespace fs = std::filesystem;
using namespace riskmesh;

namespace {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised for bad flag values after parsing; carries the usage text.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Validation failures already reported on stdout.
struct InvalidCatalog {};

struct Manifest {
  std::string command;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::uint64_t seed = 0;
};

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << content;
  if (!out) throw IoError("failed writing " + path);
}

void require_readable(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path);
}

Catalog load_valid_catalog(const std::string& path) {
  require_readable(path);
  std::ifstream in(path, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  Catalog catalog = read_catalog(buf.str());
  const auto violations = validate_catalog(catalog);
  if (!violations.empty()) {
    for (const auto& v : violations) std::cout << v.entity << ": " << v.message << "\n";
    throw InvalidCatalog{};
  }
  return catalog;
}

Metric parse_metric(const std::string& name) {
  const auto metric = metric_from_name(name);
  if (!metric) throw UsageError("unknown metric '" + name + "' (p_importance, p_contagion, p_sensitivity)");
  return *metric;
}

int cmd_validate(const std::string& path, Manifest& manifest) {
  manifest.inputs.push_back(path);
  require_readable(path);
  std::ifstream in(path, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  const Catalog catalog = read_catalog(buf.str());
  const auto violations = validate_catalog(catalog);
  for (const auto& v : violations) std::cout << v.entity << ": " << v.message << "\n";
  if (!violations.empty()) return 1;
  std::cout << "ok: " << catalog.nodes.size() << " nodes, " << catalog.edges.size() << " edges\n";
  return 0;
}

int cmd_metrics(const std::string& path, const std::string& out, std::size_t top, Manifest& manifest) {
  manifest.inputs.push_back(path);
  const Catalog catalog = load_valid_catalog(path);
  const ContagionGraph graph = build_graph(catalog);
  const NodeMetrics metrics = node_metrics(graph);
  if (graph.edge_count() == 0) std::cerr << "warning: catalog has no edges; metrics are uniform\n";
  write_file(out, metrics_csv(metrics));
  manifest.outputs.push_back(out);
  top = std::min(top, metrics.size());
  for (const auto& [id, value] : rank_nodes(metrics, Metric::importance, top)) {
    char line[64];
    std::snprintf(line, sizeof line, "%.6f", value);
    std::cout << id << " " << line << "\n";
  }
  return 0;
}

struct LayoutOptions {
  std::string catalog;
  std::string algorithm = "fruchterman_reingold";
  std::string metric = "p_importance";
  int iterations = 500;
  double area = 1.0;
  double gravity = 1.0;
  std::string svg;
  std::string dot;
  std::string graphml;
};

int cmd_layout(const LayoutOptions& opt, std::uint64_t seed, Manifest& manifest) {
  const auto algorithm = layout_algorithm_from_name(opt.algorithm);
  if (!algorithm) throw UsageError("unknown algorithm '" + opt.algorithm + "' (fruchterman_reingold, force_atlas)");
  const Metric metric = parse_metric(opt.metric);
  manifest.inputs.push_back(opt.catalog);
  const Catalog catalog = load_valid_catalog(opt.catalog);
  const ContagionGraph graph = build_graph(catalog);
  const NodeMetrics metrics = node_metrics(graph);

  LayoutConfig config;
  config.algorithm = *algorithm;
  config.iterations = opt.iterations;
  config.area = opt.area;
  config.gravity = opt.gravity;
  config.seed = seed;
  LayoutResult result = graph.size() > 0 ? layout(graph, config) : LayoutResult{};
  result.radii = metric_radii(metrics.values(metric));

  write_file(opt.svg, render_svg(result, graph, metrics, {metric, true}, &catalog));
  manifest.outputs.push_back(opt.svg);
  if (!opt.dot.empty()) {
    write_file(opt.dot, export_dot(graph));
    manifest.outputs.push_back(opt.dot);
  }
  if (!opt.graphml.empty()) {
    write_file(opt.graphml, export_graphml(result, graph, metrics, metric, &catalog));
    manifest.outputs.push_back(opt.graphml);
  }
  return 0;
}

int cmd_robustness(const std::string& path, const std::string& strategy_name, std::size_t trials,
                   const std::string& out, std::uint64_t seed, Manifest& manifest) {
  RemovalStrategy strategy;
  if (strategy_name == "random") {
    strategy = RemovalStrategy::random;
  } else if (strategy_name == "targeted") {
    strategy = RemovalStrategy::targeted;
  } else {
    throw UsageError("unknown strategy '" + strategy_name + "' (random, targeted)");
  }
  if (trials < 1) throw std::invalid_argument("trials must be at least 1");
  manifest.inputs.push_back(path);
  const Catalog catalog = load_valid_catalog(path);
  const ContagionGraph graph = build_graph(catalog);
  std::vector<double> fractions;
  for (int i = 0; i <= 10; ++i) fractions.push_back(0.05 * i);
  const std::string csv = robustness_csv(robustness(graph, strategy, fractions, trials, seed));
  if (out.empty()) {
    std::cout << csv;
  } else {
    write_file(out, csv);
    manifest.outputs.push_back(out);
  }
  return 0;
}

int cmd_generate(std::size_t m0, std::size_t m, std::size_t n, const std::string& out, std::uint64_t seed,
                 Manifest& manifest) {
  const std::string text = serialize_catalog(generate_preferential(m0, m, n, seed));
  if (out.empty()) {
    std::cout << text;
  } else {
    write_file(out, text);
    manifest.outputs.push_back(out);
  }
  return 0;
}

struct EquilibriumOptions {
  std::string model;
  std::string out;
  std::string solution;
  std::optional<std::string> method;
  std::optional<double> step;
  std::optional<double> epsilon;
  std::optional<int> max_iterations;
};

SupernetworkModel load_market(const EquilibriumOptions& opt, std::optional<std::uint64_t> seed, Manifest& manifest) {
  manifest.inputs.push_back(opt.model);
  require_readable(opt.model);
  SupernetworkModel model = load_model(opt.model);
  if (opt.method) {
    if (*opt.method == "euler") {
      model.solver.method = SolverMethod::euler;
    } else if (*opt.method == "extragradient") {
      model.solver.method = SolverMethod::extragradient;
    } else {
      throw UsageError("unknown method '" + *opt.method + "' (euler, extragradient)");
    }
  }
  if (opt.step) model.solver.step = *opt.step;
  if (opt.epsilon) model.solver.epsilon = *opt.epsilon;
  if (opt.max_iterations) model.solver.max_iterations = *opt.max_iterations;
  if (seed) model.solver.seed = *seed;
  manifest.seed = model.solver.seed;
  return model;
}

void print_report(const SolveReport& report) {
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "converged=%s\niterations=%d\nfinal_delta=%.6g\nvi_residual=%.6g\nfeasibility_residual=%.6g\n",
                report.converged ? "true" : "false", report.iterations, report.final_delta, report.vi_residual,
                report.feasibility_residual);
  std::cout << buf;
}

int cmd_equilibrium_solve(const EquilibriumOptions& opt, std::optional<std::uint64_t> seed, Manifest& manifest) {
  const SupernetworkModel model = load_market(opt, seed, manifest);
  const SolveResult result = solve(model);
  fs::create_directories(opt.out);
  write_solution(opt.out, result.state, result.report);
  manifest.outputs.push_back(opt.out);
  print_report(result.report);
  const auto totals = aggregate_flows(result.state);
  for (std::size_t l = 0; l < kLayerCount; ++l) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s_total=%.6g\n", std::string(layer_info(l).name).c_str(), totals[l]);
    std::cout << buf;
  }
  if (!result.report.converged) std::cerr << "warning: iteration limit reached before convergence\n";
  return 0;
}

int cmd_equilibrium_check(const EquilibriumOptions& opt, std::optional<std::uint64_t> seed, Manifest& manifest) {
  const SupernetworkModel model = load_market(opt, seed, manifest);
  manifest.inputs.push_back(opt.solution);
  if (!fs::is_directory(opt.solution)) throw IoError("not a solution directory: " + opt.solution);
  const EquilibriumState state = read_solution(opt.solution, model);
  std::cout << format_check(check_equilibrium(model, state));
  const auto totals = aggregate_flows(state);
  for (std::size_t l = 0; l < kLayerCount; ++l) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s_total,%.10g\n", std::string(layer_info(l).name).c_str(), totals[l]);
    std::cout << buf;
  }
  return 0;
}

int cmd_equilibrium_compare(const EquilibriumOptions& opt, std::optional<std::uint64_t> seed, Manifest& manifest) {
  const SupernetworkModel model = load_market(opt, seed, manifest);
  const std::string table = format_comparison(compare_scenarios(model));
  if (opt.out.empty()) {
    std::cout << table;
  } else {
    write_file(opt.out, table);
    manifest.outputs.push_back(opt.out);
  }
  return 0;
}

std::string manifest_json(const Manifest& manifest, double seconds) {
  nlohmann::ordered_json j;
  j["command"] = manifest.command;
  j["inputs"] = manifest.inputs;
  j["outputs"] = manifest.outputs;
  j["seed"] = manifest.seed;
  j["version"] = RISKMESH_VERSION;
  j["duration_seconds"] = seconds;
  return j.dump(2) + "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Risk-contagion network analysis and supernetwork equilibrium toolkit", "riskmesh"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", RISKMESH_VERSION);

  std::optional<std::uint64_t> seed_flag;
  std::string manifest_path;
  app.add_option("--seed", seed_flag, "Seed for every random choice (default 0)");
  app.add_option("--manifest", manifest_path, "Write the run manifest here instead of stderr");

  std::string catalog_path;
  auto* validate = app.add_subcommand("validate", "Check a catalog file against the catalog rules");
  validate->add_option("catalog", catalog_path, "Catalog file")->required();

  std::string metrics_out;
  std::size_t top = 10;
  auto* metrics = app.add_subcommand("metrics", "Degree counts and the three node shares as CSV");
  metrics->add_option("catalog", catalog_path, "Catalog file")->required();
  metrics->add_option("-o,--out", metrics_out, "CSV output path")->required();
  metrics->add_option("--top", top, "Rows of the printed ranking")->capture_default_str();

  LayoutOptions layout_opt;
  auto* layout_cmd = app.add_subcommand("layout", "Force-directed layout rendered as SVG");
  layout_cmd->add_option("catalog", layout_opt.catalog, "Catalog file")->required();
  layout_cmd->add_option("--algorithm", layout_opt.algorithm, "fruchterman_reingold or force_atlas")
      ->capture_default_str();
  layout_cmd->add_option("--metric", layout_opt.metric, "p_importance, p_contagion or p_sensitivity")
      ->capture_default_str();
  layout_cmd->add_option("--iterations", layout_opt.iterations)->capture_default_str()->check(CLI::PositiveNumber);
  layout_cmd->add_option("--area", layout_opt.area)->capture_default_str()->check(CLI::PositiveNumber);
  layout_cmd->add_option("--gravity", layout_opt.gravity)->capture_default_str()->check(CLI::NonNegativeNumber);
  layout_cmd->add_option("--svg", layout_opt.svg, "SVG output path")->required();
  layout_cmd->add_option("--dot", layout_opt.dot, "DOT output path");
  layout_cmd->add_option("--graphml", layout_opt.graphml, "GraphML output path");

  std::string strategy = "random";
  std::size_t trials = 50;
  std::string robustness_out;
  auto* robust = app.add_subcommand("robustness", "Largest weak component under node removal");
  robust->add_option("catalog", catalog_path, "Catalog file")->required();
  robust->add_option("--strategy", strategy, "random or targeted")->capture_default_str();
  robust->add_option("--trials", trials)->capture_default_str();
  robust->add_option("-o,--out", robustness_out, "CSV output path (stdout when omitted)");

  std::size_t m0 = 2, m = 2, n = 100;
  std::string generate_out;
  auto* generate = app.add_subcommand("generate", "Preferential-attachment synthetic catalog");
  generate->add_option("--m0", m0, "Seed nodes")->capture_default_str();
  generate->add_option("--m", m, "Edges per new node")->capture_default_str();
  generate->add_option("--n", n, "Final node count")->capture_default_str();
  generate->add_option("-o,--out", generate_out, "Catalog output path (stdout when omitted)");

  EquilibriumOptions eq;
  auto* equilibrium = app.add_subcommand("equilibrium", "Supernetwork market equilibrium");
  equilibrium->require_subcommand(1);
  equilibrium->fallthrough();
  const auto solver_flags = [&](CLI::App* sub) {
    sub->add_option("--model", eq.model, "Model file (TOML)")->required();
    sub->add_option("--method", eq.method, "euler or extragradient");
    sub->add_option("--step", eq.step, "Step size a");
    sub->add_option("--epsilon", eq.epsilon, "Stopping threshold on the max-norm change");
    sub->add_option("--max-iterations", eq.max_iterations);
  };
  auto* solve_cmd = equilibrium->add_subcommand("solve", "Solve and write the solution CSVs");
  solver_flags(solve_cmd);
  solve_cmd->add_option("-o,--out", eq.out, "Solution directory")->required();
  auto* check_cmd = equilibrium->add_subcommand("check", "Residuals of a stored solution");
  check_cmd->add_option("--model", eq.model, "Model file (TOML)")->required();
  check_cmd->add_option("--solution", eq.solution, "Solution directory")->required();
  auto* compare_cmd = equilibrium->add_subcommand("compare", "Full model against frozen relations");
  solver_flags(compare_cmd);
  compare_cmd->add_option("-o,--out", eq.out, "CSV output path (stdout when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  const std::uint64_t seed = seed_flag.value_or(0);
  Manifest manifest;
  manifest.seed = seed;
  const auto start = std::chrono::steady_clock::now();
  int code = 0;
  try {
    if (*validate) {
      manifest.command = "validate";
      code = cmd_validate(catalog_path, manifest);
    } else if (*metrics) {
      manifest.command = "metrics";
      code = cmd_metrics(catalog_path, metrics_out, top, manifest);
    } else if (*layout_cmd) {
      manifest.command = "layout";
      code = cmd_layout(layout_opt, seed, manifest);
    } else if (*robust) {
      manifest.command = "robustness";
      code = cmd_robustness(catalog_path, strategy, trials, robustness_out, seed, manifest);
    } else if (*generate) {
      manifest.command = "generate";
      code = cmd_generate(m0, m, n, generate_out, seed, manifest);
    } else if (*solve_cmd) {
      manifest.command = "equilibrium solve";
      code = cmd_equilibrium_solve(eq, seed_flag, manifest);
    } else if (*check_cmd) {
      manifest.command = "equilibrium check";
      code = cmd_equilibrium_check(eq, seed_flag, manifest);
    } else if (*compare_cmd) {
      manifest.command = "equilibrium compare";
      code = cmd_equilibrium_compare(eq, seed_flag, manifest);
    }
  } catch (const InvalidCatalog&) {
    return 1;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 1;
  } catch (const DivergenceError& e) {
    std::cerr << "error: diverged at iteration " << e.iteration() << ": " << e.what() << "\n";
    return 3;
  } catch (const ModelError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const NotEquilibriumError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const CatalogError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const TomlError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const std::string json = manifest_json(manifest, seconds);
  try {
    if (manifest_path.empty()) {
      std::cerr << json;
    } else {
      write_file(manifest_path, json);
    }
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return code;
}
