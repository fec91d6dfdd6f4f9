#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "riskmesh/market_diagnostics.hpp"
#include "riskmesh/market_model.hpp"
#include "riskmesh/market_solver.hpp"

namespace riskmesh {

/// Builds a model from TOML text. Sections: [shape] (H, I, J, K),
/// [investors] (S, alpha, beta), [internet] and [traditional] (alpha, beta),
/// [demand] (d0, d1), [conversion] (internet, traditional),
/// [layers.QN.sender] / [layers.QN.receiver] coefficient tables and
/// [solver] (a, epsilon, max_iterations, method, seed, diminishing).
/// Vectors accept a scalar (broadcast) or one value per agent; coefficient
/// tables accept a scalar or a rows x cols array of arrays.
///
/// Throws TomlError on syntax errors and ModelError on schema or guard
/// violations.
SupernetworkModel parse_model(std::string_view text);
SupernetworkModel load_model(const std::filesystem::path& path);

/// Writes Q1.csv..Q5.csv (`row,col,flow,eta`, 1-based indices),
/// prices.csv (`kind,index,value` for gamma_I, gamma_J, rho4), slack.csv
/// (`investor,slack`) and report.csv (`key,value`).
void write_solution(const std::filesystem::path& dir, const EquilibriumState& state, const SolveReport& report);

/// Reads the files written by write_solution. Missing links default to
/// zero; a missing slack.csv is filled with S_h minus the investor's flows.
/// Throws std::runtime_error on I/O or format problems.
EquilibriumState read_solution(const std::filesystem::path& dir, const SupernetworkModel& model);

std::string format_check(const EquilibriumCheck& check);
std::string format_comparison(const ScenarioComparison& comparison);

}  // namespace riskmesh
