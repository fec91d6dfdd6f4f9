#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include <json.hpp>

namespace riskmesh {

class TomlError : public std::runtime_error {
 public:
  TomlError(const std::string& message, int line);
  int line() const { return line_; }

 private:
  int line_;
};

/// Parses the subset of TOML used by model files into a JSON object tree:
/// [table] and [dotted.table] headers, bare keys, basic and literal strings,
/// integers, floats, booleans, comments, and (possibly nested or multi-line)
/// arrays. Inline tables, dates and dotted keys are rejected.
nlohmann::json parse_toml(std::string_view text);

}  // namespace riskmesh
