#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace riskmesh {

enum class Layer { internet_finance, regulatory, traditional_finance, context };

std::string_view layer_name(Layer layer);
std::optional<Layer> layer_from_name(std::string_view name);

/// One of the risk-factor categories A..K, plus X for generated synthetic
/// catalogs. Each category belongs to exactly one layer.
class RiskCategory {
 public:
  static std::optional<RiskCategory> from_code(char code);

  char code() const { return code_; }
  std::string_view name() const;
  Layer layer() const;

  friend bool operator==(RiskCategory, RiskCategory) = default;

 private:
  explicit RiskCategory(char code) : code_(code) {}
  char code_;
};

struct RiskNode {
  std::string id;
  std::string label;
  RiskCategory category;
  Layer layer;

  friend bool operator==(const RiskNode&, const RiskNode&) = default;
};

struct ContagionEdge {
  std::string src;
  std::string dst;
  std::string note;

  friend bool operator==(const ContagionEdge&, const ContagionEdge&) = default;
};

struct Catalog {
  std::vector<RiskNode> nodes;
  std::vector<ContagionEdge> edges;

  const RiskNode* find(std::string_view id) const;
  /// Copy with nodes sorted by id and edges by (src, dst).
  Catalog sorted() const;
};

/// Set equality: order of nodes and edges is irrelevant.
bool same_catalog(const Catalog& a, const Catalog& b);

/// Node-id ordering used everywhere ids are sorted: alphabetic prefix first,
/// then the numeric suffix by value (so G2 < G10), then plain text.
bool id_less(std::string_view a, std::string_view b);

struct Violation {
  std::string entity;  // node id or "src->dst"
  std::string rule;
  std::string message;
};

/// Thrown for malformed catalog text and for semantic violations found while
/// parsing. `line` is 1-based, 0 when not tied to a line.
class CatalogError : public std::runtime_error {
 public:
  CatalogError(std::string message, int line)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + message : message),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

class MergeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Syntax-only read: every line must be well formed, but catalog invariants
/// (duplicates, endpoints, self-loops, prefixes) are not enforced. Throws
/// CatalogError on syntax errors.
Catalog read_catalog(std::string_view text);

/// Full parse: syntax plus all catalog invariants. The first violation is
/// raised as CatalogError carrying the offending line.
Catalog parse_catalog(std::string_view text);

Catalog load_catalog_file(const std::string& path);

std::string serialize_catalog(const Catalog& catalog);

std::vector<Violation> validate_catalog(const Catalog& catalog);

/// Union of catalogs. Nodes sharing an id must be identical; edges sharing
/// (src, dst) must not carry two different non-empty notes.
Catalog merge_subnets(std::span<const Catalog> parts);

/// Nodes of the given layer, every edge whose source lies in it, and the
/// foreign endpoints those edges need. Merging the subnets of all layers
/// reproduces the whole catalog.
Catalog extract_subnet(const Catalog& catalog, Layer layer);

}  // namespace riskmesh
