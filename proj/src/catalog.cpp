#include "riskmesh/catalog.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <utility>

namespace riskmesh {

namespace {

struct CategoryInfo {
  char code;
  std::string_view name;
  Layer layer;
};

constexpr CategoryInfo kCategories[] = {
    {'A', "Technical risk", Layer::internet_finance},
    {'B', "Operational risk", Layer::internet_finance},
    {'C', "Legal risk", Layer::internet_finance},
    {'D', "Credit risk", Layer::internet_finance},
    {'E', "Business risk", Layer::internet_finance},
    {'F', "Operation management and strategic choice", Layer::internet_finance},
    {'G', "Regulation", Layer::regulatory},
    {'H', "Traditional financial risk", Layer::traditional_finance},
    {'I', "User factors", Layer::context},
    {'J', "Domestic and foreign environment", Layer::context},
    {'K', "Internet finance services", Layer::context},
    {'X', "Synthetic", Layer::context},
};

const CategoryInfo* category_info(char code) {
  for (const auto& info : kCategories) {
    if (info.code == code) return &info;
  }
  return nullptr;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

// Splits "A1" into ("A", "1"). Returns false for ids that are not
// letters followed by a positive integer.
bool split_id(std::string_view id, std::string_view& prefix, std::string_view& digits) {
  std::size_t i = 0;
  while (i < id.size() && std::isalpha(static_cast<unsigned char>(id[i]))) ++i;
  prefix = id.substr(0, i);
  digits = id.substr(i);
  if (prefix.empty() || digits.empty()) return false;
  if (!std::all_of(digits.begin(), digits.end(),
                   [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
    return false;
  }
  return digits.find_first_not_of('0') != std::string_view::npos;
}

std::string edge_key(const ContagionEdge& e) { return e.src + "->" + e.dst; }

bool edge_less(const ContagionEdge& a, const ContagionEdge& b) {
  if (a.src != b.src) return id_less(a.src, b.src);
  return id_less(a.dst, b.dst);
}

bool node_less(const RiskNode& a, const RiskNode& b) { return id_less(a.id, b.id); }

// Checks a single node in isolation (id shape, prefix, layer).
void check_node(const RiskNode& node, std::vector<Violation>& out) {
  if (trim(node.label).empty()) {
    out.push_back({node.id, "label", "node " + node.id + " has an empty label"});
  }
  std::string_view prefix;
  std::string_view digits;
  if (!split_id(node.id, prefix, digits) || prefix.size() != 1) {
    out.push_back({node.id, "id-format",
                   "node id '" + node.id + "' is not a category code followed by a positive integer"});
  } else if (prefix[0] != node.category.code()) {
    out.push_back({node.id, "category-prefix",
                   "node " + node.id + " has category " + std::string(1, node.category.code()) +
                       " but its id prefix is " + std::string(prefix)});
  }
  if (node.layer != node.category.layer()) {
    out.push_back({node.id, "layer",
                   "node " + node.id + " is in layer " + std::string(layer_name(node.layer)) +
                       " but category " + std::string(1, node.category.code()) + " belongs to " +
                       std::string(layer_name(node.category.layer()))});
  }
}

enum class Section { none, nodes, edges };

struct ParsedDocument {
  Catalog catalog;
  std::vector<int> node_lines;
  std::vector<int> edge_lines;
};

ParsedDocument read_document(std::string_view text) {
  ParsedDocument doc;
  Section section = Section::none;
  bool expect_header = false;
  bool saw_nodes = false;
  bool saw_edges = false;
  int number = 0;

  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view raw = text.substr(pos, end - pos);
    pos = end + 1;
    ++number;
    if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
    std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') {
      if (end == text.size()) break;
      continue;
    }

    if (line == "[nodes]") {
      if (saw_nodes) throw CatalogError("duplicate [nodes] section", number);
      if (saw_edges) throw CatalogError("[nodes] must precede [edges]", number);
      saw_nodes = true;
      section = Section::nodes;
      expect_header = true;
    } else if (line == "[edges]") {
      if (saw_edges) throw CatalogError("duplicate [edges] section", number);
      saw_edges = true;
      section = Section::edges;
      expect_header = true;
    } else if (line.front() == '[') {
      throw CatalogError("unknown section header '" + std::string(line) + "'", number);
    } else if (section == Section::none) {
      throw CatalogError("content before the first section header", number);
    } else if (expect_header) {
      const std::string_view want =
          section == Section::nodes ? "id,label,category,layer" : "src,dst,note";
      std::string compact;
      for (char c : line) {
        if (!std::isspace(static_cast<unsigned char>(c))) compact.push_back(c);
      }
      if (compact != want) {
        throw CatalogError("expected column header '" + std::string(want) + "'", number);
      }
      expect_header = false;
    } else if (section == Section::nodes) {
      // id,label,category,layer — the label may itself contain commas.
      const auto first = line.find(',');
      const auto last = line.rfind(',');
      const auto second_last =
          last == std::string_view::npos || last == 0 ? std::string_view::npos : line.rfind(',', last - 1);
      if (first == std::string_view::npos || second_last == std::string_view::npos ||
          second_last <= first) {
        throw CatalogError("node line needs 4 fields: id,label,category,layer", number);
      }
      const auto id = trim(line.substr(0, first));
      const auto label = trim(line.substr(first + 1, second_last - first - 1));
      const auto cat = trim(line.substr(second_last + 1, last - second_last - 1));
      const auto layer_text = trim(line.substr(last + 1));
      if (id.empty()) throw CatalogError("empty node id", number);
      if (cat.size() != 1) throw CatalogError("category must be a single letter", number);
      const auto category = RiskCategory::from_code(cat[0]);
      if (!category) throw CatalogError("unknown category '" + std::string(cat) + "'", number);
      const auto layer = layer_from_name(layer_text);
      if (!layer) throw CatalogError("unknown layer '" + std::string(layer_text) + "'", number);
      doc.catalog.nodes.push_back({std::string(id), std::string(label), *category, *layer});
      doc.node_lines.push_back(number);
    } else {
      // src,dst[,note] — the note may contain commas.
      const auto first = line.find(',');
      if (first == std::string_view::npos) {
        throw CatalogError("edge line needs at least src,dst", number);
      }
      const auto rest = line.substr(first + 1);
      const auto second = rest.find(',');
      const auto src = trim(line.substr(0, first));
      const auto dst = trim(rest.substr(0, second));
      const auto note = second == std::string_view::npos ? std::string_view{} : trim(rest.substr(second + 1));
      if (src.empty() || dst.empty()) throw CatalogError("empty edge endpoint", number);
      doc.catalog.edges.push_back({std::string(src), std::string(dst), std::string(note)});
      doc.edge_lines.push_back(number);
    }
    if (end == text.size()) break;
  }

  if (!saw_nodes) throw CatalogError("missing [nodes] section", 0);
  if (expect_header) throw CatalogError("section is missing its column header", number);
  return doc;
}

}  // namespace

std::string_view layer_name(Layer layer) {
  switch (layer) {
    case Layer::internet_finance:
      return "internet_finance";
    case Layer::regulatory:
      return "regulatory";
    case Layer::traditional_finance:
      return "traditional_finance";
    case Layer::context:
      return "context";
  }
  return "unknown";
}

std::optional<Layer> layer_from_name(std::string_view name) {
  for (Layer l : {Layer::internet_finance, Layer::regulatory, Layer::traditional_finance, Layer::context}) {
    if (layer_name(l) == name) return l;
  }
  return std::nullopt;
}

std::optional<RiskCategory> RiskCategory::from_code(char code) {
  if (category_info(code) == nullptr) return std::nullopt;
  return RiskCategory(code);
}

std::string_view RiskCategory::name() const { return category_info(code_)->name; }

Layer RiskCategory::layer() const { return category_info(code_)->layer; }

bool id_less(std::string_view a, std::string_view b) {
  std::string_view pa, da, pb, db;
  const bool wa = split_id(a, pa, da);
  const bool wb = split_id(b, pb, db);
  if (wa && wb) {
    if (pa != pb) return pa < pb;
    // Compare digit strings by numeric value without overflow.
    const auto strip = [](std::string_view d) { return d.substr(std::min(d.find_first_not_of('0'), d.size())); };
    const auto na = strip(da);
    const auto nb = strip(db);
    if (na.size() != nb.size()) return na.size() < nb.size();
    if (na != nb) return na < nb;
  }
  return a < b;
}

const RiskNode* Catalog::find(std::string_view id) const {
  for (const auto& node : nodes) {
    if (node.id == id) return &node;
  }
  return nullptr;
}

Catalog Catalog::sorted() const {
  Catalog out = *this;
  std::stable_sort(out.nodes.begin(), out.nodes.end(), node_less);
  std::stable_sort(out.edges.begin(), out.edges.end(), edge_less);
  return out;
}

bool same_catalog(const Catalog& a, const Catalog& b) {
  const Catalog sa = a.sorted();
  const Catalog sb = b.sorted();
  return sa.nodes == sb.nodes && sa.edges == sb.edges;
}

std::vector<Violation> validate_catalog(const Catalog& catalog) {
  std::vector<Violation> out;
  std::set<std::string> ids;
  for (const auto& node : catalog.nodes) {
    check_node(node, out);
    if (!ids.insert(node.id).second) {
      out.push_back({node.id, "duplicate-node", "node id " + node.id + " is defined more than once"});
    }
  }
  std::set<std::pair<std::string, std::string>> pairs;
  for (const auto& edge : catalog.edges) {
    const std::string key = edge_key(edge);
    if (edge.src == edge.dst) {
      out.push_back({key, "self-loop", "edge " + key + " is a self-loop"});
    }
    for (const std::string* end : {&edge.src, &edge.dst}) {
      if (!ids.contains(*end)) {
        out.push_back({key, "missing-endpoint", "edge " + key + " references unknown node " + *end});
      }
    }
    if (!pairs.insert({edge.src, edge.dst}).second) {
      out.push_back({key, "duplicate-edge", "edge " + key + " is listed more than once"});
    }
  }
  return out;
}

Catalog read_catalog(std::string_view text) { return read_document(text).catalog; }

Catalog parse_catalog(std::string_view text) {
  ParsedDocument doc = read_document(text);
  std::set<std::string> ids;
  for (std::size_t i = 0; i < doc.catalog.nodes.size(); ++i) {
    const auto& node = doc.catalog.nodes[i];
    std::vector<Violation> v;
    check_node(node, v);
    if (!v.empty()) throw CatalogError(v.front().message, doc.node_lines[i]);
    if (!ids.insert(node.id).second) {
      throw CatalogError("duplicate node id " + node.id, doc.node_lines[i]);
    }
  }
  std::set<std::pair<std::string, std::string>> pairs;
  for (std::size_t i = 0; i < doc.catalog.edges.size(); ++i) {
    const auto& edge = doc.catalog.edges[i];
    const int line = doc.edge_lines[i];
    if (edge.src == edge.dst) throw CatalogError("self-loop edge " + edge_key(edge), line);
    if (!ids.contains(edge.src)) throw CatalogError("edge source " + edge.src + " is not a node", line);
    if (!ids.contains(edge.dst)) throw CatalogError("edge target " + edge.dst + " is not a node", line);
    if (!pairs.insert({edge.src, edge.dst}).second) {
      throw CatalogError("duplicate edge " + edge_key(edge), line);
    }
  }
  return std::move(doc.catalog);
}

Catalog load_catalog_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read catalog file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_catalog(buf.str());
}

std::string serialize_catalog(const Catalog& catalog) {
  const Catalog sorted = catalog.sorted();
  std::string out = "[nodes]\nid,label,category,layer\n";
  for (const auto& node : sorted.nodes) {
    out += node.id + ',' + node.label + ',' + node.category.code() + ',' + std::string(layer_name(node.layer)) +
           '\n';
  }
  out += "\n[edges]\nsrc,dst,note\n";
  for (const auto& edge : sorted.edges) {
    out += edge.src + ',' + edge.dst + ',' + edge.note + '\n';
  }
  return out;
}

Catalog merge_subnets(std::span<const Catalog> parts) {
  std::map<std::string, RiskNode> nodes;
  std::map<std::pair<std::string, std::string>, std::string> edges;
  for (const auto& part : parts) {
    for (const auto& node : part.nodes) {
      auto [it, inserted] = nodes.emplace(node.id, node);
      if (!inserted && !(it->second == node)) {
        throw MergeError("conflicting definitions of node " + node.id);
      }
    }
    for (const auto& edge : part.edges) {
      auto [it, inserted] = edges.emplace(std::make_pair(edge.src, edge.dst), edge.note);
      if (inserted || edge.note.empty() || it->second == edge.note) continue;
      if (it->second.empty()) {
        it->second = edge.note;
      } else {
        throw MergeError("conflicting notes on edge " + edge_key(edge));
      }
    }
  }
  Catalog out;
  for (auto& [id, node] : nodes) out.nodes.push_back(std::move(node));
  for (auto& [key, note] : edges) out.edges.push_back({key.first, key.second, std::move(note)});
  return out.sorted();
}

Catalog extract_subnet(const Catalog& catalog, Layer layer) {
  std::set<std::string> keep;
  for (const auto& node : catalog.nodes) {
    if (node.layer == layer) keep.insert(node.id);
  }
  Catalog out;
  std::set<std::string> endpoints = keep;
  for (const auto& edge : catalog.edges) {
    if (keep.contains(edge.src)) {
      out.edges.push_back(edge);
      endpoints.insert(edge.dst);
    }
  }
  for (const auto& node : catalog.nodes) {
    if (endpoints.contains(node.id)) out.nodes.push_back(node);
  }
  return out.sorted();
}

}  // namespace riskmesh
