#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <string>

#include "riskmesh/layout.hpp"

namespace riskmesh {

namespace {

constexpr double kCanvas = 800.0;
constexpr double kMargin = 40.0;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

std::string escape_xml(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

std::string_view category_color(char code) {
  switch (code) {
    case 'A': return "#1f77b4";
    case 'B': return "#ff7f0e";
    case 'C': return "#2ca02c";
    case 'D': return "#d62728";
    case 'E': return "#9467bd";
    case 'F': return "#8c564b";
    case 'G': return "#e377c2";
    case 'H': return "#17becf";
    case 'I': return "#bcbd22";
    case 'J': return "#7f7f7f";
    case 'K': return "#aec7e8";
    default: return "#c7c7c7";
  }
}

char category_of(const Catalog* catalog, const std::string& id) {
  if (catalog == nullptr) return '?';
  const RiskNode* node = catalog->find(id);
  return node ? node->category.code() : '?';
}

void check_match(const LayoutResult& layout, const ContagionGraph& graph, const NodeMetrics& metrics) {
  if (layout.ids != graph.ids() || metrics.ids != graph.ids() || layout.positions.size() != graph.size()) {
    throw RenderError("layout, graph and metrics describe different node sets");
  }
}

}  // namespace

std::string render_svg(const LayoutResult& layout, const ContagionGraph& graph, const NodeMetrics& metrics,
                       const RenderStyle& style, const Catalog* catalog) {
  check_match(layout, graph, metrics);
  const std::size_t n = graph.size();
  std::string out;
  out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kCanvas) + "\" height=\"" + num(kCanvas) +
         "\" viewBox=\"0 0 " + num(kCanvas) + " " + num(kCanvas) + "\">\n";
  out += "  <defs><marker id=\"arrow\" viewBox=\"0 0 10 10\" refX=\"10\" refY=\"5\" markerWidth=\"6\" "
         "markerHeight=\"6\" orient=\"auto-start-reverse\"><path d=\"M 0 0 L 10 5 L 0 10 z\" fill=\"#555\"/>"
         "</marker></defs>\n";
  if (n == 0) {
    out += "</svg>\n";
    return out;
  }

  double min_x = layout.positions[0].x, max_x = min_x;
  double min_y = layout.positions[0].y, max_y = min_y;
  for (const auto& p : layout.positions) {
    min_x = std::min(min_x, p.x);
    max_x = std::max(max_x, p.x);
    min_y = std::min(min_y, p.y);
    max_y = std::max(max_y, p.y);
  }
  const double span = std::max({max_x - min_x, max_y - min_y, 1e-12});
  const double scale = (kCanvas - 2.0 * kMargin) / span;
  const auto px = [&](std::size_t v) { return kMargin + (layout.positions[v].x - min_x) * scale; };
  const auto py = [&](std::size_t v) { return kMargin + (layout.positions[v].y - min_y) * scale; };

  const std::vector<double> radii = metric_radii(metrics.values(style.metric));

  out += "  <g class=\"edges\" stroke=\"#555\" stroke-opacity=\"0.5\" stroke-width=\"1\">\n";
  for (std::size_t u = 0; u < n; ++u) {
    std::vector<std::size_t> succ = graph.successors(u);
    std::sort(succ.begin(), succ.end());
    for (std::size_t v : succ) {
      // Stop the arrow at the target's rim.
      const double dx = px(v) - px(u);
      const double dy = py(v) - py(u);
      const double len = std::hypot(dx, dy);
      const double trim = len > 0.0 ? std::min(radii[v], len) / len : 0.0;
      out += "    <line class=\"edge\" data-src=\"" + escape_xml(graph.ids()[u]) + "\" data-dst=\"" +
             escape_xml(graph.ids()[v]) + "\" x1=\"" + num(px(u)) + "\" y1=\"" + num(py(u)) + "\" x2=\"" +
             num(px(v) - dx * trim) + "\" y2=\"" + num(py(v) - dy * trim) + "\" marker-end=\"url(#arrow)\"/>\n";
    }
  }
  out += "  </g>\n";

  out += "  <g class=\"nodes\" stroke=\"#fff\" stroke-width=\"0.5\">\n";
  for (std::size_t v = 0; v < n; ++v) {
    const std::string& id = graph.ids()[v];
    const char cat = category_of(catalog, id);
    const std::string_view color = style.color_by_category ? category_color(cat) : std::string_view("#4c72b0");
    out += "    <circle class=\"node\" id=\"node-" + escape_xml(id) + "\" cx=\"" + num(px(v)) + "\" cy=\"" +
           num(py(v)) + "\" r=\"" + num(radii[v]) + "\" fill=\"" + std::string(color) + "\"><title>" +
           escape_xml(id) + " " + std::string(metric_name(style.metric)) + "=" + num(metrics.values(style.metric)[v]) +
           "</title></circle>\n";
  }
  out += "  </g>\n";

  out += "  <g class=\"labels\" font-family=\"sans-serif\" font-size=\"9\" text-anchor=\"middle\">\n";
  for (std::size_t v = 0; v < n; ++v) {
    out += "    <text x=\"" + num(px(v)) + "\" y=\"" + num(py(v) + 3.0) + "\">" + escape_xml(graph.ids()[v]) +
           "</text>\n";
  }
  out += "  </g>\n</svg>\n";
  return out;
}

std::string export_dot(const ContagionGraph& graph) {
  std::string out = "digraph {\n";
  for (const auto& id : graph.ids()) out += "  \"" + id + "\";\n";
  for (std::size_t u = 0; u < graph.size(); ++u) {
    std::vector<std::size_t> succ = graph.successors(u);
    std::sort(succ.begin(), succ.end());
    for (std::size_t v : succ) out += "  \"" + graph.ids()[u] + "\" -> \"" + graph.ids()[v] + "\";\n";
  }
  out += "}\n";
  return out;
}

std::string export_graphml(const LayoutResult& layout, const ContagionGraph& graph, const NodeMetrics& metrics,
                           Metric metric, const Catalog* catalog) {
  check_match(layout, graph, metrics);
  const std::vector<double> radii = metric_radii(metrics.values(metric));
  std::string out;
  out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n";
  out += "  <key id=\"x\" for=\"node\" attr.name=\"x\" attr.type=\"double\"/>\n";
  out += "  <key id=\"y\" for=\"node\" attr.name=\"y\" attr.type=\"double\"/>\n";
  out += "  <key id=\"radius\" for=\"node\" attr.name=\"radius\" attr.type=\"double\"/>\n";
  out += "  <key id=\"category\" for=\"node\" attr.name=\"category\" attr.type=\"string\"/>\n";
  out += "  <graph id=\"G\" edgedefault=\"directed\">\n";
  char buf[64];
  for (std::size_t v = 0; v < graph.size(); ++v) {
    out += "    <node id=\"" + escape_xml(graph.ids()[v]) + "\">";
    std::snprintf(buf, sizeof buf, "%.9g", layout.positions[v].x);
    out += "<data key=\"x\">" + std::string(buf) + "</data>";
    std::snprintf(buf, sizeof buf, "%.9g", layout.positions[v].y);
    out += "<data key=\"y\">" + std::string(buf) + "</data>";
    out += "<data key=\"radius\">" + num(radii[v]) + "</data>";
    out += "<data key=\"category\">" + std::string(1, category_of(catalog, graph.ids()[v])) + "</data></node>\n";
  }
  std::size_t e = 0;
  for (std::size_t u = 0; u < graph.size(); ++u) {
    std::vector<std::size_t> succ = graph.successors(u);
    std::sort(succ.begin(), succ.end());
    for (std::size_t v : succ) {
      out += "    <edge id=\"e" + std::to_string(e++) + "\" source=\"" + escape_xml(graph.ids()[u]) +
             "\" target=\"" + escape_xml(graph.ids()[v]) + "\"/>\n";
    }
  }
  out += "  </graph>\n</graphml>\n";
  return out;
}

}  // namespace riskmesh
