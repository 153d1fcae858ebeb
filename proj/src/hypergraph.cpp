#include "hgflow/hypergraph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <queue>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "hgflow/errors.hpp"

namespace hgflow {

using json = nlohmann::json;

Hypergraph::Hypergraph(std::size_t n_free, std::size_t m_pinned, std::vector<Edge> edges,
                       std::vector<double> weights, std::vector<std::string> names)
    : n_free_(n_free),
      m_pinned_(m_pinned),
      edges_(std::move(edges)),
      weights_(std::move(weights)),
      names_(std::move(names)) {
  if (names_.empty()) {
    names_.reserve(num_vertices());
    for (std::size_t i = 0; i < num_vertices(); ++i) names_.push_back("v" + std::to_string(i));
  }
  file_order_.resize(num_vertices());
  std::iota(file_order_.begin(), file_order_.end(), VertexId{0});
}

double Hypergraph::max_weight() const {
  return weights_.empty() ? 0.0 : *std::max_element(weights_.begin(), weights_.end());
}

double Hypergraph::min_weight() const {
  return weights_.empty() ? 0.0 : *std::min_element(weights_.begin(), weights_.end());
}

bool Hypergraph::is_usual_graph() const {
  return std::all_of(edges_.begin(), edges_.end(), [](const Edge& e) { return e.size() == 2; });
}

void validate(const Hypergraph& g, bool require_pins) {
  if (g.weights().size() != g.num_edges()) {
    throw ValidationError(ValidationCode::WeightCountMismatch, ValidationError::npos,
                          std::to_string(g.num_edges()) + " edges but " +
                              std::to_string(g.weights().size()) + " weights");
  }
  if (g.names().size() != g.num_vertices()) {
    throw ValidationError(ValidationCode::IndexOutOfRange, ValidationError::npos,
                          "vertex name count does not match n + m");
  }
  const std::size_t nv = g.num_vertices();
  for (std::size_t e = 0; e < g.num_edges(); ++e) {
    const Edge& edge = g.edge(e);
    if (edge.empty()) throw ValidationError(ValidationCode::EmptyEdge, e, "");
    if (edge.size() == 1) {
      throw ValidationError(ValidationCode::SingletonEdge, e, "edges need at least two vertices");
    }
    for (VertexId v : edge) {
      if (v >= nv) {
        throw ValidationError(ValidationCode::IndexOutOfRange, e,
                              "vertex " + std::to_string(v) + " >= " + std::to_string(nv));
      }
    }
    Edge sorted = edge;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw ValidationError(ValidationCode::DuplicateVertexInEdge, e, "");
    }
    const double w = g.weight(e);
    if (!(w > 0.0) || !std::isfinite(w)) {
      throw ValidationError(ValidationCode::NonPositiveWeight, e,
                            "weight " + std::to_string(w) + " not in (0, inf)");
    }
  }
  if (require_pins && g.m_pinned() == 0) {
    throw ValidationError(ValidationCode::NoPinnedVertex, ValidationError::npos,
                          "at least one pinned vertex is required");
  }
}

std::vector<std::vector<VertexId>> components(const Hypergraph& g) {
  const std::size_t nv = g.num_vertices();
  std::vector<std::vector<std::size_t>> incident(nv);
  for (std::size_t e = 0; e < g.num_edges(); ++e) {
    for (VertexId v : g.edge(e)) incident[v].push_back(e);
  }
  std::vector<bool> seen_vertex(nv, false);
  std::vector<bool> seen_edge(g.num_edges(), false);
  std::vector<std::vector<VertexId>> result;
  for (VertexId start = 0; start < nv; ++start) {
    if (seen_vertex[start]) continue;
    std::vector<VertexId> comp;
    std::queue<VertexId> frontier;
    frontier.push(start);
    seen_vertex[start] = true;
    while (!frontier.empty()) {
      const VertexId u = frontier.front();
      frontier.pop();
      comp.push_back(u);
      for (std::size_t e : incident[u]) {
        if (seen_edge[e]) continue;
        seen_edge[e] = true;
        for (VertexId v : g.edge(e)) {
          if (!seen_vertex[v]) {
            seen_vertex[v] = true;
            frontier.push(v);
          }
        }
      }
    }
    std::sort(comp.begin(), comp.end());
    result.push_back(std::move(comp));
  }
  return result;
}

bool is_connected(const Hypergraph& g) { return components(g).size() <= 1; }

void require_connected(const Hypergraph& g) {
  const auto comps = components(g);
  if (comps.size() <= 1) return;
  std::ostringstream os;
  os << "hypergraph has " << comps.size() << " components:";
  for (const auto& comp : comps) {
    os << " {";
    for (std::size_t i = 0; i < comp.size(); ++i) os << (i ? ", " : "") << g.names()[comp[i]];
    os << "}";
  }
  throw DisconnectedGraph(os.str());
}

namespace {

std::size_t line_of_offset(std::string_view text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + offset, '\n'));
}

const json& require_field(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw ParseError(where + ": missing field \"" + key + "\"");
  }
  return obj.at(key);
}

std::vector<std::string> string_list(const json& arr, const std::string& where) {
  if (!arr.is_array()) throw ParseError(where + ": expected an array of names");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    if (!arr[i].is_string()) {
      throw ParseError(where + "[" + std::to_string(i) + "]: expected a string");
    }
    out.push_back(arr[i].get<std::string>());
  }
  return out;
}

}  // namespace

Hypergraph load_hypergraph(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& err) {
    throw ParseError("line " + std::to_string(line_of_offset(text, err.byte)) + ": " + err.what());
  }
  if (!doc.is_object()) throw ParseError("document: expected a JSON object");

  const auto vertices = string_list(require_field(doc, "vertices", "document"), "vertices");
  const auto pinned = string_list(require_field(doc, "pinned", "document"), "pinned");

  std::unordered_map<std::string, std::size_t> file_index;
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    if (!file_index.emplace(vertices[i], i).second) {
      throw ParseError("vertices[" + std::to_string(i) + "]: duplicate name \"" + vertices[i] + "\"");
    }
  }
  std::unordered_set<std::string> pinned_set;
  for (std::size_t i = 0; i < pinned.size(); ++i) {
    if (!file_index.count(pinned[i])) {
      throw ParseError("pinned[" + std::to_string(i) + "]: unknown vertex \"" + pinned[i] + "\"");
    }
    if (!pinned_set.insert(pinned[i]).second) {
      throw ParseError("pinned[" + std::to_string(i) + "]: duplicate name \"" + pinned[i] + "\"");
    }
  }

  // Canonical order: free vertices in file order, then pinned in "pinned" order.
  std::vector<std::string> names;
  for (const auto& v : vertices) {
    if (!pinned_set.count(v)) names.push_back(v);
  }
  const std::size_t n = names.size();
  for (const auto& v : pinned) names.push_back(v);
  std::unordered_map<std::string, VertexId> canonical;
  for (std::size_t i = 0; i < names.size(); ++i) canonical.emplace(names[i], i);

  const json& edges_json = require_field(doc, "edges", "document");
  if (!edges_json.is_array()) throw ParseError("edges: expected an array");
  std::vector<Edge> edges;
  std::vector<double> weights;
  for (std::size_t e = 0; e < edges_json.size(); ++e) {
    const std::string where = "edges[" + std::to_string(e) + "]";
    const auto members = string_list(require_field(edges_json[e], "members", where), where + ".members");
    Edge edge;
    for (std::size_t k = 0; k < members.size(); ++k) {
      auto it = canonical.find(members[k]);
      if (it == canonical.end()) {
        throw ParseError(where + ".members[" + std::to_string(k) + "]: unknown vertex \"" +
                         members[k] + "\"");
      }
      edge.push_back(it->second);
    }
    const json& w = require_field(edges_json[e], "weight", where);
    if (!w.is_number()) throw ParseError(where + ".weight: expected a number");
    edges.push_back(std::move(edge));
    weights.push_back(w.get<double>());
  }

  Hypergraph g(n, pinned.size(), std::move(edges), std::move(weights), std::move(names));
  for (std::size_t i = 0; i < vertices.size(); ++i) g.file_order_[i] = canonical.at(vertices[i]);
  validate(g);
  return g;
}

Hypergraph load_hypergraph_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open file");
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return load_hypergraph(buf.str());
  } catch (const ParseError& err) {
    throw ParseError(path + ": " + err.what());
  }
}

std::string save_hypergraph(const Hypergraph& g) {
  json doc;
  doc["vertices"] = g.names();
  doc["pinned"] = std::vector<std::string>(g.names().begin() + static_cast<std::ptrdiff_t>(g.n_free()),
                                           g.names().end());
  json edges = json::array();
  for (std::size_t e = 0; e < g.num_edges(); ++e) {
    std::vector<std::string> members;
    for (VertexId v : g.edge(e)) members.push_back(g.names()[v]);
    edges.push_back({{"members", members}, {"weight", g.weight(e)}});
  }
  doc["edges"] = std::move(edges);
  return doc.dump(2);
}

}  // namespace hgflow
