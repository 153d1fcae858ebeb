#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace hgflow {

/// Canonical vertex index: [0, n) are free vertices, [n, n+m) are pinned.
using VertexId = std::size_t;
using Edge = std::vector<VertexId>;

/// Weighted hypergraph G = (V, E, w) with the vertex set split into free and
/// pinned (Dirichlet) vertices. Immutable once built.
class Hypergraph {
 public:
  Hypergraph() = default;
  Hypergraph(std::size_t n_free, std::size_t m_pinned, std::vector<Edge> edges,
             std::vector<double> weights, std::vector<std::string> names = {});

  std::size_t n_free() const noexcept { return n_free_; }
  std::size_t m_pinned() const noexcept { return m_pinned_; }
  std::size_t num_vertices() const noexcept { return n_free_ + m_pinned_; }
  std::size_t num_edges() const noexcept { return edges_.size(); }

  const std::vector<Edge>& edges() const noexcept { return edges_; }
  const Edge& edge(std::size_t e) const { return edges_.at(e); }
  const std::vector<double>& weights() const noexcept { return weights_; }
  double weight(std::size_t e) const { return weights_.at(e); }

  bool is_pinned(VertexId v) const noexcept { return v >= n_free_; }

  /// Vertex names in canonical order; synthesized ("v0", "v1", ...) when the
  /// graph was built without names.
  const std::vector<std::string>& names() const noexcept { return names_; }

  /// file_order()[i] is the canonical index of the i-th vertex as listed in
  /// the source document. Identity for graphs built in code.
  const std::vector<VertexId>& file_order() const noexcept { return file_order_; }

  double max_weight() const;
  double min_weight() const;

  /// True when every edge has exactly two vertices (an ordinary graph).
  bool is_usual_graph() const;

  friend bool operator==(const Hypergraph& a, const Hypergraph& b) {
    return a.n_free_ == b.n_free_ && a.m_pinned_ == b.m_pinned_ && a.edges_ == b.edges_ &&
           a.weights_ == b.weights_ && a.names_ == b.names_;
  }

 private:
  friend Hypergraph load_hypergraph(std::string_view text);

  std::size_t n_free_ = 0;
  std::size_t m_pinned_ = 0;
  std::vector<Edge> edges_;
  std::vector<double> weights_;
  std::vector<std::string> names_;
  std::vector<VertexId> file_order_;
};

/// Throws ValidationError unless every structural invariant holds. With
/// `require_pins` a graph without pinned vertices is rejected as well.
void validate(const Hypergraph& g, bool require_pins = true);

/// Connected components of the vertex set, each sorted, ordered by smallest
/// member. Reachability is taken on the bipartite vertex-edge incidence graph.
std::vector<std::vector<VertexId>> components(const Hypergraph& g);

bool is_connected(const Hypergraph& g);

/// Throws DisconnectedGraph naming the components when g is not connected.
void require_connected(const Hypergraph& g);

/// JSON document:
///   {"vertices": [names], "pinned": [names],
///    "edges": [{"members": [names], "weight": w}, ...]}
/// Canonical order is free vertices in file order followed by pinned vertices
/// in file order. Throws ParseError or ValidationError.
Hypergraph load_hypergraph(std::string_view text);
Hypergraph load_hypergraph_file(const std::string& path);

std::string save_hypergraph(const Hypergraph& g);

}  // namespace hgflow
