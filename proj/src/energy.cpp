#include "hgflow/energy.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "hgflow/errors.hpp"

namespace hgflow {

Exponent::Exponent(double p) : p_(p) {
  if (!(p >= 1.0) || !std::isfinite(p)) {
    throw std::invalid_argument("exponent p must lie in [1, inf), got " + std::to_string(p));
  }
}

double Exponent::conjugate() const noexcept {
  return p_ == 1.0 ? std::numeric_limits<double>::infinity() : p_ / (p_ - 1.0);
}

Eigen::VectorXd SubgradientSelection::edge_direction(std::size_t e, std::size_t num_vertices) const {
  Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(num_vertices));
  for (std::size_t k = 0; k < pairs[e].size(); ++k) {
    const auto [u, v] = pairs[e][k];
    b[static_cast<Eigen::Index>(u)] += coefficients[e][k];
    b[static_cast<Eigen::Index>(v)] -= coefficients[e][k];
  }
  return b;
}

double edge_spread(const Hypergraph& g, std::size_t e, const State& x) {
  const Edge& edge = g.edge(e);
  double hi = -std::numeric_limits<double>::infinity();
  double lo = std::numeric_limits<double>::infinity();
  for (VertexId v : edge) {
    const double xv = x[static_cast<Eigen::Index>(v)];
    hi = std::max(hi, xv);
    lo = std::min(lo, xv);
  }
  return hi - lo;
}

double energy(const Hypergraph& g, double p, const State& x) {
  double total = 0.0;
  for (std::size_t e = 0; e < g.num_edges(); ++e) {
    total += g.weight(e) * std::pow(edge_spread(g, e, x), p);
  }
  return total / p;
}

std::vector<VertexPair> argmax_pairs(const Hypergraph& g, std::size_t e, const State& x,
                                     double tie_tol) {
  const Edge& edge = g.edge(e);
  const double threshold = edge_spread(g, e, x) - tie_tol;
  std::vector<VertexPair> pairs;
  for (VertexId u : edge) {
    for (VertexId v : edge) {
      if (x[static_cast<Eigen::Index>(u)] - x[static_cast<Eigen::Index>(v)] >= threshold) {
        pairs.emplace_back(u, v);
      }
    }
  }
  return pairs;
}

double edge_face_scale(const Hypergraph& g, double p, std::size_t e, double spread) {
  if (p == 1.0) return g.weight(e);
  return g.weight(e) * std::pow(spread, p - 1.0);
}

std::vector<EdgeFace> subdifferential_faces(const Hypergraph& g, double p, const State& x,
                                            double tie_tol) {
  std::vector<EdgeFace> faces(g.num_edges());
  for (std::size_t e = 0; e < g.num_edges(); ++e) {
    const double spread = edge_spread(g, e, x);
    faces[e].scale = edge_face_scale(g, p, e, spread);
    faces[e].pairs = argmax_pairs(g, e, x, tie_tol * (spread + 1.0));
  }
  return faces;
}

SubgradientSelection subgradient_any(const Hypergraph& g, double p, const State& x,
                                     double tie_tol) {
  const auto faces = subdifferential_faces(g, p, x, tie_tol);
  SubgradientSelection sel;
  sel.eta = Eigen::VectorXd::Zero(x.size());
  sel.pairs.resize(faces.size());
  sel.coefficients.resize(faces.size());
  for (std::size_t e = 0; e < faces.size(); ++e) {
    const auto& face = faces[e];
    const double share = 1.0 / static_cast<double>(face.pairs.size());
    sel.pairs[e] = face.pairs;
    sel.coefficients[e].assign(face.pairs.size(), share);
    for (const auto& [u, v] : face.pairs) {
      sel.eta[static_cast<Eigen::Index>(u)] += face.scale * share;
      sel.eta[static_cast<Eigen::Index>(v)] -= face.scale * share;
    }
  }
  return sel;
}

SubgradientSelection subgradient_min_norm(const Hypergraph& g, double p, const State& x,
                                          double tol, double tie_tol) {
  const auto faces = subdifferential_faces(g, p, x, tie_tol);
  std::vector<std::ptrdiff_t> coord(g.num_vertices());
  std::iota(coord.begin(), coord.end(), std::ptrdiff_t{0});
  MinNormOptions options;
  options.gap_tol = tol;
  const auto result = min_norm_point(Eigen::VectorXd::Zero(x.size()), faces, coord, options);
  if (!result.converged) {
    throw NoConvergence("subgradient_min_norm", result.gap, result.iterations);
  }
  SubgradientSelection sel;
  sel.eta = result.point;
  sel.pairs.resize(faces.size());
  for (std::size_t e = 0; e < faces.size(); ++e) sel.pairs[e] = faces[e].pairs;
  sel.coefficients = result.coefficients;
  return sel;
}

double poincare_constant(const Hypergraph& g, double p) {
  require_connected(g);
  const Exponent exponent(p);
  const double n = static_cast<double>(g.n_free());
  const double nv = static_cast<double>(g.num_vertices());
  return n * std::pow(nv, exponent.inverse_conjugate()) * std::pow(g.min_weight(), -1.0 / p);
}

PoincareCheck poincare_check(const Hypergraph& g, double p, const State& x,
                             const Eigen::VectorXd& a_values) {
  const auto n = static_cast<Eigen::Index>(g.n_free());
  const auto m = static_cast<Eigen::Index>(g.m_pinned());
  if (x.size() != n + m || a_values.size() != m) {
    throw ConstraintViolated("poincare_check: dimension mismatch");
  }
  for (Eigen::Index j = 0; j < m; ++j) {
    if (std::abs(x[n + j] - a_values[j]) > 1e-12 * (1.0 + std::abs(a_values[j]))) {
      throw ConstraintViolated("poincare_check: pinned component " + std::to_string(j) +
                               " differs from its prescribed value");
    }
  }
  PoincareCheck check;
  check.lhs = x.head(n).cwiseAbs().sum();
  const double min_pin = m > 0 ? a_values.cwiseAbs().minCoeff() : 0.0;
  check.rhs = poincare_constant(g, p) * std::pow(energy(g, p, x), 1.0 / p) +
              static_cast<double>(n) * min_pin;
  check.holds = check.lhs <= check.rhs * (1.0 + 1e-12) + 1e-300;
  return check;
}

double energy_bound_factor(const Hypergraph& g, double p) {
  return std::pow(2.0, p) * static_cast<double>(g.num_edges()) * g.max_weight() / p;
}

double subgradient_bound_factor(const Hypergraph& g, double p) {
  return std::pow(2.0, p) * static_cast<double>(g.num_edges()) * g.max_weight();
}

}  // namespace hgflow
