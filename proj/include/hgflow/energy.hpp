#pragma once

#include <cstddef>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "hgflow/hypergraph.hpp"
#include "hgflow/min_norm.hpp"

namespace hgflow {

/// Heat on every vertex, canonical order (free first, pinned last).
using State = Eigen::VectorXd;

/// The exponent p >= 1 of the energy and its Hoelder conjugate.
class Exponent {
 public:
  explicit Exponent(double p);

  double value() const noexcept { return p_; }
  /// p / (p - 1); infinity for p = 1.
  double conjugate() const noexcept;
  /// 1 / p' = (p - 1) / p, which is 0 for p = 1.
  double inverse_conjugate() const noexcept { return (p_ - 1.0) / p_; }

 private:
  double p_;
};

/// Relative argmax tolerance: pairs within tie_tol * (f_e(x) + 1) of the
/// spread count as maximizers.
inline constexpr double kDefaultTieTol = 1e-9;

/// One element of the subdifferential of the energy together with the
/// per-edge convex weights that produced it.
struct SubgradientSelection {
  Eigen::VectorXd eta;
  /// pairs[e] are the candidate (u, v) pairs of edge e, coefficients[e] the
  /// convex weights over them.
  std::vector<std::vector<VertexPair>> pairs;
  std::vector<std::vector<double>> coefficients;

  /// b_e = sum_k coefficients[e][k] (1_u - 1_v) as a dense vector.
  Eigen::VectorXd edge_direction(std::size_t e, std::size_t num_vertices) const;
};

/// f_e(x) = max_{u,v in e} (x(u) - x(v)).
double edge_spread(const Hypergraph& g, std::size_t e, const State& x);

/// phi(x) = (1/p) sum_e w(e) f_e(x)^p.
double energy(const Hypergraph& g, double p, const State& x);

/// Ordered pairs (u, v) of e with x(u) - x(v) >= f_e(x) - tie_tol (absolute).
std::vector<VertexPair> argmax_pairs(const Hypergraph& g, std::size_t e, const State& x,
                                     double tie_tol);

/// Scalar multiplying the edge's base-polytope face: w(e) f_e^{p-1}, with the
/// convention 0^0 = 1 so that p = 1 keeps the whole polytope w(e) B_e at a
/// flat edge.
double edge_face_scale(const Hypergraph& g, double p, std::size_t e, double spread);

/// Faces of the subdifferential at x, one per edge, with relative tie_tol.
std::vector<EdgeFace> subdifferential_faces(const Hypergraph& g, double p, const State& x,
                                            double tie_tol = kDefaultTieTol);

/// Deterministic element of the subdifferential: the argmax pairs of each edge
/// are averaged uniformly.
SubgradientSelection subgradient_any(const Hypergraph& g, double p, const State& x,
                                     double tie_tol = kDefaultTieTol);

/// Least-norm element of the selection set, to within `tol` in the objective
/// (half squared norm). Throws NoConvergence when the cap is hit.
SubgradientSelection subgradient_min_norm(const Hypergraph& g, double p, const State& x,
                                          double tol = 1e-20, double tie_tol = kDefaultTieTol);

/// C = n (n+m)^{1/p'} (min_e w(e))^{-1/p}. Throws DisconnectedGraph.
double poincare_constant(const Hypergraph& g, double p);

struct PoincareCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
};

/// Both sides of sum_{k<n} |x_k| <= C phi(x)^{1/p} + n min_i |a_i|.
/// Throws ConstraintViolated when the pinned part of x differs from a_values.
PoincareCheck poincare_check(const Hypergraph& g, double p, const State& x,
                             const Eigen::VectorXd& a_values);

/// Constants of the norm bounds: phi(x) <= energy_bound_factor * |x|^p and
/// |eta| <= subgradient_bound_factor * |x|^{p-1}.
double energy_bound_factor(const Hypergraph& g, double p);
double subgradient_bound_factor(const Hypergraph& g, double p);

}  // namespace hgflow
