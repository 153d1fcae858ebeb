#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "hgflow/hypergraph.hpp"

namespace hgflow {

using VertexPair = std::pair<VertexId, VertexId>;

/// One summand c * conv{1_u - 1_v : (u, v) in pairs} of a Minkowski sum.
struct EdgeFace {
  double scale = 0.0;
  std::vector<VertexPair> pairs;
};

struct MinNormOptions {
  /// Stop once the Frank-Wolfe gap |x|^2 - x.q falls below this value.
  double gap_tol = 1e-24;
  /// Stop as soon as |x| <= target_norm (the minimum is then certainly below it).
  double target_norm = 0.0;
  std::size_t max_iterations = 10000;
};

struct MinNormResult {
  Eigen::VectorXd point;
  /// coefficients[f][k] is the convex weight of faces[f].pairs[k].
  std::vector<std::vector<double>> coefficients;
  double norm = 0.0;
  double gap = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

/// Minimum Euclidean-norm point of  offset + sum_f faces[f].scale * conv(D_f),
/// where D_f holds the difference vectors 1_u - 1_v of the face's pairs,
/// projected onto coordinates via coord_of_vertex (a negative entry drops the
/// vertex). Wolfe's min-norm-point algorithm with a separable linear
/// minimization oracle; every face must have at least one pair.
MinNormResult min_norm_point(const Eigen::VectorXd& offset, std::span<const EdgeFace> faces,
                             std::span<const std::ptrdiff_t> coord_of_vertex,
                             const MinNormOptions& options = {});

}  // namespace hgflow
