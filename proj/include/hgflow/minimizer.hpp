#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "hgflow/energy.hpp"

namespace hgflow {

/// Objective  phi_{G,p}(x) + sum_{i < k} [ (alpha_i / 2)(x_i - center_i)^2 - linear_i x_i ]
/// minimized over the first k = num_variable coordinates; coordinates k..n+m-1
/// stay at their value in `fixed`. Covers the constrained prox step (k = n),
/// the penalized prox step (k = n + m) and the steady-state functional
/// (alpha = 0).
struct CompositeObjective {
  const Hypergraph* graph = nullptr;
  double p = 2.0;
  std::size_t num_variable = 0;
  Eigen::VectorXd fixed;   ///< full state supplying the fixed coordinates
  Eigen::VectorXd alpha;   ///< length num_variable, >= 0
  Eigen::VectorXd center;  ///< length num_variable
  Eigen::VectorXd linear;  ///< length num_variable

  double value(const State& x) const;
  /// Full state with the variable prefix replaced by y.
  State assemble(const Eigen::VectorXd& y) const;
};

struct MinimizerOptions {
  double tol = 1e-8;                 ///< certified stationarity |min-norm subgradient|
  std::size_t max_iterations = 20000;
  double tie_tol = kDefaultTieTol;   ///< relative argmax tolerance of the certificate
};

/// Stationarity certificate of the objective at x: the least-norm element of
/// its subdifferential (over the variable coordinates) and the energy
/// subgradient realizing it.
struct Stationarity {
  Eigen::VectorXd residual;  ///< length num_variable
  double norm = 0.0;
  SubgradientSelection eta;  ///< full-length element of the energy subdifferential
};

Stationarity stationarity(const CompositeObjective& obj, const State& x, double tie_tol,
                          double target_norm = 0.0);

struct MinimizerResult {
  State x;
  Stationarity certificate;
  std::size_t iterations = 0;
};

/// Descent along least-norm elements of enlarged subdifferentials (argmax
/// tolerance shrinking towards tie_tol) with bisection line search. Returns
/// once the certificate norm is <= tol; throws NoConvergence otherwise.
MinimizerResult minimize(const CompositeObjective& obj, const Eigen::VectorXd& start,
                         const MinimizerOptions& options = {});

}  // namespace hgflow
