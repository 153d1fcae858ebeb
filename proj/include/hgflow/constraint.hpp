#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "hgflow/energy.hpp"

namespace hgflow {

/// Piecewise-linear function of time sampled on a strictly increasing grid
/// starting at 0. A single sample is a constant function on [0, inf).
class Schedule {
 public:
  Schedule() = default;
  Schedule(std::vector<double> times, std::vector<Eigen::VectorXd> values);

  static Schedule constant(const Eigen::VectorXd& value);
  static Schedule zero(std::size_t dim) { return constant(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim))); }

  std::size_t dim() const noexcept { return dim_; }
  const std::vector<double>& times() const noexcept { return times_; }
  const std::vector<Eigen::VectorXd>& values() const noexcept { return values_; }
  bool is_constant() const noexcept { return times_.size() == 1; }
  /// Last knot; +inf for constant schedules.
  double horizon() const noexcept;

  /// Throws OutOfRange for t < 0 or t past the last knot.
  Eigen::VectorXd value(double t) const;
  /// Slope of the active segment; at a knot the right segment wins (the last
  /// knot reports the slope of the final segment).
  Eigen::VectorXd derivative(double t) const;

  /// Last sample, the t -> inf value used by steady-state problems.
  const Eigen::VectorXd& final_value() const { return values_.back(); }

  /// True when every sample is zero.
  bool is_identically_zero() const;

 private:
  std::size_t segment(double t) const;

  std::size_t dim_ = 0;
  std::vector<double> times_;
  std::vector<Eigen::VectorXd> values_;
};

/// {"times": [...], "values": [[...], ...]}. Throws ParseError.
Schedule load_schedule(std::string_view text, std::size_t expected_dim);
Schedule load_schedule_file(const std::string& path, std::size_t expected_dim);
std::string save_schedule(const Schedule& s);

/// K_a(t): states whose pinned suffix equals a_values.
struct ConstraintSet {
  std::size_t n_free = 0;
  Eigen::VectorXd a_values;

  std::size_t m_pinned() const noexcept { return static_cast<std::size_t>(a_values.size()); }
  bool contains(const State& x, double tol = 0.0) const;
};

ConstraintSet constraint_at(const Hypergraph& g, const Schedule& a, double t);

/// Suffix overwrite: (x_1, ..., x_n, a_1, ..., a_m).
State project(const State& x, const ConstraintSet& k);
State lift(const Eigen::VectorXd& free, const ConstraintSet& k);
Eigen::VectorXd reduce(const State& x, std::size_t n_free);

/// (0, ..., 0, a_1, ..., a_m): a pinned-only vector embedded on all vertices.
Eigen::VectorXd embed_pinned(const Eigen::VectorXd& a_values, std::size_t n_free);

/// An element of the normal cone of K_a(t): zero on free vertices.
struct IndicatorSection {
  Eigen::VectorXd xi;

  /// Euclidean norm of the free block, zero for an exact section.
  double free_block_norm(std::size_t n_free) const {
    return xi.head(static_cast<Eigen::Index>(n_free)).norm();
  }
};

}  // namespace hgflow
