#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "hgflow/constraint.hpp"
#include "hgflow/energy.hpp"
#include "hgflow/minimizer.hpp"

namespace hgflow {

struct SolverConfig {
  double p = 2.0;
  double dt = 1e-2;
  double t_end = 1.0;
  double prox_tol = 1e-8;
  std::size_t prox_max_iter = 20000;
  /// Penalty parameter of the penalized scheme; unused by the constrained one.
  double lambda = 1e-3;
  double tie_tol = kDefaultTieTol;
  /// Additional grid points (e.g. the knots of a run to be compared against).
  std::vector<double> extra_knots;

  void check() const;
};

/// Time grid: uniform steps of dt on [0, t_end] merged with the schedule
/// knots and cfg.extra_knots that fall inside (0, t_end).
std::vector<double> time_grid(const SolverConfig& cfg, const std::vector<const Schedule*>& schedules);

struct Trajectory {
  std::size_t n_free = 0;
  std::vector<double> times;
  std::vector<State> states;
  /// eta[k], xi[k], residuals[k] belong to step k (the interval ending at
  /// times[k]). Entry 0 holds the least-norm energy subgradient at x0, the
  /// penalty term for the penalized scheme (zero otherwise) and residual 0.
  std::vector<Eigen::VectorXd> eta;
  std::vector<Eigen::VectorXd> xi;
  std::vector<double> residuals;

  std::size_t size() const noexcept { return times.size(); }
  /// Piecewise-linear interpolation of the states.
  State state_at(double t) const;
};

/// Argmin over x in K of (1/(2 tau))|x - z|^2 + phi(x) - h_t . x, solved on the
/// free coordinates. Throws NoConvergence.
MinimizerResult prox_step_detailed(const Hypergraph& g, double p, const State& z,
                                   const ConstraintSet& k, const Eigen::VectorXd& h_t, double tau,
                                   const SolverConfig& cfg);
State prox_step(const Hypergraph& g, double p, const State& z, const ConstraintSet& k,
                const Eigen::VectorXd& h_t, double tau, const SolverConfig& cfg);

/// Backward Euler for x' + d phi(x) + d I_{K_a(t)}(x) ∋ h(t), x(0) = x0.
/// `a` has dimension m, `h` dimension n + m.
Trajectory implicit_euler(const Hypergraph& g, const State& x0, const Schedule& a, const Schedule& h,
                          const SolverConfig& cfg);

/// Backward Euler for x' + d phi(x) ∋ h(t) with every vertex free (pins, if
/// any, are ignored). xi is identically zero.
Trajectory implicit_euler_unconstrained(const Hypergraph& g, const State& x0, const Schedule& h,
                                        const SolverConfig& cfg);

/// Backward Euler for the penalized inclusion
///   x' + d phi(x) + (x - Proj_{K_a(t)} x) / lambda ∋ h(t)
/// over all vertices; xi holds the penalty term.
Trajectory yosida_trajectory(const Hypergraph& g, const State& x0, const Schedule& a, const Schedule& h,
                             const SolverConfig& cfg);

struct StationaryPoint {
  State x_inf;
  double phi_value = 0.0;          ///< phi(x_inf) - h_inf . x_inf (the functional Phi)
  double stationarity_residual = 0.0;
};

/// Certificate that Phi = phi + I_K - h_inf . x is unbounded below (p = 1 only).
struct UnboundedBelow {
  State base;                       ///< admissible starting point
  Eigen::VectorXd ray;              ///< unit direction, zero on pinned vertices
  double recession_slope = 0.0;     ///< phi(ray) - h_inf . ray < 0
  std::vector<double> mu;           ///< sample distances along the ray
  std::vector<double> phi_samples;  ///< Phi(base + mu * ray)
};

using SteadyStateResult = std::variant<StationaryPoint, UnboundedBelow>;

/// Minimizes Phi over K_{a_inf}. Throws DisconnectedGraph or NoConvergence.
SteadyStateResult steady_state(const Hypergraph& g, double p, const Eigen::VectorXd& a_inf,
                               const Eigen::VectorXd& h_inf, double tol = 1e-9,
                               std::size_t max_iter = 200000);

/// Value of Phi at an admissible x.
double steady_functional(const Hypergraph& g, double p, const State& x, const Eigen::VectorXd& h_inf);

/// Graph Laplacian sum_e w(e) (1_u - 1_v)(1_u - 1_v)^T. Throws NotALinearCase
/// unless every edge has two vertices.
Eigen::MatrixXd graph_laplacian(const Hypergraph& g);

/// Reference solution of the p = 2 usual-graph case: classical RK4 with step
/// dt_fine (aligned with the schedule knots) on
///   x_free' = -L_ff x_free - L_fc a(t) + h_free(t).
Trajectory linear_oracle(const Hypergraph& g, const State& x0, const Schedule& a, const Schedule& h,
                         double dt_fine, double t_end);

/// Steady solve of the linear case: L_ff x_free = -L_fc a + h_free.
State linear_steady_state(const Hypergraph& g, const Eigen::VectorXd& a_values, const Eigen::VectorXd& h);

/// Smallest eigenvalue of L_ff, the slowest decay rate of the linear case.
double linear_decay_rate(const Hypergraph& g);

/// CSV: header "t,x_0..,eta_0..,xi_0..,residual", 17 significant digits.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);
std::string trajectory_csv(const Trajectory& traj);

/// Sup over grid points of |x1(t) - x2(t)| (Euclidean), evaluating traj2 by
/// interpolation at the grid of traj1.
double sup_distance(const Trajectory& traj1, const Trajectory& traj2);

}  // namespace hgflow
