#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hgflow/constraint.hpp"
#include "hgflow/hypergraph.hpp"
#include "hgflow/solver.hpp"

namespace hgflow {

/// A completed constrained run together with the data that produced it.
struct RunRecord {
  const Trajectory* trajectory = nullptr;
  const Schedule* a = nullptr;  ///< pinned values, dimension m
  const Schedule* h = nullptr;  ///< forcing, dimension n + m
};

struct DependenceReport {
  double lhs = 0.0;               ///< sup_t of the free-coordinate distance
  double rhs = 0.0;               ///< bound value, quadrature allowance included
  double gamma_used = 0.0;
  double initial_distance = 0.0;
  double forcing_integral = 0.0;  ///< trapezoid value of int |h1 - h2|
  double pin_integral = 0.0;      ///< trapezoid value of int |a1 - a2|
  double sup_norm_1 = 0.0;
  double sup_norm_2 = 0.0;
  double allowance = 0.0;         ///< rhs minus the bound evaluated without allowance
  bool holds = false;
};

/// gamma = (2^{p+1} #E max_e w(e))^{1/2}.
double dependence_gamma(const Hypergraph& g, double p);

/// Compares two runs on the same graph and grid. Throws GridMismatch.
DependenceReport dependence_check(const Hypergraph& g, double p, const RunRecord& run1, const RunRecord& run2);

enum class DecayRegime { FiniteExtinction, Exponential, Algebraic };

const char* to_string(DecayRegime regime);

struct DecayReport {
  DecayRegime regime = DecayRegime::Exponential;
  /// p < 2: 1/extinction_time; p = 2: minus the slope of log|x|; p > 2: the
  /// slope of |x|^{-(p-2)}.
  double fitted_rate = 0.0;
  std::optional<double> extinction_time;
  /// The constant gamma of the decay law implied by the fit.
  double gamma_fit = 0.0;
  double r_squared = 1.0;  ///< of the least-squares fit (1 for p < 2)
  double initial_norm = 0.0;
  double final_norm = 0.0;
};

/// Runs the flow with a = 0 and h = 0 from x0 (the unconstrained flow when
/// m = 0) and fits the decay law of its regime. atol is the extinction
/// threshold for p < 2.
DecayReport decay_study(const Hypergraph& g, const State& x0, const SolverConfig& cfg, double atol = 1e-10);

/// Same fit on an existing run. Throws NonZeroData unless a and h vanish.
DecayReport decay_fit(const Trajectory& run, const Schedule& a, const Schedule& h, double p, double atol = 1e-10);

/// Checks that the run has settled over the last 10% of its horizon and that
/// its final state is stationary for Phi = phi + I_K - h_inf . x. Throws
/// NotConverged with the tail oscillation and the stationarity residual.
StationaryPoint omega_limit(const Trajectory& run, const Eigen::VectorXd& a_inf, const Eigen::VectorXd& h_inf,
                            const Hypergraph& g, double p, double tol);

/// Max over the last `fraction` of the horizon of |x(t) - x(T)|.
double tail_oscillation(const Trajectory& run, double fraction = 0.1);

/// Least-norm element of the free block of d phi(x) - h_inf, the stationarity
/// residual of Phi over K at an admissible x.
double steady_residual(const Hypergraph& g, double p, const State& x, const Eigen::VectorXd& h_inf);

struct YosidaRow {
  double lambda = 0.0;
  double pin_deviation = 0.0;      ///< sup_t (sum_j |x_{n+j} - a_j|^2)^{1/2}
  double pin_deviation_sq = 0.0;   ///< sup_t sum_j |x_{n+j} - a_j|^2
  double c1 = 0.0;                 ///< pin_deviation_sq / lambda
  double distance = 0.0;           ///< sup_t |x_lambda(t) - x(t)| against implicit_euler
  std::optional<double> deviation_order;  ///< log-log slope against the previous row
  std::optional<double> distance_order;
};

struct YosidaStudy {
  std::vector<YosidaRow> rows;
  /// Least-squares log-log slope of pin_deviation against lambda.
  double deviation_slope = 0.0;
  bool distance_monotone = true;  ///< distance decreases along decreasing lambda
};

/// Runs yosida_trajectory for every lambda (in parallel) against one
/// implicit_euler reference; rows are reported in decreasing lambda.
YosidaStudy yosida_study(const Hypergraph& g, const State& x0, const Schedule& a, const Schedule& h,
                         const SolverConfig& cfg, std::vector<double> lambdas);

/// Least-squares line y = slope * x + intercept.
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 1.0;
};
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

std::string to_json(const DependenceReport& report);
std::string to_json(const DecayReport& report);
/// Columns: lambda,pin_deviation,pin_deviation_sq,c1,distance,deviation_order,distance_order
std::string yosida_csv(const YosidaStudy& study);

}  // namespace hgflow
