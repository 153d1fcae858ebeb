#include "hgflow/solver.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <locale>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "hgflow/errors.hpp"

namespace hgflow {

void SolverConfig::check() const {
  Exponent{p};
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (!(t_end > 0.0)) throw std::invalid_argument("t_end must be positive");
  if (!(prox_tol > 0.0)) throw std::invalid_argument("prox_tol must be positive");
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
  if (!(tie_tol >= 0.0)) throw std::invalid_argument("tie_tol must be nonnegative");
}

std::vector<double> time_grid(const SolverConfig& cfg, const std::vector<const Schedule*>& schedules) {
  struct Point {
    double t;
    bool knot;
  };
  std::vector<Point> pts;
  const auto steps = static_cast<std::size_t>(std::floor(cfg.t_end / cfg.dt + 1e-9));
  for (std::size_t i = 0; i <= steps; ++i) pts.push_back({std::min(static_cast<double>(i) * cfg.dt, cfg.t_end), false});
  pts.push_back({cfg.t_end, true});
  auto add_knot = [&](double t) {
    if (t > 0.0 && t < cfg.t_end) pts.push_back({t, true});
  };
  for (const Schedule* s : schedules) {
    for (double t : s->times()) add_knot(t);
  }
  for (double t : cfg.extra_knots) add_knot(t);
  std::stable_sort(pts.begin(), pts.end(), [](const Point& a, const Point& b) { return a.t < b.t; });

  const double merge_tol = 1e-9 * cfg.dt;
  std::vector<Point> merged;
  for (const Point& pt : pts) {
    if (!merged.empty() && pt.t - merged.back().t <= merge_tol) {
      // Keep exact knot values (and exactly 0) over rounded uniform points.
      if (pt.knot && merged.back().t != 0.0) merged.back() = pt;
      continue;
    }
    merged.push_back(pt);
  }
  std::vector<double> grid;
  grid.reserve(merged.size());
  for (const Point& pt : merged) grid.push_back(pt.t);
  return grid;
}

State Trajectory::state_at(double t) const {
  if (times.empty()) throw std::logic_error("state_at on an empty trajectory");
  if (t <= times.front()) return states.front();
  if (t >= times.back()) return states.back();
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  const std::size_t i = static_cast<std::size_t>(it - times.begin());
  const double s = (t - times[i - 1]) / (times[i] - times[i - 1]);
  return (1.0 - s) * states[i - 1] + s * states[i];
}

namespace {

void check_schedules(const Hypergraph& g, const Schedule& a, const Schedule& h, double t_end) {
  if (a.dim() != g.m_pinned()) {
    throw std::invalid_argument("pinned schedule has dimension " + std::to_string(a.dim()) +
                                ", expected " + std::to_string(g.m_pinned()));
  }
  if (h.dim() != g.num_vertices()) {
    throw std::invalid_argument("forcing schedule has dimension " + std::to_string(h.dim()) +
                                ", expected " + std::to_string(g.num_vertices()));
  }
  if (a.horizon() < t_end) throw OutOfRange(t_end);
  if (h.horizon() < t_end) throw OutOfRange(t_end);
}

// Runs minimize(), retrying once with the widened argmax tolerance used near
// kinks of the p = 1 energy.
MinimizerResult minimize_with_retry(const CompositeObjective& obj, const Eigen::VectorXd& start,
                                    const SolverConfig& cfg) {
  MinimizerOptions options;
  options.tol = cfg.prox_tol;
  options.max_iterations = cfg.prox_max_iter;
  options.tie_tol = cfg.tie_tol;
  try {
    return minimize(obj, start, options);
  } catch (const NoConvergence&) {
    if (options.tie_tol >= 1e-7) throw;
    options.tie_tol = 1e-7;
    return minimize(obj, start, options);
  }
}

Trajectory start_trajectory(const Hypergraph& g, const State& x0, double p) {
  Trajectory traj;
  traj.n_free = g.n_free();
  traj.times.push_back(0.0);
  traj.states.push_back(x0);
  traj.eta.push_back(subgradient_min_norm(g, p, x0).eta);
  traj.xi.push_back(Eigen::VectorXd::Zero(x0.size()));
  traj.residuals.push_back(0.0);
  return traj;
}

}  // namespace

MinimizerResult prox_step_detailed(const Hypergraph& g, double p, const State& z,
                                   const ConstraintSet& k, const Eigen::VectorXd& h_t, double tau,
                                   const SolverConfig& cfg) {
  if (!(tau > 0.0)) throw std::invalid_argument("prox_step: tau must be positive");
  const auto n = static_cast<Eigen::Index>(g.n_free());
  if (z.size() != static_cast<Eigen::Index>(g.num_vertices()) || h_t.size() != z.size() ||
      k.n_free != g.n_free() || k.m_pinned() != g.m_pinned()) {
    throw std::invalid_argument("prox_step: dimension mismatch");
  }
  CompositeObjective obj;
  obj.graph = &g;
  obj.p = p;
  obj.num_variable = g.n_free();
  obj.fixed = project(z, k);
  obj.alpha = Eigen::VectorXd::Constant(n, 1.0 / tau);
  obj.center = z.head(n);
  obj.linear = h_t.head(n);
  return minimize_with_retry(obj, z.head(n), cfg);
}

State prox_step(const Hypergraph& g, double p, const State& z, const ConstraintSet& k,
                const Eigen::VectorXd& h_t, double tau, const SolverConfig& cfg) {
  return prox_step_detailed(g, p, z, k, h_t, tau, cfg).x;
}

Trajectory implicit_euler(const Hypergraph& g, const State& x0, const Schedule& a, const Schedule& h,
                          const SolverConfig& cfg) {
  cfg.check();
  validate(g);
  require_connected(g);
  check_schedules(g, a, h, cfg.t_end);
  if (x0.size() != static_cast<Eigen::Index>(g.num_vertices())) {
    throw InitialStateNotAdmissible("initial state has the wrong length");
  }
  const ConstraintSet k0 = constraint_at(g, a, 0.0);
  if (!x0.allFinite() || !k0.contains(x0, 1e-12 * (1.0 + k0.a_values.cwiseAbs().maxCoeff()))) {
    throw InitialStateNotAdmissible("pinned components of x0 differ from a(0)");
  }

  const auto grid = time_grid(cfg, {&a, &h});
  Trajectory traj = start_trajectory(g, project(x0, k0), cfg.p);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double tau = grid[i] - grid[i - 1];
    const State& prev = traj.states.back();
    const ConstraintSet k = constraint_at(g, a, grid[i]);
    const Eigen::VectorXd h_t = h.value(grid[i]);
    MinimizerResult step = prox_step_detailed(g, cfg.p, prev, k, h_t, tau, cfg);
    Eigen::VectorXd xi = h_t - (step.x - prev) / tau - step.certificate.eta.eta;
    traj.times.push_back(grid[i]);
    traj.eta.push_back(std::move(step.certificate.eta.eta));
    traj.xi.push_back(std::move(xi));
    traj.residuals.push_back(step.certificate.norm);
    traj.states.push_back(std::move(step.x));
  }
  return traj;
}

Trajectory implicit_euler_unconstrained(const Hypergraph& g, const State& x0, const Schedule& h,
                                        const SolverConfig& cfg) {
  cfg.check();
  validate(g, false);
  require_connected(g);
  if (h.dim() != g.num_vertices()) throw std::invalid_argument("forcing schedule dimension mismatch");
  if (h.horizon() < cfg.t_end) throw OutOfRange(cfg.t_end);
  if (x0.size() != static_cast<Eigen::Index>(g.num_vertices()) || !x0.allFinite()) {
    throw InitialStateNotAdmissible("initial state has the wrong length or non-finite entries");
  }
  const auto nv = static_cast<Eigen::Index>(g.num_vertices());
  const auto grid = time_grid(cfg, {&h});
  Trajectory traj = start_trajectory(g, x0, cfg.p);
  traj.n_free = g.num_vertices();
  MinimizerOptions options;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double tau = grid[i] - grid[i - 1];
    const State& prev = traj.states.back();
    CompositeObjective obj;
    obj.graph = &g;
    obj.p = cfg.p;
    obj.num_variable = g.num_vertices();
    obj.fixed = prev;
    obj.alpha = Eigen::VectorXd::Constant(nv, 1.0 / tau);
    obj.center = prev;
    obj.linear = h.value(grid[i]);
    MinimizerResult step = minimize_with_retry(obj, prev, cfg);
    traj.times.push_back(grid[i]);
    traj.eta.push_back(std::move(step.certificate.eta.eta));
    traj.xi.push_back(Eigen::VectorXd::Zero(nv));
    traj.residuals.push_back(step.certificate.norm);
    traj.states.push_back(std::move(step.x));
  }
  return traj;
}

Trajectory yosida_trajectory(const Hypergraph& g, const State& x0, const Schedule& a, const Schedule& h,
                             const SolverConfig& cfg) {
  cfg.check();
  validate(g);
  require_connected(g);
  check_schedules(g, a, h, cfg.t_end);
  if (x0.size() != static_cast<Eigen::Index>(g.num_vertices()) || !x0.allFinite()) {
    throw InitialStateNotAdmissible("initial state has the wrong length or non-finite entries");
  }
  const auto n = static_cast<Eigen::Index>(g.n_free());
  const auto m = static_cast<Eigen::Index>(g.m_pinned());
  const auto grid = time_grid(cfg, {&a, &h});
  Trajectory traj = start_trajectory(g, x0, cfg.p);
  traj.xi.front() = (x0 - project(x0, constraint_at(g, a, 0.0))) / cfg.lambda;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double tau = grid[i] - grid[i - 1];
    const State& prev = traj.states.back();
    const ConstraintSet k = constraint_at(g, a, grid[i]);
    // (1/2tau)|x - z|^2 + (1/2lambda)|x_pin - a|^2 folded into one diagonal quadratic.
    CompositeObjective obj;
    obj.graph = &g;
    obj.p = cfg.p;
    obj.num_variable = g.num_vertices();
    obj.fixed = prev;
    obj.alpha = Eigen::VectorXd::Constant(n + m, 1.0 / tau);
    obj.alpha.tail(m).array() += 1.0 / cfg.lambda;
    obj.center = prev;
    obj.center.tail(m) = (prev.tail(m) / tau + k.a_values / cfg.lambda).cwiseQuotient(obj.alpha.tail(m));
    obj.linear = h.value(grid[i]);
    MinimizerResult step = minimize_with_retry(obj, prev, cfg);
    traj.times.push_back(grid[i]);
    traj.xi.push_back((step.x - project(step.x, k)) / cfg.lambda);
    traj.eta.push_back(std::move(step.certificate.eta.eta));
    traj.residuals.push_back(step.certificate.norm);
    traj.states.push_back(std::move(step.x));
  }
  return traj;
}

double steady_functional(const Hypergraph& g, double p, const State& x, const Eigen::VectorXd& h_inf) {
  return energy(g, p, x) - h_inf.dot(x);
}

SteadyStateResult steady_state(const Hypergraph& g, double p, const Eigen::VectorXd& a_inf,
                               const Eigen::VectorXd& h_inf, double tol, std::size_t max_iter) {
  Exponent{p};
  validate(g);
  require_connected(g);
  const auto n = static_cast<Eigen::Index>(g.n_free());
  if (a_inf.size() != static_cast<Eigen::Index>(g.m_pinned()) ||
      h_inf.size() != static_cast<Eigen::Index>(g.num_vertices())) {
    throw std::invalid_argument("steady_state: dimension mismatch");
  }
  const ConstraintSet k{g.n_free(), a_inf};
  const State base = lift(Eigen::VectorXd::Constant(n, a_inf.mean()), k);

  if (p == 1.0) {
    // Phi is bounded below iff h_free lies in the free projection of
    // sum_e w(e) B_e; otherwise the least-norm point yields a descent ray.
    std::vector<EdgeFace> faces(g.num_edges());
    double magnitude = h_inf.head(n).norm();
    for (std::size_t e = 0; e < g.num_edges(); ++e) {
      faces[e].scale = g.weight(e);
      for (VertexId u : g.edge(e)) {
        for (VertexId v : g.edge(e)) faces[e].pairs.emplace_back(u, v);
      }
      magnitude += std::sqrt(2.0) * g.weight(e);
    }
    std::vector<std::ptrdiff_t> coord(g.num_vertices(), -1);
    for (Eigen::Index v = 0; v < n; ++v) coord[static_cast<std::size_t>(v)] = v;
    MinNormOptions options;
    options.gap_tol = std::pow(1e-15 * magnitude, 2);
    const auto mn = min_norm_point(-h_inf.head(n), faces, coord, options);
    if (mn.norm > std::max(tol, 1e-12 * magnitude)) {
      UnboundedBelow cert;
      cert.base = base;
      cert.ray = Eigen::VectorXd::Zero(h_inf.size());
      cert.ray.head(n) = -mn.point / mn.norm;
      cert.recession_slope = energy(g, 1.0, cert.ray) - h_inf.dot(cert.ray);
      for (double mu : {1.0, 10.0, 100.0, 1000.0}) {
        cert.mu.push_back(mu);
        cert.phi_samples.push_back(steady_functional(g, p, base + mu * cert.ray, h_inf));
      }
      return cert;
    }
  }

  CompositeObjective obj;
  obj.graph = &g;
  obj.p = p;
  obj.num_variable = g.n_free();
  obj.fixed = base;
  obj.alpha = Eigen::VectorXd::Zero(n);
  obj.center = Eigen::VectorXd::Zero(n);
  obj.linear = h_inf.head(n);
  MinimizerOptions options;
  options.tol = tol;
  options.max_iterations = max_iter;
  const MinimizerResult result = minimize(obj, base.head(n), options);

  StationaryPoint sp;
  sp.x_inf = result.x;
  sp.phi_value = steady_functional(g, p, result.x, h_inf);
  sp.stationarity_residual = result.certificate.norm;
  return sp;
}

Eigen::MatrixXd graph_laplacian(const Hypergraph& g) {
  if (!g.is_usual_graph()) throw NotALinearCase("linear oracle requires every edge to have two vertices");
  const auto nv = static_cast<Eigen::Index>(g.num_vertices());
  Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(nv, nv);
  for (std::size_t e = 0; e < g.num_edges(); ++e) {
    const auto u = static_cast<Eigen::Index>(g.edge(e)[0]);
    const auto v = static_cast<Eigen::Index>(g.edge(e)[1]);
    const double w = g.weight(e);
    lap(u, u) += w;
    lap(v, v) += w;
    lap(u, v) -= w;
    lap(v, u) -= w;
  }
  return lap;
}

Trajectory linear_oracle(const Hypergraph& g, const State& x0, const Schedule& a, const Schedule& h,
                         double dt_fine, double t_end) {
  validate(g);
  const Eigen::MatrixXd lap = graph_laplacian(g);
  check_schedules(g, a, h, t_end);
  const auto n = static_cast<Eigen::Index>(g.n_free());
  const auto m = static_cast<Eigen::Index>(g.m_pinned());
  const Eigen::MatrixXd l_ff = lap.topLeftCorner(n, n);
  const Eigen::MatrixXd l_fc = lap.topRightCorner(n, m);

  auto rhs = [&](double t, const Eigen::VectorXd& y) -> Eigen::VectorXd {
    return -l_ff * y - l_fc * a.value(t) + h.value(t).head(n);
  };
  auto full_state = [&](double t, const Eigen::VectorXd& y) {
    State x(n + m);
    x << y, a.value(t);
    return x;
  };
  auto record = [&](Trajectory& traj, double t, const Eigen::VectorXd& y) {
    const State x = full_state(t, y);
    Eigen::VectorXd velocity(n + m);
    velocity << rhs(t, y), a.derivative(t);
    const Eigen::VectorXd eta = lap * x;
    traj.times.push_back(t);
    traj.states.push_back(x);
    traj.xi.push_back(h.value(t) - velocity - eta);
    traj.eta.push_back(eta);
    traj.residuals.push_back(0.0);
  };

  SolverConfig grid_cfg;
  grid_cfg.dt = dt_fine;
  grid_cfg.t_end = t_end;
  const auto grid = time_grid(grid_cfg, {&a, &h});

  Trajectory traj;
  traj.n_free = g.n_free();
  Eigen::VectorXd y = x0.head(n);
  record(traj, 0.0, y);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double t = grid[i - 1];
    const double step = grid[i] - t;
    const Eigen::VectorXd k1 = rhs(t, y);
    const Eigen::VectorXd k2 = rhs(t + 0.5 * step, y + 0.5 * step * k1);
    const Eigen::VectorXd k3 = rhs(t + 0.5 * step, y + 0.5 * step * k2);
    const Eigen::VectorXd k4 = rhs(t + step, y + step * k3);
    y += step / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    record(traj, grid[i], y);
  }
  return traj;
}

State linear_steady_state(const Hypergraph& g, const Eigen::VectorXd& a_values, const Eigen::VectorXd& h) {
  const Eigen::MatrixXd lap = graph_laplacian(g);
  const auto n = static_cast<Eigen::Index>(g.n_free());
  const auto m = static_cast<Eigen::Index>(g.m_pinned());
  const Eigen::VectorXd rhs = -lap.topRightCorner(n, m) * a_values + h.head(n);
  State x(n + m);
  x << lap.topLeftCorner(n, n).ldlt().solve(rhs), a_values;
  return x;
}

double linear_decay_rate(const Hypergraph& g) {
  const Eigen::MatrixXd lap = graph_laplacian(g);
  const auto n = static_cast<Eigen::Index>(g.n_free());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(lap.topLeftCorner(n, n));
  return eig.eigenvalues().minCoeff();
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  const std::size_t nv = traj.states.empty() ? 0 : static_cast<std::size_t>(traj.states.front().size());
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << std::setprecision(17);
  os << "t";
  for (const char* prefix : {"x_", "eta_", "xi_"}) {
    for (std::size_t i = 0; i < nv; ++i) os << ',' << prefix << i;
  }
  os << ",residual\n";
  for (std::size_t k = 0; k < traj.size(); ++k) {
    os << traj.times[k];
    for (const Eigen::VectorXd* v : {&traj.states[k], &traj.eta[k], &traj.xi[k]}) {
      for (Eigen::Index i = 0; i < v->size(); ++i) os << ',' << (*v)[i];
    }
    os << ',' << traj.residuals[k] << '\n';
  }
  out << os.str();
}

std::string trajectory_csv(const Trajectory& traj) {
  std::ostringstream os;
  write_trajectory_csv(os, traj);
  return os.str();
}

double sup_distance(const Trajectory& traj1, const Trajectory& traj2) {
  double sup = 0.0;
  for (std::size_t k = 0; k < traj1.size(); ++k) {
    sup = std::max(sup, (traj1.states[k] - traj2.state_at(traj1.times[k])).norm());
  }
  return sup;
}

}  // namespace hgflow
