#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "hgflow/errors.hpp"
#include "hgflow/minimizer.hpp"
#include "hgflow/solver.hpp"
#include "oracles.hpp"

using namespace hgflow;
using Vec = Eigen::VectorXd;

namespace {

Vec vec(std::initializer_list<double> v) {
  Vec x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double d : v) x[i++] = d;
  return x;
}

SolverConfig config(double p, double dt, double t_end) {
  SolverConfig cfg;
  cfg.p = p;
  cfg.dt = dt;
  cfg.t_end = t_end;
  return cfg;
}

const Hypergraph kEdge(1, 1, {{0, 1}}, {1.0});

// Five vertices, three free, mixed edge sizes.
const Hypergraph kDesk(3, 2, {{0, 1, 3}, {1, 2}, {2, 4}, {0, 2, 4}}, {1.0, 2.0, 0.5, 1.0});

void check_trajectory_invariants(const Hypergraph& g, const Trajectory& traj, const Schedule& a, const Schedule& h,
                                 const SolverConfig& cfg) {
  const auto n = static_cast<Eigen::Index>(g.n_free());
  for (std::size_t k = 1; k < traj.size(); ++k) {
    const double tau = traj.times[k] - traj.times[k - 1];
    CHECK(traj.residuals[k] <= cfg.prox_tol);
    CHECK(traj.states[k].tail(a.dim()) == a.value(traj.times[k]));
    CHECK(traj.xi[k].head(n).norm() <= 10 * cfg.prox_tol);
    const Vec incl = (traj.states[k] - traj.states[k - 1]) / tau + traj.eta[k] + traj.xi[k] - h.value(traj.times[k]);
    CHECK(incl.norm() <= 10 * cfg.prox_tol / tau);
  }
}

}  // namespace

TEST_CASE("prox step examples") {
  const SolverConfig cfg;
  const State x = prox_step(kEdge, 2.0, vec({1, 0}), ConstraintSet{1, vec({0})}, Vec::Zero(2), 1.0, cfg);
  CHECK(x[0] == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(x[1] == 0.0);
  const State c = prox_step(kDesk, 1.5, Vec::Constant(5, 0.3), ConstraintSet{3, vec({0.3, 0.3})}, Vec::Zero(5), 0.7, cfg);
  CHECK((c - Vec::Constant(5, 0.3)).norm() < 1e-12);
  CHECK_THROWS_AS(prox_step(kEdge, 2.0, vec({1, 0}), ConstraintSet{1, vec({0})}, Vec::Zero(2), 0.0, cfg),
                  std::invalid_argument);
}

TEST_CASE("prox step matches the grid-search oracle") {
  std::mt19937_64 rng(23);
  const double ps[] = {1.0, 1.5, 2.0, 3.0};
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 1 + rng() % 2, m = 1 + rng() % (4 - n);
    const Hypergraph g = oracle::random_connected_graph(rng, n, m, rng() % 3);
    const double p = ps[trial % 4];
    const double tau = std::pow(10.0, std::uniform_real_distribution<double>(-1, 1)(rng));
    const ConstraintSet k{n, oracle::random_vector(rng, static_cast<Eigen::Index>(m))};
    const Vec z = oracle::random_vector(rng, static_cast<Eigen::Index>(n + m));
    const Vec h = oracle::random_vector(rng, static_cast<Eigen::Index>(n + m));
    const MinimizerResult r = prox_step_detailed(g, p, z, k, h, tau, SolverConfig{});
    CHECK(r.certificate.norm <= 1e-8);

    const auto ni = static_cast<Eigen::Index>(n);
    const Vec alpha = Vec::Constant(ni, 1.0 / tau);
    auto f = [&](const Vec& y) { return oracle::composite(g, p, project(z, k), alpha, z.head(ni), h.head(ni), y); };
    const Vec ref = oracle::grid_search(f, z.head(ni), 4.0);
    CHECK((r.x.head(ni) - ref).cwiseAbs().maxCoeff() <= 1e-4);
  }
}

TEST_CASE("equilibrium stays put") {
  const Schedule a = Schedule::constant(vec({2, 2}));
  const Schedule h = Schedule::zero(5);
  const Trajectory traj = implicit_euler(kDesk, Vec::Constant(5, 2.0), a, h, config(2.0, 0.1, 1.0));
  for (const State& x : traj.states) CHECK((x - Vec::Constant(5, 2.0)).norm() < 1e-12);
}

TEST_CASE("p = 1 single edge follows (1 - t)_+") {
  const SolverConfig cfg = config(1.0, 0.01, 2.0);
  const Trajectory traj = implicit_euler(kEdge, vec({1, 0}), Schedule::zero(1), Schedule::zero(2), cfg);
  for (std::size_t k = 0; k < traj.size(); ++k) {
    CHECK(std::abs(traj.states[k][0] - std::max(0.0, 1.0 - traj.times[k])) <= 1e-9);
  }
  CHECK(std::abs(traj.states.back()[0]) <= 1e-10);
}

TEST_CASE("trajectory invariants on a hypergraph with moving pins") {
  const Schedule a({0.0, 0.4, 1.0}, {vec({0, 1}), vec({1, -1}), vec({0.5, 0.5})});
  const Schedule h({0.0, 1.0}, {vec({0.5, 0, -0.5, 0, 0}), vec({0, 1, 0, 0, 1})});
  const State x0 = vec({0.3, -0.2, 0.9, 0, 1});
  for (double p : {1.0, 1.5, 2.0, 3.0}) {
    const SolverConfig cfg = config(p, 0.02, 1.0);
    const Trajectory traj = implicit_euler(kDesk, x0, a, h, cfg);
    CHECK(traj.size() == 51);
    check_trajectory_invariants(kDesk, traj, a, h, cfg);
  }
}

TEST_CASE("energy dissipation with constant data") {
  const Schedule a = Schedule::constant(vec({1, -1}));
  const Vec h_inf = vec({0.2, 0, -0.3, 0, 0});
  const Schedule h = Schedule::constant(h_inf);
  for (double p : {1.0, 1.5, 2.0, 3.0}) {
    const Trajectory traj = implicit_euler(kDesk, vec({2, 0, -2, 1, -1}), a, h, config(p, 0.05, 2.0));
    for (std::size_t k = 1; k < traj.size(); ++k) {
      CHECK(steady_functional(kDesk, p, traj.states[k], h_inf) <=
            steady_functional(kDesk, p, traj.states[k - 1], h_inf) + 1e-12);
    }
  }
}

TEST_CASE("initial state and connectivity checks") {
  const Schedule a = Schedule::zero(1);
  CHECK_THROWS_AS(implicit_euler(kEdge, vec({1, 0.5}), a, Schedule::zero(2), config(2, 0.1, 1)),
                  InitialStateNotAdmissible);
  const Hypergraph split(2, 2, {{0, 2}, {1, 3}}, {1.0, 1.0});
  CHECK_THROWS_AS(implicit_euler(split, Vec::Zero(4), Schedule::zero(2), Schedule::zero(4), config(2, 0.1, 1)),
                  DisconnectedGraph);
  const Schedule short_a({0.0, 0.5}, {vec({0}), vec({1})});
  CHECK_THROWS_AS(implicit_euler(kEdge, vec({1, 0}), short_a, Schedule::zero(2), config(2, 0.1, 1)), OutOfRange);
}

TEST_CASE("time grid contains the schedule knots") {
  const Schedule a({0.0, 0.123, 0.5, 2.0}, {vec({0}), vec({1}), vec({0}), vec({1})});
  SolverConfig cfg = config(2, 0.1, 1.0);
  cfg.extra_knots = {0.77};
  const auto grid = time_grid(cfg, {&a});
  CHECK(grid.front() == 0.0);
  CHECK(grid.back() == 1.0);
  CHECK(std::count(grid.begin(), grid.end(), 0.123) == 1);
  CHECK(std::count(grid.begin(), grid.end(), 0.5) == 1);
  CHECK(std::count(grid.begin(), grid.end(), 0.77) == 1);
  CHECK(grid.size() == 13);
  for (std::size_t i = 1; i < grid.size(); ++i) CHECK(grid[i] > grid[i - 1]);
}

TEST_CASE("linear oracle examples") {
  const Trajectory traj = linear_oracle(kEdge, vec({1, 0}), Schedule::zero(1), Schedule::zero(2), 1e-3, 2.0);
  for (std::size_t k = 0; k < traj.size(); k += 100) {
    CHECK(traj.states[k][0] == doctest::Approx(std::exp(-traj.times[k])).epsilon(1e-10));
  }
  // Two free vertices placed symmetrically about the pin.
  const Hypergraph sym(2, 1, {{0, 2}, {1, 2}}, {1.0, 1.0});
  const Trajectory s = linear_oracle(sym, vec({1, 1, 0}), Schedule::zero(1), Schedule::zero(3), 1e-2, 1.0);
  for (const State& x : s.states) CHECK(x[0] == x[1]);
  const Trajectory eq = linear_oracle(sym, vec({3, 3, 3}), Schedule::constant(vec({3})), Schedule::zero(3), 1e-2, 1.0);
  for (const State& x : eq.states) CHECK((x - vec({3, 3, 3})).norm() < 1e-12);
  CHECK_THROWS_AS(linear_oracle(kDesk, Vec::Zero(5), Schedule::zero(2), Schedule::zero(5), 1e-2, 1.0),
                  NotALinearCase);
  CHECK(linear_decay_rate(kEdge) == doctest::Approx(1.0));
}

TEST_CASE("implicit Euler converges to the linear oracle") {
  const Hypergraph g(3, 2, {{0, 1}, {1, 2}, {0, 3}, {2, 4}, {1, 3}}, {1.0, 2.0, 1.0, 0.5, 1.0});
  const Schedule a({0.0, 0.5, 1.0}, {vec({0, 1}), vec({1, 0}), vec({0.5, 0.5})});
  const Schedule h = Schedule::constant(vec({0.3, 0, -0.3, 0, 0}));
  const State x0 = vec({1, 0, -1, 0, 1});
  const Trajectory ref = linear_oracle(g, x0, a, h, 1e-4, 1.0);
  const double e1 = sup_distance(implicit_euler(g, x0, a, h, config(2, 0.02, 1.0)), ref);
  const double e2 = sup_distance(implicit_euler(g, x0, a, h, config(2, 0.01, 1.0)), ref);
  CHECK(e1 <= 5 * 0.02 * 2.0);
  CHECK(std::log2(e1 / e2) == doctest::Approx(1.0).epsilon(0.2));
}

TEST_CASE("penalized scheme") {
  const Schedule a({0.0, 1.0}, {vec({0, 1}), vec({1, 0})});
  const Schedule h = Schedule::zero(5);
  const State x0 = vec({0.3, -0.2, 0.9, 0, 1});
  SolverConfig cfg = config(2.0, 0.02, 1.0);
  const Trajectory ref = implicit_euler(kDesk, x0, a, h, cfg);
  cfg.lambda = 1e-6;
  const Trajectory pen = yosida_trajectory(kDesk, x0, a, h, cfg);
  CHECK(sup_distance(pen, ref) < 1e-2);
  for (std::size_t k = 0; k < pen.size(); ++k) {
    CHECK((pen.xi[k] - (pen.states[k] - project(pen.states[k], constraint_at(kDesk, a, pen.times[k]))) / cfg.lambda)
              .norm() < 1e-6);
  }
  // A huge lambda leaves the penalty without effect: the unconstrained flow.
  cfg.lambda = 1e12;
  const Trajectory loose = yosida_trajectory(kDesk, x0, Schedule::zero(2), h, cfg);
  const Trajectory free_flow = implicit_euler_unconstrained(kDesk, x0, h, cfg);
  CHECK(sup_distance(loose, free_flow) < 1e-6);
}

TEST_CASE("steady state examples") {
  for (double p : {1.0, 1.5, 2.0, 3.0}) {
    const auto r = steady_state(kDesk, p, vec({0.7, 0.7}), Vec::Zero(5));
    REQUIRE(std::holds_alternative<StationaryPoint>(r));
    const auto& sp = std::get<StationaryPoint>(r);
    CHECK((sp.x_inf - Vec::Constant(5, 0.7)).norm() < 1e-8);
    CHECK(std::abs(sp.phi_value) < 1e-12);
  }
  // p = 1 counterexample: h = (4 #E max w, 0, ..., 0) with a = 0.
  const Hypergraph g(2, 1, {{0, 1}, {1, 2}}, {1.0, 1.0});
  const auto r = steady_state(g, 1.0, vec({0}), vec({8, 0, 0}));
  REQUIRE(std::holds_alternative<UnboundedBelow>(r));
  const auto& ub = std::get<UnboundedBelow>(r);
  CHECK(ub.recession_slope < 0);
  CHECK(ub.ray[2] == 0.0);
  CHECK(ub.ray.norm() == doctest::Approx(1.0));
  for (std::size_t i = 1; i < ub.phi_samples.size(); ++i) CHECK(ub.phi_samples[i] < ub.phi_samples[i - 1]);
  // p = 2 linear case against the direct solve.
  const Hypergraph lin(3, 2, {{0, 1}, {1, 2}, {0, 3}, {2, 4}}, {1.0, 2.0, 1.0, 0.5});
  const auto s = steady_state(lin, 2.0, vec({1, -1}), vec({0.5, 0, 0, 0, 0}));
  CHECK((std::get<StationaryPoint>(s).x_inf - linear_steady_state(lin, vec({1, -1}), vec({0.5, 0, 0, 0, 0}))).norm() <
        1e-8);
}

TEST_CASE("trajectory csv") {
  const Trajectory traj = implicit_euler(kEdge, vec({1, 0}), Schedule::zero(1), Schedule::zero(2), config(2, 0.5, 1));
  std::istringstream in(trajectory_csv(traj));
  std::string line;
  std::getline(in, line);
  CHECK(line == "t,x_0,x_1,eta_0,eta_1,xi_0,xi_1,residual");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 3);
}
