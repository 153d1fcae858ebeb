#include "hgflow/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <future>
#include <iomanip>
#include <limits>
#include <locale>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "hgflow/errors.hpp"
#include "hgflow/minimizer.hpp"

namespace hgflow {

using json = nlohmann::json;

namespace {

double trapezoid(const std::vector<double>& t, const std::vector<double>& f) {
  double sum = 0.0;
  for (std::size_t k = 1; k < t.size(); ++k) sum += 0.5 * (t[k] - t[k - 1]) * (f[k] + f[k - 1]);
  return sum;
}

double max_step(const std::vector<double>& t) {
  double dt = 0.0;
  for (std::size_t k = 1; k < t.size(); ++k) dt = std::max(dt, t[k] - t[k - 1]);
  return dt;
}

double sup_of(const std::vector<double>& f) {
  return f.empty() ? 0.0 : *std::max_element(f.begin(), f.end());
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("fit_line: need two or more points");
  const auto n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("fit_line: abscissae are all equal");
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r_squared = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return fit;
}

double dependence_gamma(const Hypergraph& g, double p) {
  return std::sqrt(std::pow(2.0, p + 1.0) * static_cast<double>(g.num_edges()) * g.max_weight());
}

DependenceReport dependence_check(const Hypergraph& g, double p, const RunRecord& run1, const RunRecord& run2) {
  if (run1.trajectory == nullptr || run2.trajectory == nullptr || run1.a == nullptr || run2.a == nullptr ||
      run1.h == nullptr || run2.h == nullptr) {
    throw std::invalid_argument("dependence_check: incomplete run record");
  }
  const Trajectory& x1 = *run1.trajectory;
  const Trajectory& x2 = *run2.trajectory;
  if (x1.size() != x2.size() || x1.size() == 0) throw GridMismatch("runs have different numbers of grid points");
  for (std::size_t k = 0; k < x1.size(); ++k) {
    if (std::abs(x1.times[k] - x2.times[k]) > 1e-12 * (1.0 + std::abs(x1.times[k]))) {
      throw GridMismatch("runs differ at grid point " + std::to_string(k));
    }
  }
  const auto n = static_cast<Eigen::Index>(g.n_free());
  const std::vector<double>& t = x1.times;

  DependenceReport r;
  r.gamma_used = dependence_gamma(g, p);
  std::vector<double> dh(t.size()), da(t.size());
  for (std::size_t k = 0; k < t.size(); ++k) {
    r.lhs = std::max(r.lhs, (x1.states[k].head(n) - x2.states[k].head(n)).norm());
    r.sup_norm_1 = std::max(r.sup_norm_1, x1.states[k].norm());
    r.sup_norm_2 = std::max(r.sup_norm_2, x2.states[k].norm());
    dh[k] = (run1.h->value(t[k]) - run2.h->value(t[k])).norm();
    da[k] = (run1.a->value(t[k]) - run2.a->value(t[k])).norm();
  }
  r.initial_distance = (x1.states.front().head(n) - x2.states.front().head(n)).norm();
  r.forcing_integral = trapezoid(t, dh);
  r.pin_integral = trapezoid(t, da);

  const double dt = max_step(t);
  const double norm_factor = std::pow(r.sup_norm_1, 0.5 * (p - 1.0)) + std::pow(r.sup_norm_2, 0.5 * (p - 1.0));
  auto bound = [&](double forcing, double pins) {
    return r.initial_distance + forcing + r.gamma_used * norm_factor * std::sqrt(pins);
  };
  const double plain = bound(r.forcing_integral, r.pin_integral);
  r.rhs = bound(r.forcing_integral + 10.0 * dt * sup_of(dh), r.pin_integral + 10.0 * dt * sup_of(da));
  r.allowance = r.rhs - plain;
  r.holds = r.lhs <= r.rhs * (1.0 + 1e-12) + 1e-12;
  return r;
}

const char* to_string(DecayRegime regime) {
  switch (regime) {
    case DecayRegime::FiniteExtinction:
      return "finite_extinction";
    case DecayRegime::Exponential:
      return "exponential";
    case DecayRegime::Algebraic:
      return "algebraic";
  }
  return "unknown";
}

DecayReport decay_fit(const Trajectory& run, const Schedule& a, const Schedule& h, double p, double atol) {
  Exponent{p};
  if (!a.is_identically_zero()) throw NonZeroData("decay study needs a = 0 on every pinned vertex");
  if (!h.is_identically_zero()) throw NonZeroData("decay study needs h = 0");
  if (run.size() < 3) throw std::invalid_argument("decay study needs at least three grid points");

  std::vector<double> norms(run.size());
  for (std::size_t k = 0; k < run.size(); ++k) norms[k] = run.states[k].norm();
  DecayReport r;
  r.initial_norm = norms.front();
  r.final_norm = norms.back();

  // Tail half of the horizon, restricted to nonzero states.
  auto tail = [&](const std::function<double(double)>& transform) {
    std::vector<double> tx, ty;
    const double t_half = 0.5 * run.times.back();
    for (std::size_t k = 0; k < run.size(); ++k) {
      if (run.times[k] >= t_half && norms[k] > 0.0) {
        tx.push_back(run.times[k]);
        ty.push_back(transform(norms[k]));
      }
    }
    return fit_line(tx, ty);
  };

  if (p < 2.0) {
    r.regime = DecayRegime::FiniteExtinction;
    for (std::size_t k = 0; k < run.size(); ++k) {
      if (norms[k] <= atol) {
        r.extinction_time = run.times[k];
        break;
      }
    }
    // |x|^{2-p} decreases linearly up to extinction.
    std::vector<double> tx, ty;
    for (std::size_t k = 0; k < run.size(); ++k) {
      if (norms[k] <= atol) break;
      tx.push_back(run.times[k]);
      ty.push_back(std::pow(norms[k], 2.0 - p));
    }
    if (tx.size() >= 2) {
      const LineFit fit = fit_line(tx, ty);
      r.gamma_fit = -fit.slope;
      r.r_squared = fit.r_squared;
    }
    if (r.extinction_time && *r.extinction_time > 0.0) {
      r.fitted_rate = 1.0 / *r.extinction_time;
    } else {
      r.fitted_rate = r.gamma_fit > 0.0 ? r.gamma_fit / std::pow(r.initial_norm, 2.0 - p) : 0.0;
    }
  } else if (p == 2.0) {
    r.regime = DecayRegime::Exponential;
    const LineFit fit = tail([](double v) { return std::log(v); });
    r.fitted_rate = -fit.slope;
    r.gamma_fit = -fit.slope;
    r.r_squared = fit.r_squared;
  } else {
    r.regime = DecayRegime::Algebraic;
    const LineFit fit = tail([p](double v) { return std::pow(v, -(p - 2.0)); });
    r.fitted_rate = fit.slope;
    r.gamma_fit = fit.slope;
    r.r_squared = fit.r_squared;
  }
  return r;
}

DecayReport decay_study(const Hypergraph& g, const State& x0, const SolverConfig& cfg, double atol) {
  const Schedule h = Schedule::zero(g.num_vertices());
  const Schedule a = Schedule::zero(g.m_pinned());
  const Trajectory run =
      g.m_pinned() == 0 ? implicit_euler_unconstrained(g, x0, h, cfg) : implicit_euler(g, x0, a, h, cfg);
  return decay_fit(run, a, h, cfg.p, atol);
}

double tail_oscillation(const Trajectory& run, double fraction) {
  if (run.size() == 0) throw std::invalid_argument("tail_oscillation: empty trajectory");
  const double t_end = run.times.back();
  const double t_start = t_end - fraction * (t_end - run.times.front());
  double osc = 0.0;
  for (std::size_t k = 0; k < run.size(); ++k) {
    if (run.times[k] >= t_start) osc = std::max(osc, (run.states[k] - run.states.back()).norm());
  }
  return osc;
}

double steady_residual(const Hypergraph& g, double p, const State& x, const Eigen::VectorXd& h_inf) {
  const auto n = static_cast<Eigen::Index>(g.n_free());
  CompositeObjective obj;
  obj.graph = &g;
  obj.p = p;
  obj.num_variable = g.n_free();
  obj.fixed = x;
  obj.alpha = Eigen::VectorXd::Zero(n);
  obj.center = Eigen::VectorXd::Zero(n);
  obj.linear = h_inf.head(n);
  return stationarity(obj, x, kDefaultTieTol).norm;
}

StationaryPoint omega_limit(const Trajectory& run, const Eigen::VectorXd& a_inf, const Eigen::VectorXd& h_inf,
                            const Hypergraph& g, double p, double tol) {
  if (a_inf.size() != static_cast<Eigen::Index>(g.m_pinned()) ||
      h_inf.size() != static_cast<Eigen::Index>(g.num_vertices())) {
    throw std::invalid_argument("omega_limit: dimension mismatch");
  }
  const double osc = tail_oscillation(run, 0.1);
  const State x_inf = project(run.states.back(), ConstraintSet{g.n_free(), a_inf});
  const double residual = steady_residual(g, p, x_inf, h_inf);
  if (osc > tol || residual > tol) throw NotConverged(osc, residual);
  StationaryPoint sp;
  sp.x_inf = x_inf;
  sp.phi_value = steady_functional(g, p, x_inf, h_inf);
  sp.stationarity_residual = residual;
  return sp;
}

YosidaStudy yosida_study(const Hypergraph& g, const State& x0, const Schedule& a, const Schedule& h,
                         const SolverConfig& cfg, std::vector<double> lambdas) {
  if (lambdas.empty()) throw std::invalid_argument("yosida_study: no lambda values");
  std::sort(lambdas.begin(), lambdas.end(), std::greater<>());
  auto reference = std::async(std::launch::async, [&] { return implicit_euler(g, x0, a, h, cfg); });
  std::vector<std::future<Trajectory>> runs;
  for (double lambda : lambdas) {
    SolverConfig c = cfg;
    c.lambda = lambda;
    runs.push_back(std::async(std::launch::async, [&g, &x0, &a, &h, c] { return yosida_trajectory(g, x0, a, h, c); }));
  }
  const Trajectory ref = reference.get();
  const auto m = static_cast<Eigen::Index>(g.m_pinned());

  YosidaStudy study;
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    const Trajectory run = runs[i].get();
    YosidaRow row;
    row.lambda = lambdas[i];
    for (std::size_t k = 0; k < run.size(); ++k) {
      const double dev = (run.states[k].tail(m) - a.value(run.times[k])).squaredNorm();
      row.pin_deviation_sq = std::max(row.pin_deviation_sq, dev);
    }
    row.pin_deviation = std::sqrt(row.pin_deviation_sq);
    row.c1 = row.pin_deviation_sq / row.lambda;
    row.distance = sup_distance(run, ref);
    if (!study.rows.empty()) {
      const YosidaRow& prev = study.rows.back();
      const double dl = std::log(row.lambda / prev.lambda);
      if (row.pin_deviation > 0.0 && prev.pin_deviation > 0.0) {
        row.deviation_order = std::log(row.pin_deviation / prev.pin_deviation) / dl;
      }
      if (row.distance > 0.0 && prev.distance > 0.0) {
        row.distance_order = std::log(row.distance / prev.distance) / dl;
      }
      if (row.distance > prev.distance) study.distance_monotone = false;
    }
    study.rows.push_back(row);
  }
  std::vector<double> lx, ly;
  for (const YosidaRow& row : study.rows) {
    if (row.pin_deviation > 0.0) {
      lx.push_back(std::log(row.lambda));
      ly.push_back(std::log(row.pin_deviation));
    }
  }
  study.deviation_slope = lx.size() >= 2 ? fit_line(lx, ly).slope : 0.0;
  return study;
}

std::string to_json(const DependenceReport& r) {
  json doc;
  doc["lhs"] = r.lhs;
  doc["rhs"] = r.rhs;
  doc["gamma_used"] = r.gamma_used;
  doc["initial_distance"] = r.initial_distance;
  doc["forcing_integral"] = r.forcing_integral;
  doc["pin_integral"] = r.pin_integral;
  doc["sup_norm_1"] = r.sup_norm_1;
  doc["sup_norm_2"] = r.sup_norm_2;
  doc["allowance"] = r.allowance;
  doc["holds"] = r.holds;
  return doc.dump(2);
}

std::string to_json(const DecayReport& r) {
  json doc;
  doc["regime"] = to_string(r.regime);
  doc["fitted_rate"] = r.fitted_rate;
  doc["extinction_time"] = optional_number(r.extinction_time);
  doc["gamma_fit"] = r.gamma_fit;
  doc["r_squared"] = r.r_squared;
  doc["initial_norm"] = r.initial_norm;
  doc["final_norm"] = r.final_norm;
  return doc.dump(2);
}

std::string yosida_csv(const YosidaStudy& study) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << std::setprecision(17);
  os << "lambda,pin_deviation,pin_deviation_sq,c1,distance,deviation_order,distance_order\n";
  for (const YosidaRow& row : study.rows) {
    os << row.lambda << ',' << row.pin_deviation << ',' << row.pin_deviation_sq << ',' << row.c1 << ','
       << row.distance << ',';
    if (row.deviation_order) os << *row.deviation_order;
    os << ',';
    if (row.distance_order) os << *row.distance_order;
    os << '\n';
  }
  return os.str();
}

}  // namespace hgflow
