#include "hgflow/minimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>

#include "hgflow/errors.hpp"

namespace hgflow {

namespace {

std::vector<std::ptrdiff_t> prefix_coordinates(std::size_t num_vertices, std::size_t num_variable) {
  std::vector<std::ptrdiff_t> coord(num_vertices, -1);
  for (std::size_t v = 0; v < num_variable; ++v) coord[v] = static_cast<std::ptrdiff_t>(v);
  return coord;
}

// Exact (tie tolerance 0) directional slope of the objective at x along the
// variable-space direction d, using the averaged argmax selection.
double directional_slope(const CompositeObjective& obj, const State& x, const Eigen::VectorXd& d) {
  const auto k = static_cast<Eigen::Index>(obj.num_variable);
  double slope = (obj.alpha.cwiseProduct(x.head(k) - obj.center) - obj.linear).dot(d);
  const Hypergraph& g = *obj.graph;
  auto dir = [&](VertexId v) { return v < obj.num_variable ? d[static_cast<Eigen::Index>(v)] : 0.0; };
  for (std::size_t e = 0; e < g.num_edges(); ++e) {
    const Edge& edge = g.edge(e);
    double hi = -std::numeric_limits<double>::infinity();
    double lo = std::numeric_limits<double>::infinity();
    for (VertexId v : edge) {
      hi = std::max(hi, x[static_cast<Eigen::Index>(v)]);
      lo = std::min(lo, x[static_cast<Eigen::Index>(v)]);
    }
    const double scale = edge_face_scale(g, obj.p, e, hi - lo);
    if (scale == 0.0) continue;
    double top = 0.0, bottom = 0.0;
    int n_top = 0, n_bottom = 0;
    for (VertexId v : edge) {
      const double xv = x[static_cast<Eigen::Index>(v)];
      if (xv == hi) {
        top += dir(v);
        ++n_top;
      }
      if (xv == lo) {
        bottom += dir(v);
        ++n_bottom;
      }
    }
    slope += scale * (top / n_top - bottom / n_bottom);
  }
  return slope;
}

struct LineSearchResult {
  double step = 0.0;
  double value = 0.0;
};

// Minimizes the convex function s -> F(y + s d), s >= 0, by doubling and then
// bisection on the sign of a subgradient.
LineSearchResult line_search(const CompositeObjective& obj, const Eigen::VectorXd& y,
                             const Eigen::VectorXd& d, double guess, double f0) {
  auto point = [&](double s) { return obj.assemble(y + s * d); };
  auto slope = [&](double s) { return directional_slope(obj, point(s), d); };

  double lo = 0.0;
  double hi = guess;
  int doublings = 0;
  while (slope(hi) < 0.0) {
    lo = hi;
    hi *= 2.0;
    if (++doublings > 200 || !std::isfinite(hi)) {
      throw NoConvergence("line search: objective unbounded below along descent direction",
                          std::numeric_limits<double>::infinity(), static_cast<std::size_t>(doublings));
    }
  }
  for (int it = 0; it < 200 && hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (slope(mid) < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  // slope(lo) < 0 places lo before the minimizer, so psi(lo) <= psi(0) even
  // when rounding hides the decrease in the function values.
  LineSearchResult best{0.0, f0};
  if (lo > 0.0) best = {lo, obj.value(point(lo))};
  const double f_hi = obj.value(point(hi));
  if (f_hi < std::min(best.value, f0)) best = {hi, f_hi};
  return best;
}

// Newton iteration on the manifold where the near-ties of x (within the
// relative tolerance `tie`) hold exactly: tied vertices are merged into one
// unknown, each edge's spread becomes the difference of two cluster values and
// the objective is smooth there. Returns nullopt when the structure is
// inconsistent or the reduced Hessian is singular.
std::optional<State> newton_polish(const CompositeObjective& obj, const State& x, double tie) {
  const Hypergraph& g = *obj.graph;
  const std::size_t nv = g.num_vertices();
  std::vector<std::size_t> parent(nv);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };
  auto unite = [&](std::size_t a, std::size_t b) { parent[find(a)] = find(b); };

  std::vector<VertexId> top(g.num_edges()), bottom(g.num_edges());
  for (std::size_t e = 0; e < g.num_edges(); ++e) {
    const Edge& edge = g.edge(e);
    VertexId vh = edge.front(), vl = edge.front();
    for (VertexId v : edge) {
      if (x[static_cast<Eigen::Index>(v)] > x[static_cast<Eigen::Index>(vh)]) vh = v;
      if (x[static_cast<Eigen::Index>(v)] < x[static_cast<Eigen::Index>(vl)]) vl = v;
    }
    const double hi = x[static_cast<Eigen::Index>(vh)];
    const double lo = x[static_cast<Eigen::Index>(vl)];
    const double band = tie * (hi - lo + 1.0);
    top[e] = vh;
    bottom[e] = vl;
    for (VertexId v : edge) {
      const double xv = x[static_cast<Eigen::Index>(v)];
      if (xv >= hi - band) unite(v, vh);
      if (xv <= lo + band) unite(v, vl);
    }
  }

  // Cluster numbering; clusters holding a fixed coordinate are not unknowns.
  std::vector<std::ptrdiff_t> cluster_of(nv, -1);
  std::vector<std::size_t> roots;
  for (std::size_t v = 0; v < nv; ++v) {
    const std::size_t r = find(v);
    if (cluster_of[r] < 0) {
      cluster_of[r] = static_cast<std::ptrdiff_t>(roots.size());
      roots.push_back(r);
    }
    cluster_of[v] = cluster_of[r];
  }
  const std::size_t nc = roots.size();
  std::vector<bool> fixed(nc, false);
  Eigen::VectorXd z = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(nc));
  Eigen::VectorXd count = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(nc));
  for (std::size_t v = 0; v < nv; ++v) {
    const auto c = static_cast<Eigen::Index>(cluster_of[v]);
    const double xv = x[static_cast<Eigen::Index>(v)];
    if (v >= obj.num_variable) {
      if (fixed[static_cast<std::size_t>(c)] && z[c] != xv) return std::nullopt;
      fixed[static_cast<std::size_t>(c)] = true;
      z[c] = xv;
      count[c] = 1.0;
    } else if (!fixed[static_cast<std::size_t>(c)]) {
      z[c] += xv;
      count[c] += 1.0;
    }
  }
  for (std::size_t c = 0; c < nc; ++c) {
    if (!fixed[c]) z[static_cast<Eigen::Index>(c)] /= count[static_cast<Eigen::Index>(c)];
  }
  std::vector<std::ptrdiff_t> unknown(nc, -1);
  std::size_t nu = 0;
  for (std::size_t c = 0; c < nc; ++c) {
    if (!fixed[c]) unknown[c] = static_cast<std::ptrdiff_t>(nu++);
  }
  if (nu == 0) return std::nullopt;

  auto expand = [&](const Eigen::VectorXd& zc) {
    State out = x;
    for (std::size_t v = 0; v < nv; ++v) out[static_cast<Eigen::Index>(v)] = zc[cluster_of[v]];
    return out;
  };

  const double p = obj.p;
  for (int iter = 0; iter < 50; ++iter) {
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(nu));
    Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(nu), static_cast<Eigen::Index>(nu));
    for (std::size_t v = 0; v < obj.num_variable; ++v) {
      const std::ptrdiff_t u = unknown[static_cast<std::size_t>(cluster_of[v])];
      if (u < 0) continue;
      const auto i = static_cast<Eigen::Index>(v);
      grad[u] += obj.alpha[i] * (z[cluster_of[v]] - obj.center[i]) - obj.linear[i];
      hess(u, u) += obj.alpha[i];
    }
    for (std::size_t e = 0; e < g.num_edges(); ++e) {
      const std::ptrdiff_t ct = cluster_of[top[e]];
      const std::ptrdiff_t cb = cluster_of[bottom[e]];
      if (ct == cb) continue;
      const double spread = z[ct] - z[cb];
      if (!(spread > 0.0)) return std::nullopt;
      const double d1 = g.weight(e) * (p == 1.0 ? 1.0 : std::pow(spread, p - 1.0));
      const double d2 = p == 1.0 ? 0.0 : g.weight(e) * (p - 1.0) * std::pow(spread, p - 2.0);
      const std::ptrdiff_t ut = unknown[static_cast<std::size_t>(ct)];
      const std::ptrdiff_t ub = unknown[static_cast<std::size_t>(cb)];
      if (ut >= 0) grad[ut] += d1;
      if (ub >= 0) grad[ub] -= d1;
      if (ut >= 0) hess(ut, ut) += d2;
      if (ub >= 0) hess(ub, ub) += d2;
      if (ut >= 0 && ub >= 0) {
        hess(ut, ub) -= d2;
        hess(ub, ut) -= d2;
      }
    }
    Eigen::LDLT<Eigen::MatrixXd> ldlt(hess);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
        ldlt.vectorD().minCoeff() <= 1e-14 * std::max(1.0, ldlt.vectorD().maxCoeff())) {
      return std::nullopt;
    }
    const Eigen::VectorXd step = ldlt.solve(grad);
    if (!step.allFinite()) return std::nullopt;
    // Damped step keeping every edge's spread positive.
    double t = 1.0;
    for (int k = 0; k < 60; ++k) {
      Eigen::VectorXd trial = z;
      for (std::size_t c = 0; c < nc; ++c) {
        if (unknown[c] >= 0) trial[static_cast<Eigen::Index>(c)] -= t * step[unknown[c]];
      }
      bool ok = true;
      for (std::size_t e = 0; e < g.num_edges() && ok; ++e) {
        const std::ptrdiff_t ct = cluster_of[top[e]];
        const std::ptrdiff_t cb = cluster_of[bottom[e]];
        ok = ct == cb || trial[ct] - trial[cb] > 0.0;
      }
      if (ok) {
        z = std::move(trial);
        break;
      }
      t *= 0.5;
    }
    if (t * step.lpNorm<Eigen::Infinity>() <= 1e-15 * (1.0 + z.lpNorm<Eigen::Infinity>())) break;
  }
  return expand(z);
}

}  // namespace

double CompositeObjective::value(const State& x) const {
  const auto k = static_cast<Eigen::Index>(num_variable);
  const Eigen::VectorXd y = x.head(k);
  return energy(*graph, p, x) + 0.5 * alpha.dot((y - center).cwiseAbs2()) - linear.dot(y);
}

State CompositeObjective::assemble(const Eigen::VectorXd& y) const {
  State x = fixed;
  x.head(y.size()) = y;
  return x;
}

Stationarity stationarity(const CompositeObjective& obj, const State& x, double tie_tol,
                          double target_norm) {
  const Hypergraph& g = *obj.graph;
  const auto k = static_cast<Eigen::Index>(obj.num_variable);
  const auto faces = subdifferential_faces(g, obj.p, x, tie_tol);
  const auto coord = prefix_coordinates(g.num_vertices(), obj.num_variable);
  const Eigen::VectorXd offset = obj.alpha.cwiseProduct(x.head(k) - obj.center) - obj.linear;

  double magnitude = offset.norm();
  for (const auto& face : faces) magnitude += std::sqrt(2.0) * face.scale;
  MinNormOptions options;
  options.gap_tol = std::pow(1e-15 * magnitude, 2);
  options.target_norm = target_norm;
  const auto mn = min_norm_point(offset, faces, coord, options);

  Stationarity st;
  st.residual = mn.point;
  st.norm = mn.norm;
  st.eta.eta = Eigen::VectorXd::Zero(x.size());
  st.eta.pairs.resize(faces.size());
  st.eta.coefficients = mn.coefficients;
  for (std::size_t e = 0; e < faces.size(); ++e) {
    st.eta.pairs[e] = faces[e].pairs;
    for (std::size_t j = 0; j < faces[e].pairs.size(); ++j) {
      const auto [u, v] = faces[e].pairs[j];
      const double c = faces[e].scale * mn.coefficients[e][j];
      st.eta.eta[static_cast<Eigen::Index>(u)] += c;
      st.eta.eta[static_cast<Eigen::Index>(v)] -= c;
    }
  }
  return st;
}

MinimizerResult minimize(const CompositeObjective& obj, const Eigen::VectorXd& start,
                         const MinimizerOptions& options) {
  if (obj.graph == nullptr) throw std::invalid_argument("minimize: objective without graph");
  const auto k = static_cast<Eigen::Index>(obj.num_variable);
  if (start.size() != k || obj.alpha.size() != k || obj.center.size() != k || obj.linear.size() != k) {
    throw std::invalid_argument("minimize: dimension mismatch");
  }

  Eigen::VectorXd y = start;
  State x = obj.assemble(y);
  double f = obj.value(x);
  double eps = std::max(1e-3, options.tie_tol);
  double step_guess = obj.alpha.size() > 0 && obj.alpha.maxCoeff() > 0.0 ? 1.0 / obj.alpha.maxCoeff() : 1.0;

  MinimizerResult result;
  for (std::size_t it = 0; it < options.max_iterations; ++it) {
    Stationarity cert = stationarity(obj, x, options.tie_tol);
    if (cert.norm <= options.tol || k == 0) {
      result.x = x;
      result.certificate = std::move(cert);
      result.iterations = it;
      return result;
    }

    if (auto polished = newton_polish(obj, x, eps)) {
      const double f_new = obj.value(*polished);
      if (f_new <= f + 1e-13 * (1.0 + std::abs(f))) {
        Stationarity pc = stationarity(obj, *polished, options.tie_tol);
        if (pc.norm < cert.norm) {
          y = polished->head(k);
          x = std::move(*polished);
          f = f_new;
          if (pc.norm <= options.tol) {
            result.x = x;
            result.certificate = std::move(pc);
            result.iterations = it + 1;
            return result;
          }
          cert = std::move(pc);
        }
      }
    }

    // Direction from an enlarged subdifferential; shrink the enlargement
    // while it swallows most of the certificate's norm.
    Eigen::VectorXd direction;
    while (true) {
      if (eps <= options.tie_tol) {
        eps = options.tie_tol;
        direction = -cert.residual;
        break;
      }
      const Stationarity wide = stationarity(obj, x, eps);
      if (wide.norm >= 1e-2 * cert.norm) {
        direction = -wide.residual;
        break;
      }
      eps *= 0.1;
    }

    const LineSearchResult ls = line_search(obj, y, direction, step_guess, f);
    const Eigen::VectorXd y_next = y + ls.step * direction;
    if (ls.step > 0.0 && y_next != y) {
      y = y_next;
      x = obj.assemble(y);
      f = ls.value;
      step_guess = ls.step;
    } else if (eps > options.tie_tol) {
      eps = std::max(0.1 * eps, options.tie_tol);
    } else {
      throw NoConvergence("minimize: no descent at the certificate tolerance", cert.norm, it);
    }
  }
  const Stationarity cert = stationarity(obj, x, options.tie_tol);
  throw NoConvergence("minimize: iteration cap reached", cert.norm, options.max_iterations);
}

}  // namespace hgflow
