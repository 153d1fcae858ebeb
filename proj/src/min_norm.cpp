#include "hgflow/min_norm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace hgflow {

namespace {

struct Atom {
  std::vector<std::size_t> choice;  // pair index per face
  Eigen::VectorXd point;
};

class Oracle {
 public:
  Oracle(const Eigen::VectorXd& offset, std::span<const EdgeFace> faces,
         std::span<const std::ptrdiff_t> coord)
      : offset_(offset), faces_(faces), coord_(coord) {}

  double component(const Eigen::VectorXd& x, VertexId v) const {
    const std::ptrdiff_t c = coord_[v];
    return c < 0 ? 0.0 : x[c];
  }

  // Vertex of the polytope minimizing x . s; ties keep the first pair.
  Atom minimize(const Eigen::VectorXd& x) const {
    Atom atom;
    atom.choice.resize(faces_.size());
    for (std::size_t f = 0; f < faces_.size(); ++f) {
      const auto& pairs = faces_[f].pairs;
      std::size_t best = 0;
      double best_val = component(x, pairs[0].first) - component(x, pairs[0].second);
      for (std::size_t k = 1; k < pairs.size(); ++k) {
        const double val = component(x, pairs[k].first) - component(x, pairs[k].second);
        if (val < best_val) {
          best_val = val;
          best = k;
        }
      }
      atom.choice[f] = best;
    }
    atom.point = realize(atom.choice);
    return atom;
  }

  Eigen::VectorXd realize(const std::vector<std::size_t>& choice) const {
    Eigen::VectorXd s = offset_;
    for (std::size_t f = 0; f < faces_.size(); ++f) {
      const auto [u, v] = faces_[f].pairs[choice[f]];
      if (u == v) continue;
      const double c = faces_[f].scale;
      if (coord_[u] >= 0) s[coord_[u]] += c;
      if (coord_[v] >= 0) s[coord_[v]] -= c;
    }
    return s;
  }

 private:
  const Eigen::VectorXd& offset_;
  std::span<const EdgeFace> faces_;
  std::span<const std::ptrdiff_t> coord_;
};

// Affine-hull minimizer: coefficients alpha (summing to one) of the
// minimum-norm point of aff{s_0, ..., s_{k-1}}.
Eigen::VectorXd affine_minimizer(const std::vector<Atom>& atoms) {
  const std::size_t k = atoms.size();
  Eigen::VectorXd alpha(static_cast<Eigen::Index>(k));
  if (k == 1) {
    alpha[0] = 1.0;
    return alpha;
  }
  const Eigen::Index d = atoms[0].point.size();
  Eigen::MatrixXd basis(d, static_cast<Eigen::Index>(k - 1));
  for (std::size_t i = 1; i < k; ++i) basis.col(static_cast<Eigen::Index>(i - 1)) = atoms[i].point - atoms[0].point;
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(basis);
  const Eigen::VectorXd beta = cod.solve(-atoms[0].point);
  alpha[0] = 1.0 - beta.sum();
  alpha.tail(static_cast<Eigen::Index>(k - 1)) = beta;
  return alpha;
}

Eigen::VectorXd combine(const std::vector<Atom>& atoms, const std::vector<double>& weights) {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(atoms[0].point.size());
  for (std::size_t i = 0; i < atoms.size(); ++i) x += weights[i] * atoms[i].point;
  return x;
}

}  // namespace

MinNormResult min_norm_point(const Eigen::VectorXd& offset, std::span<const EdgeFace> faces,
                             std::span<const std::ptrdiff_t> coord_of_vertex,
                             const MinNormOptions& options) {
  for (const auto& face : faces) {
    if (face.pairs.empty()) throw std::invalid_argument("min_norm_point: face without pairs");
  }
  const Oracle oracle(offset, faces, coord_of_vertex);
  constexpr double kPositive = 1e-13;

  std::vector<Atom> atoms{oracle.minimize(offset)};
  std::vector<double> weights{1.0};
  Eigen::VectorXd x = atoms[0].point;

  MinNormResult result;
  double last_norm2 = x.squaredNorm();
  // Gaps below this are rounding noise in x . q.
  double floor = 64.0 * std::numeric_limits<double>::epsilon() * last_norm2;
  std::size_t it = 0;
  for (; it < options.max_iterations; ++it) {
    if (std::sqrt(x.squaredNorm()) <= options.target_norm) {
      result.converged = true;
      break;
    }
    Atom q = oracle.minimize(x);
    floor = std::max(floor, 64.0 * std::numeric_limits<double>::epsilon() * q.point.squaredNorm());
    const double gap = x.squaredNorm() - x.dot(q.point);
    result.gap = gap;
    if (gap <= options.gap_tol) {
      result.converged = true;
      break;
    }
    const bool present = std::any_of(atoms.begin(), atoms.end(),
                                     [&](const Atom& a) { return a.choice == q.choice; });
    if (present) {
      // Rounding: the oracle returned a corral member, no further progress possible.
      result.converged = gap <= std::max(1e3 * options.gap_tol, floor);
      break;
    }
    atoms.push_back(std::move(q));
    weights.push_back(0.0);

    for (std::size_t minor = 0; minor < atoms.size() + 2; ++minor) {
      const Eigen::VectorXd alpha = affine_minimizer(atoms);
      bool interior = true;
      for (Eigen::Index i = 0; i < alpha.size(); ++i) interior = interior && alpha[i] > kPositive;
      if (interior) {
        for (std::size_t i = 0; i < atoms.size(); ++i) weights[i] = alpha[static_cast<Eigen::Index>(i)];
        break;
      }
      double theta = 1.0;
      for (std::size_t i = 0; i < atoms.size(); ++i) {
        const double a = alpha[static_cast<Eigen::Index>(i)];
        if (a <= kPositive && weights[i] - a > 0.0) theta = std::min(theta, weights[i] / (weights[i] - a));
      }
      theta = std::clamp(theta, 0.0, 1.0);
      for (std::size_t i = 0; i < atoms.size(); ++i) {
        weights[i] = theta * alpha[static_cast<Eigen::Index>(i)] + (1.0 - theta) * weights[i];
      }
      // Drop the atoms whose weight reached zero (at least one).
      std::size_t drop = 0;
      for (std::size_t i = 1; i < atoms.size(); ++i) {
        if (weights[i] < weights[drop]) drop = i;
      }
      std::vector<Atom> kept_atoms;
      std::vector<double> kept_weights;
      for (std::size_t i = 0; i < atoms.size(); ++i) {
        if (i == drop || weights[i] <= kPositive) continue;
        kept_atoms.push_back(std::move(atoms[i]));
        kept_weights.push_back(weights[i]);
      }
      if (kept_atoms.empty()) {
        kept_atoms.push_back(std::move(atoms[drop]));
        kept_weights.push_back(1.0);
      }
      atoms = std::move(kept_atoms);
      weights = std::move(kept_weights);
      const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
      for (double& w : weights) w /= total;
    }
    x = combine(atoms, weights);
    const double norm2 = x.squaredNorm();
    if (!(norm2 < last_norm2) && norm2 > options.target_norm * options.target_norm) {
      // No strict decrease: stagnation at rounding level.
      result.converged = result.gap <= std::max(1e3 * options.gap_tol, floor);
      ++it;
      break;
    }
    last_norm2 = norm2;
  }

  result.point = x;
  result.norm = x.norm();
  result.iterations = it;
  result.coefficients.resize(faces.size());
  for (std::size_t f = 0; f < faces.size(); ++f) result.coefficients[f].assign(faces[f].pairs.size(), 0.0);
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    for (std::size_t f = 0; f < faces.size(); ++f) result.coefficients[f][atoms[i].choice[f]] += weights[i];
  }
  return result;
}

}  // namespace hgflow
