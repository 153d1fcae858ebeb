#include "hgflow/constraint.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "hgflow/errors.hpp"

namespace hgflow {

using json = nlohmann::json;

Schedule::Schedule(std::vector<double> times, std::vector<Eigen::VectorXd> values)
    : times_(std::move(times)), values_(std::move(values)) {
  if (times_.empty() || times_.size() != values_.size()) {
    throw std::invalid_argument("schedule: need one value per knot and at least one knot");
  }
  if (times_.front() != 0.0) throw std::invalid_argument("schedule: first knot must be 0");
  for (std::size_t i = 1; i < times_.size(); ++i) {
    if (!(times_[i] > times_[i - 1])) {
      throw std::invalid_argument("schedule: knots must be strictly increasing");
    }
  }
  dim_ = static_cast<std::size_t>(values_.front().size());
  for (const auto& v : values_) {
    if (static_cast<std::size_t>(v.size()) != dim_) {
      throw std::invalid_argument("schedule: samples differ in length");
    }
    if (!v.allFinite()) throw std::invalid_argument("schedule: non-finite sample");
  }
}

Schedule Schedule::constant(const Eigen::VectorXd& value) { return Schedule({0.0}, {value}); }

double Schedule::horizon() const noexcept {
  return is_constant() ? std::numeric_limits<double>::infinity() : times_.back();
}

std::size_t Schedule::segment(double t) const {
  if (!(t >= 0.0) || t > horizon()) throw OutOfRange(t);
  // Index i of the segment [t_i, t_{i+1}) containing t; the last knot maps
  // to the final segment.
  const auto it = std::upper_bound(times_.begin(), times_.end(), t);
  std::size_t i = static_cast<std::size_t>(it - times_.begin()) - 1;
  return std::min(i, times_.size() - 2);
}

Eigen::VectorXd Schedule::value(double t) const {
  if (is_constant()) {
    if (!(t >= 0.0)) throw OutOfRange(t);
    return values_.front();
  }
  const std::size_t i = segment(t);
  const double s = (t - times_[i]) / (times_[i + 1] - times_[i]);
  return (1.0 - s) * values_[i] + s * values_[i + 1];
}

Eigen::VectorXd Schedule::derivative(double t) const {
  if (is_constant()) {
    if (!(t >= 0.0)) throw OutOfRange(t);
    return Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim_));
  }
  const std::size_t i = segment(t);
  return (values_[i + 1] - values_[i]) / (times_[i + 1] - times_[i]);
}

bool Schedule::is_identically_zero() const {
  return std::all_of(values_.begin(), values_.end(), [](const Eigen::VectorXd& v) { return v.isZero(0.0); });
}

Schedule load_schedule(std::string_view text, std::size_t expected_dim) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& err) {
    const std::size_t offset = std::min<std::size_t>(err.byte, text.size());
    const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n');
    throw ParseError("line " + std::to_string(line) + ": " + err.what());
  }
  if (!doc.is_object() || !doc.contains("times") || !doc.contains("values")) {
    throw ParseError("schedule: expected {\"times\": [...], \"values\": [[...], ...]}");
  }
  const json& times_json = doc.at("times");
  const json& values_json = doc.at("values");
  if (!times_json.is_array() || !values_json.is_array()) {
    throw ParseError("schedule: \"times\" and \"values\" must be arrays");
  }
  if (times_json.size() != values_json.size()) {
    throw ParseError("schedule: " + std::to_string(times_json.size()) + " times but " +
                     std::to_string(values_json.size()) + " value rows");
  }
  std::vector<double> times;
  std::vector<Eigen::VectorXd> values;
  for (std::size_t i = 0; i < times_json.size(); ++i) {
    if (!times_json[i].is_number()) throw ParseError("times[" + std::to_string(i) + "]: expected a number");
    times.push_back(times_json[i].get<double>());
    const json& row = values_json[i];
    if (!row.is_array() || row.size() != expected_dim) {
      throw ParseError("values[" + std::to_string(i) + "]: expected an array of length " +
                       std::to_string(expected_dim));
    }
    Eigen::VectorXd v(static_cast<Eigen::Index>(expected_dim));
    for (std::size_t j = 0; j < expected_dim; ++j) {
      if (!row[j].is_number()) {
        throw ParseError("values[" + std::to_string(i) + "][" + std::to_string(j) + "]: expected a number");
      }
      v[static_cast<Eigen::Index>(j)] = row[j].get<double>();
    }
    values.push_back(std::move(v));
  }
  try {
    return Schedule(std::move(times), std::move(values));
  } catch (const std::invalid_argument& err) {
    throw ParseError(err.what());
  }
}

Schedule load_schedule_file(const std::string& path, std::size_t expected_dim) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open file");
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return load_schedule(buf.str(), expected_dim);
  } catch (const ParseError& err) {
    throw ParseError(path + ": " + err.what());
  }
}

std::string save_schedule(const Schedule& s) {
  json doc;
  doc["times"] = s.times();
  json rows = json::array();
  for (const auto& v : s.values()) rows.push_back(std::vector<double>(v.data(), v.data() + v.size()));
  doc["values"] = std::move(rows);
  return doc.dump();
}

bool ConstraintSet::contains(const State& x, double tol) const {
  const auto n = static_cast<Eigen::Index>(n_free);
  if (x.size() != n + a_values.size()) return false;
  return (x.tail(a_values.size()) - a_values).cwiseAbs().maxCoeff() <= tol || a_values.size() == 0;
}

ConstraintSet constraint_at(const Hypergraph& g, const Schedule& a, double t) {
  if (a.dim() != g.m_pinned()) throw std::invalid_argument("pinned schedule dimension differs from m");
  return ConstraintSet{g.n_free(), a.value(t)};
}

State project(const State& x, const ConstraintSet& k) {
  State y = x;
  y.tail(k.a_values.size()) = k.a_values;
  return y;
}

State lift(const Eigen::VectorXd& free, const ConstraintSet& k) {
  State x(free.size() + k.a_values.size());
  x << free, k.a_values;
  return x;
}

Eigen::VectorXd reduce(const State& x, std::size_t n_free) {
  return x.head(static_cast<Eigen::Index>(n_free));
}

Eigen::VectorXd embed_pinned(const Eigen::VectorXd& a_values, std::size_t n_free) {
  Eigen::VectorXd full = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_free) + a_values.size());
  full.tail(a_values.size()) = a_values;
  return full;
}

}  // namespace hgflow
