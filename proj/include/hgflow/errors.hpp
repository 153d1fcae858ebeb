#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hgflow {

/// Root of the library's exception hierarchy.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ValidationCode {
  EmptyEdge,
  SingletonEdge,
  NonPositiveWeight,
  IndexOutOfRange,
  DuplicateVertexInEdge,
  NoPinnedVertex,
  WeightCountMismatch,
};

const char* to_string(ValidationCode code);

/// A hypergraph invariant does not hold. `edge()` names the offending edge
/// (or npos when the failure is not tied to an edge).
class ValidationError : public Error {
 public:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  ValidationError(ValidationCode code, std::size_t edge, const std::string& detail);

  ValidationCode code() const noexcept { return code_; }
  std::size_t edge() const noexcept { return edge_; }

 private:
  ValidationCode code_;
  std::size_t edge_;
};

/// Malformed input document (JSON syntax, missing field, wrong type).
class ParseError : public Error {
 public:
  using Error::Error;
};

class DisconnectedGraph : public Error {
 public:
  using Error::Error;
};

class ConstraintViolated : public Error {
 public:
  using Error::Error;
};

class InitialStateNotAdmissible : public Error {
 public:
  using Error::Error;
};

class OutOfRange : public Error {
 public:
  explicit OutOfRange(double t);
  double time() const noexcept { return t_; }

 private:
  double t_;
};

/// An iterative solver did not reach its tolerance within the iteration cap.
class NoConvergence : public Error {
 public:
  NoConvergence(const std::string& what, double residual, std::size_t iterations);
  double residual() const noexcept { return residual_; }
  std::size_t iterations() const noexcept { return iterations_; }

 private:
  double residual_;
  std::size_t iterations_;
};

class NotALinearCase : public Error {
 public:
  using Error::Error;
};

class GridMismatch : public Error {
 public:
  using Error::Error;
};

class NonZeroData : public Error {
 public:
  using Error::Error;
};

class NotConverged : public Error {
 public:
  NotConverged(double tail_oscillation, double residual);
  double tail_oscillation() const noexcept { return tail_oscillation_; }
  double residual() const noexcept { return residual_; }

 private:
  double tail_oscillation_;
  double residual_;
};

}  // namespace hgflow
