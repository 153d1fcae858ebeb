#include "hgflow/errors.hpp"

#include <sstream>

namespace hgflow {

const char* to_string(ValidationCode code) {
  switch (code) {
    case ValidationCode::EmptyEdge: return "EmptyEdge";
    case ValidationCode::SingletonEdge: return "SingletonEdge";
    case ValidationCode::NonPositiveWeight: return "NonPositiveWeight";
    case ValidationCode::IndexOutOfRange: return "IndexOutOfRange";
    case ValidationCode::DuplicateVertexInEdge: return "DuplicateVertexInEdge";
    case ValidationCode::NoPinnedVertex: return "NoPinnedVertex";
    case ValidationCode::WeightCountMismatch: return "WeightCountMismatch";
  }
  return "Unknown";
}

namespace {

std::string format_double(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

std::string validation_message(ValidationCode code, std::size_t edge, const std::string& detail) {
  std::ostringstream os;
  os << to_string(code);
  if (edge != ValidationError::npos) os << " (edge " << edge << ")";
  if (!detail.empty()) os << ": " << detail;
  return os.str();
}

}  // namespace

ValidationError::ValidationError(ValidationCode code, std::size_t edge, const std::string& detail)
    : Error(validation_message(code, edge, detail)), code_(code), edge_(edge) {}

OutOfRange::OutOfRange(double t)
    : Error("time " + std::to_string(t) + " outside schedule domain"), t_(t) {}

NoConvergence::NoConvergence(const std::string& what, double residual, std::size_t iterations)
    : Error(what + ": residual " + format_double(residual) + " after " +
            std::to_string(iterations) + " iterations"),
      residual_(residual),
      iterations_(iterations) {}

NotConverged::NotConverged(double tail_oscillation, double residual)
    : Error("trajectory tail not converged: oscillation " + format_double(tail_oscillation) +
            ", stationarity residual " + format_double(residual)),
      tail_oscillation_(tail_oscillation),
      residual_(residual) {}

}  // namespace hgflow
