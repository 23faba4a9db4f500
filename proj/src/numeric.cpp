#include "cflow/numeric.hpp"

#include <cmath>

namespace cflow {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::DimensionMismatch: return "dimension mismatch";
    case ErrorKind::SingularMatrix: return "singular matrix";
    case ErrorKind::ZeroEigenvalue: return "zero eigenvalue";
    case ErrorKind::NonConvergence: return "non-convergence";
    case ErrorKind::AmbiguousRank: return "ambiguous rank decision";
    case ErrorKind::RelationInvalid: return "relation invalid";
    case ErrorKind::NotJordanForm: return "not in Jordan form";
    case ErrorKind::NonFinite: return "non-finite value";
    case ErrorKind::InvalidArgument: return "invalid argument";
  }
  return "unknown";
}

void ToleranceConfig::validate() const {
  const auto check = [](double v, const char* name) {
    if (!std::isfinite(v) || v <= 0)
      throw FlowError(ErrorKind::InvalidArgument,
                      std::string("tolerance ") + name + " must be finite and positive");
  };
  check(rank_tol, "rank_tol");
  check(root_tol, "root_tol");
  check(cluster_tol, "cluster_tol");
  check(residual_tol, "residual_tol");
  check(cond_warn, "cond_warn");
  check(multiplicity_tol, "multiplicity_tol");
}

}  // namespace cflow
