#pragma once

#include <stdexcept>
#include <string>

namespace cflow {

enum class ErrorKind {
  DimensionMismatch,
  SingularMatrix,
  ZeroEigenvalue,
  NonConvergence,
  AmbiguousRank,
  RelationInvalid,
  NotJordanForm,
  NonFinite,
  InvalidArgument,
};

const char* to_string(ErrorKind kind) noexcept;

/// Every failure raised by the library carries one of the kinds above so
/// callers (the CLI in particular) can map it onto a stable exit status.
class FlowError : public std::runtime_error {
 public:
  FlowError(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace cflow
