#pragma once

#include <stdexcept>
#include <string>

namespace hhemb {

enum class ErrorCode {
  NotSymmetric,
  NoConvergence,
  NotPositiveDefinite,
  Singular,
  ZeroColumn,
  BadPartition,
  SingularCoupling,
  DegenerateSingularValue,
  DimensionMismatch,
  BadPotentialLength,
  FermiDegeneracy,
  ParseError,
  InconsistentHeader,
  ScfNoConvergence,
  NonIdempotentSource,
  Overflow,
  RootBracketFailure,
  PartitionNotTiling,
};

const char* error_name(ErrorCode code);

// Numerical failures exit with 2; a violated invariant exits with 3.
bool is_invariant_violation(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& what);

}  // namespace hhemb
