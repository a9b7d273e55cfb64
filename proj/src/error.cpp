#include "hhemb/error.hpp"

namespace hhemb {

const char* error_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotSymmetric: return "NotSymmetric";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::Singular: return "Singular";
    case ErrorCode::ZeroColumn: return "ZeroColumn";
    case ErrorCode::BadPartition: return "BadPartition";
    case ErrorCode::SingularCoupling: return "SingularCoupling";
    case ErrorCode::DegenerateSingularValue: return "DegenerateSingularValue";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::BadPotentialLength: return "BadPotentialLength";
    case ErrorCode::FermiDegeneracy: return "FermiDegeneracy";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::InconsistentHeader: return "InconsistentHeader";
    case ErrorCode::ScfNoConvergence: return "ScfNoConvergence";
    case ErrorCode::NonIdempotentSource: return "NonIdempotentSource";
    case ErrorCode::Overflow: return "Overflow";
    case ErrorCode::RootBracketFailure: return "RootBracketFailure";
    case ErrorCode::PartitionNotTiling: return "PartitionNotTiling";
  }
  return "Unknown";
}

bool is_invariant_violation(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotSymmetric:
    case ErrorCode::NonIdempotentSource:
    case ErrorCode::PartitionNotTiling:
    case ErrorCode::DimensionMismatch:
    case ErrorCode::BadPartition:
      return true;
    default:
      return false;
  }
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(error_name(code)) + ": " + what), code_(code) {}

void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace hhemb
