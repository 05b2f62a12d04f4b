#pragma once

#include <stdexcept>
#include <string>

namespace sfgm {

enum class ErrorCode {
  NotPositiveDefinite,
  InvalidDegreesOfFreedom,
  EmptyInterval,
  InvalidParameter,
  InvalidOrder,
  RhoOutOfRange,
  NonSymmetricW,
  NotInCone,
  NoConvergence,
  NotDecomposable,
  EmptyTrace,
  NonIdentifiableGraph,
  NonIdentifiableStart,
  DimensionMismatch,
  ConfigError,
  DataFormatError,
  SchemaMismatch,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::InvalidDegreesOfFreedom: return "InvalidDegreesOfFreedom";
    case ErrorCode::EmptyInterval: return "EmptyInterval";
    case ErrorCode::InvalidParameter: return "InvalidParameter";
    case ErrorCode::InvalidOrder: return "InvalidOrder";
    case ErrorCode::RhoOutOfRange: return "RhoOutOfRange";
    case ErrorCode::NonSymmetricW: return "NonSymmetricW";
    case ErrorCode::NotInCone: return "NotInCone";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::NotDecomposable: return "NotDecomposable";
    case ErrorCode::EmptyTrace: return "EmptyTrace";
    case ErrorCode::NonIdentifiableGraph: return "NonIdentifiableGraph";
    case ErrorCode::NonIdentifiableStart: return "NonIdentifiableStart";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::DataFormatError: return "DataFormatError";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace sfgm
