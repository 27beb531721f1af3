#pragma once

#include <stdexcept>
#include <string>

namespace rigidgrasp {

enum class ErrorKind {
  InvalidArgument,
  NotAntisymmetric,
  ZeroVector,
  DimensionMismatch,
  CoincidentNodes,
  DegenerateConfiguration,
  SingularInertia,
  RankDeficientGrasp,
  NonSPD,
  ConstraintViolation,
  NotARightInverse,
  SingularScaling,
  EulerRateSingularity,
  AntipodalOrientation,
  DesiredInternalForceNotInternal,
  ConfigError,
  NumericFailure,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::NotAntisymmetric: return "NotAntisymmetric";
    case ErrorKind::ZeroVector: return "ZeroVector";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::CoincidentNodes: return "CoincidentNodes";
    case ErrorKind::DegenerateConfiguration: return "DegenerateConfiguration";
    case ErrorKind::SingularInertia: return "SingularInertia";
    case ErrorKind::RankDeficientGrasp: return "RankDeficientGrasp";
    case ErrorKind::NonSPD: return "NonSPD";
    case ErrorKind::ConstraintViolation: return "ConstraintViolation";
    case ErrorKind::NotARightInverse: return "NotARightInverse";
    case ErrorKind::SingularScaling: return "SingularScaling";
    case ErrorKind::EulerRateSingularity: return "EulerRateSingularity";
    case ErrorKind::AntipodalOrientation: return "AntipodalOrientation";
    case ErrorKind::DesiredInternalForceNotInternal: return "DesiredInternalForceNotInternal";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::NumericFailure: return "NumericFailure";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the kinds above.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace rigidgrasp
