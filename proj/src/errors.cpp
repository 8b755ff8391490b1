#include "sovchain/errors.hpp"

namespace sovchain {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ZeroPolynomial: return "ZeroPolynomial";
    case ErrorKind::ConstantPolynomial: return "ConstantPolynomial";
    case ErrorKind::PoleEvaluation: return "PoleEvaluation";
    case ErrorKind::CoincidingSpectralParameters: return "CoincidingSpectralParameters";
    case ErrorKind::InvalidSpec: return "InvalidSpec";
    case ErrorKind::DegenerateTwistRow: return "DegenerateTwistRow";
    case ErrorKind::DegenerateDegree: return "DegenerateDegree";
    case ErrorKind::ClusteredRoots: return "ClusteredRoots";
    case ErrorKind::StepFailure: return "StepFailure";
    case ErrorKind::SingularityEncountered: return "SingularityEncountered";
    case ErrorKind::LogBranchAmbiguity: return "LogBranchAmbiguity";
    case ErrorKind::CoincidentRoots: return "CoincidentRoots";
    case ErrorKind::PoleCollision: return "PoleCollision";
    case ErrorKind::ZeroDenominator: return "ZeroDenominator";
    case ErrorKind::ZeroOffDiagonal: return "ZeroOffDiagonal";
    case ErrorKind::BranchAmbiguity: return "BranchAmbiguity";
    case ErrorKind::ConfigInvalid: return "ConfigInvalid";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& detail)
    : std::runtime_error(std::string(to_string(kind)) + ": " + detail), kind_(kind) {}

}  // namespace sovchain
