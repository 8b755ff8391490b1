#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sovchain {

enum class ErrorKind {
  ZeroPolynomial,
  ConstantPolynomial,
  PoleEvaluation,
  CoincidingSpectralParameters,
  InvalidSpec,
  DegenerateTwistRow,
  DegenerateDegree,
  ClusteredRoots,
  StepFailure,
  SingularityEncountered,
  LogBranchAmbiguity,
  CoincidentRoots,
  PoleCollision,
  ZeroDenominator,
  ZeroOffDiagonal,
  BranchAmbiguity,
  ConfigInvalid,
};

std::string_view to_string(ErrorKind kind);

// Every failure the library raises carries a machine-readable kind; the CLI
// serializes kind() into the "error" field of its JSON output.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& detail);
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace sovchain
