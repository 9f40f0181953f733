#pragma once

#include <stdexcept>
#include <string>

namespace isozero {

enum class ErrorKind {
  InvalidArgument,
  DimensionMismatch,
  UnsupportedDimension,
  ParseError,
  ZeroOnSphere,
  MeshTooCoarse,
  NoCertificate,
  CycleObstruction,
  InconsistentLift,
  NotConstructive,
  RadiusOutOfDomain,
  EvaluationAtCenter,
  ZeroDetected,
  HomotopyDomainMismatch,
  SupNormTooLarge,
  DegreeExhausted,
  ShellBoundViolated,
  TimeOutOfRange,
  DegreeTooLow,
  IngredientMismatch,
  NonIsolatedComplexZero,
  EvalTooCloseToBoundary,
  AngleBudgetExceeded,
  NoConvergence,
  MultiplierUnderflow,
  ThetaUnbounded,
};

const char* toString(ErrorKind kind);

/// Exception carrying a machine-readable kind. `detail()` holds an optional
/// integer payload, e.g. the winding number for CycleObstruction.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what, long detail = 0)
      : std::runtime_error(std::string(toString(kind)) + ": " + what),
        kind_(kind),
        detail_(detail) {}

  ErrorKind kind() const noexcept { return kind_; }
  long detail() const noexcept { return detail_; }

 private:
  ErrorKind kind_;
  long detail_;
};

}  // namespace isozero
