// Error codes and the exception type shared by all modules.
#pragma once

#include <stdexcept>
#include <string>

namespace weakring {

enum class Err {
  PrecisionInsufficient,
  RoundingAmbiguous,
  RepeatedRootSuspected,
  PowerIterationDiverged,
  SetTooLarge,
  AttackInfeasible,
  SampleVariantMismatch,
  NotCoprime,
  DoesNotSplit,
  DegreeMismatch,
  FactorizationUnavailable,
  FactoringBudgetExceeded,
  ModulusTooLargeForOrderComputation,
  SchemaViolation,
  IoFailure,
};

const char* err_name(Err e);

class Error : public std::runtime_error {
 public:
  Error(Err code, const std::string& what)
      : std::runtime_error(std::string(err_name(code)) + ": " + what), code_(code) {}
  Err code() const { return code_; }

 private:
  Err code_;
};

}  // namespace weakring
