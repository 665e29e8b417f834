#pragma once

#include <stdexcept>
#include <string>

namespace ot {

// Every failure mode the library reports. The CLI maps these onto exit
// codes, so the set is closed: add here, then update tools/ot_main.cpp.
enum class ErrorCode {
  DimensionMismatch,
  NegativeEntry,
  NonFiniteEntry,
  NotNormalized,
  ZeroMarginalEntry,
  NotSubfeasible,
  ZeroMass,
  EmptySupport,
  MarginalMismatch,
  ZeroCostMatrix,
  InvalidEpsilon,
  InvalidDimension,
  NotConverged,
  NotScalable,
  NotACoupling,
  TooLarge,
  IoError,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

// Thrown when an iterative solver exhausts its budget. Carries the best
// residual (or gap) reached so callers can report partial progress.
class NotConvergedError : public Error {
 public:
  NotConvergedError(const std::string& message, double best_residual,
                    long iterations)
      : Error(ErrorCode::NotConverged, message),
        best_residual_(best_residual),
        iterations_(iterations) {}

  double best_residual() const { return best_residual_; }
  long iterations() const { return iterations_; }

 private:
  double best_residual_;
  long iterations_;
};

}  // namespace ot
