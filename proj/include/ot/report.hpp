#pragma once

#include <optional>
#include <string>

namespace ot {

enum class SolveMethod { packing, scaling };

inline const char* method_name(SolveMethod m) {
  return m == SolveMethod::packing ? "packing" : "scaling";
}

// Summary of one solver run. residual_l1 is the output plan's marginal
// residual; certified_gap is cost minus the exact optimum and is filled
// only when a caller asks for certification and the instance is within
// the oracle cap.
struct SolveReport {
  SolveMethod method = SolveMethod::packing;
  double epsilon = 0.0;
  double cost = 0.0;
  double residual_l1 = 0.0;
  long iterations = 0;
  long wall_time_ms = 0;
  std::optional<double> certified_gap;
};

}  // namespace ot
