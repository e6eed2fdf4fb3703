#pragma once

#include <stdexcept>
#include <string>

namespace causalkit {

// Stable machine-readable failure categories shared by the library, the CLI
// (exit codes and JSON error objects) and the python bindings.
enum class ErrorCode {
  kParse,            // malformed graph text or CSV
  kName,             // unknown node or column name
  kArgument,         // invalid argument or argument combination
  kCycle,            // edge set is not acyclic
  kEmptyArm,         // a treatment arm has no observations
  kPositivity,       // empty stratum cell or score outside (0, 1)
  kSeparation,       // logistic fit hit perfect separation
  kRankDeficient,    // design matrix not full column rank
  kNoIdentification, // residualized regressor degenerate
  kNonConvergence,   // iterative solver exhausted its budget
  kEstimation,       // other estimation failure (bootstrap abort, ...)
};

inline const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kParse: return "PARSE";
    case ErrorCode::kName: return "NAME";
    case ErrorCode::kArgument: return "ARGUMENT";
    case ErrorCode::kCycle: return "CYCLE";
    case ErrorCode::kEmptyArm: return "EMPTY_ARM";
    case ErrorCode::kPositivity: return "POSITIVITY";
    case ErrorCode::kSeparation: return "SEPARATION";
    case ErrorCode::kRankDeficient: return "RANK_DEFICIENT";
    case ErrorCode::kNoIdentification: return "NO_IDENTIFICATION";
    case ErrorCode::kNonConvergence: return "NON_CONVERGENCE";
    case ErrorCode::kEstimation: return "ESTIMATION";
  }
  return "UNKNOWN";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace causalkit
