#include "fracdiff/error.hpp"

namespace fracdiff {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::domain: return "domain";
    case ErrorCode::pole: return "pole";
    case ErrorCode::divergence_risk: return "divergence_risk";
    case ErrorCode::no_convergence: return "no_convergence";
    case ErrorCode::config: return "config";
    case ErrorCode::tolerance: return "tolerance";
    case ErrorCode::inadmissible: return "inadmissible";
    case ErrorCode::spacing: return "spacing";
    case ErrorCode::determinant_sign: return "determinant_sign";
    case ErrorCode::bracket: return "bracket";
    case ErrorCode::non_monotone: return "non_monotone";
    case ErrorCode::not_found: return "not_found";
    case ErrorCode::io: return "io";
  }
  return "unknown";
}

}  // namespace fracdiff
