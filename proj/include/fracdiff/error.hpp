#pragma once

#include <stdexcept>
#include <string>

namespace fracdiff {

/// Failure categories shared by every module. The numeric values are part of
/// the C API (see fracdiff.h) and must stay in sync with fd_status.
enum class ErrorCode : int {
  invalid_argument = 1,
  domain = 2,
  pole = 3,
  divergence_risk = 4,
  no_convergence = 5,
  config = 6,
  tolerance = 7,
  inadmissible = 8,
  spacing = 9,
  determinant_sign = 10,
  bracket = 11,
  non_monotone = 12,
  not_found = 13,
  io = 14,
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace fracdiff
