#pragma once

// Oracle-versus-production checks shipped with the library, runnable from the
// command line. Fault flags deliberately corrupt an input so that the suite
// can be shown to fail.

#include <cstdint>
#include <string>
#include <vector>

namespace fracdiff {

enum class SelftestLevel { quick, full };

enum SelftestFault : unsigned {
  kFaultNone = 0,
  kFaultGammaTable = 1u << 0,  // perturb one Lanczos coefficient
  kFaultSeriesSign = 1u << 1,  // flip the sign of z in the oracle comparison
};

struct SelftestCheck {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct SlopeFit {
  std::string quantity;
  double rho = 0.0;
  double slope = 0.0;
  double expected = 0.0;
};

struct SelftestReport {
  std::vector<SelftestCheck> checks;
  std::vector<SlopeFit> slopes;  // full level only

  bool all_pass() const;
  std::string table() const;
};

/// Least-squares slope of log|y| against log t.
double fit_log_slope(const std::vector<double>& t, const std::vector<double>& y);

SelftestReport run_selftest(SelftestLevel level, unsigned faults = kFaultNone, std::uint64_t seed = 20240601);

}  // namespace fracdiff
