#pragma once

// Recovery of the time order rho (sigma known) from one first-mode
// observation, and of (rho, sigma) jointly from two.
//
// Every equation is written for the ratio r = d / |phi|, so the solvers never
// see the sign of the Fourier coefficient.

#include <cstdint>
#include <optional>
#include <vector>

#include "fracdiff/error.hpp"

namespace fracdiff {

struct ObservationSet {
  double t0 = 0.0;
  double d0 = 0.0;
  std::optional<double> t1;
  std::optional<double> d1;
  double phi1_abs = 1.0;
  double lambda_obs = 1.0;

  bool two_point() const noexcept { return t1.has_value() && d1.has_value(); }
  double ratio0() const noexcept { return d0 / phi1_abs; }
  double ratio1() const noexcept { return d1.value_or(0.0) / phi1_abs; }
  /// Throws invalid_argument on a malformed set.
  void validate() const;
};

struct ParamBox {
  double lo = 0.0;
  double hi = 0.0;
};

inline constexpr ParamBox kDefaultRhoBox{0.1, 1.0};
/// The spacing gate needs rho_hi bounded away from 1; the oscillation bound
/// grows like -digamma(1 - rho_hi).
inline constexpr ParamBox kDefaultJointRhoBox{0.1, 0.95};
inline constexpr ParamBox kDefaultSigmaBox{0.25, 2.5};
/// rho never exceeds this in grid scans; the contour route degenerates at 1.
inline constexpr double kRhoClamp = 1.0 - 1e-6;

struct AdmissibilityReport {
  double lower0 = 0.0;
  double upper0 = 0.0;
  double lower1 = 0.0;
  double upper1 = 0.0;
  bool ok0 = false;
  bool ok1 = false;
  bool paper_condition_ok = false;  // literal window without the lambda^sigma factor
  bool spacing_ok = false;
  bool monotone_ok = false;
  int determinant_sign = 0;         // over the box grid; 0 when mixed or absent
  bool two_point = false;
  double spacing_constant = 0.0;    // C in t0 > t1 exp(C / (1 - rho_hi)^2)
  double spacing_ratio = 0.0;       // the resulting minimum t0 / t1

  bool admissible() const noexcept {
    return two_point ? ok0 && ok1 && monotone_ok && spacing_ok : ok0 && monotone_ok;
  }
};

enum class SolveMethod { bisection, nested, newton };

const char* to_string(SolveMethod method) noexcept;

struct SolveOptions {
  double tol = 1e-10;  // on |E - r| / r
  int max_bisection = 200;
  int max_newton = 20;
  bool newton_polish = true;
};

struct RecoveryResult {
  double rho = 0.0;
  std::optional<double> sigma;
  double residual0 = 0.0;  // (E - r) / r at t0
  double residual1 = 0.0;
  int iterations = 0;
  std::vector<double> det_trace;
  SolveMethod method = SolveMethod::bisection;
  AdmissibilityReport report;
};

/// Solver failure that carries the admissibility verdicts alongside the code.
class InverseError : public Error {
 public:
  InverseError(ErrorCode code, const std::string& what, AdmissibilityReport report)
      : Error(code, what), report_(report) {}
  const AdmissibilityReport& report() const noexcept { return report_; }

 private:
  AdmissibilityReport report_;
};

/// First problem: sigma known.
AdmissibilityReport admissibility_check(const ObservationSet& obs, ParamBox rho_box, double sigma);
/// Two-parameter problem over a (rho, sigma) box.
AdmissibilityReport admissibility_check(const ObservationSet& obs, ParamBox rho_box,
                                        ParamBox sigma_box);

RecoveryResult invert_rho(const ObservationSet& obs, double sigma, ParamBox rho_box = kDefaultRhoBox,
                          const SolveOptions& options = {});

/// Jacobian determinant of (rho, sigma) -> (E(t0), E(t1)).
double determinant_D(double rho, double sigma, const ObservationSet& obs);

/// Spacing constant C such that ln(t0 / t1) > C / (1 - rho_hi)^2 keeps the
/// determinant away from zero on the whole box.
double spacing_constant(double lambda, double t1, ParamBox rho_box, ParamBox sigma_box);

RecoveryResult invert_rho_sigma(const ObservationSet& obs, ParamBox rho_box = kDefaultJointRhoBox,
                                ParamBox sigma_box = kDefaultSigmaBox,
                                const SolveOptions& options = {});

/// Damped Newton on the log-residual system from a given start point.
RecoveryResult newton_rho_sigma(const ObservationSet& obs, double rho_start, double sigma_start,
                                ParamBox rho_box, ParamBox sigma_box, const SolveOptions& options = {},
                                int max_iterations = 100);

struct MultistartResult {
  std::vector<RecoveryResult> runs;
  bool consistent = false;  // every run converged to within spread_tol of runs[0]
  double max_spread = 0.0;
};

/// Newton restarts from uniformly drawn interior points, run on `threads` workers.
MultistartResult multistart(const ObservationSet& obs, ParamBox rho_box, ParamBox sigma_box,
                            int restarts, std::uint64_t seed, int threads = 1,
                            double spread_tol = 1e-6, const SolveOptions& options = {});

/// Smallest t in {2, 4, ..., 2^20} with d/drho E < 0 on a 64-point rho grid of
/// [rho0, kRhoClamp] at t, 2t and 4t.
double empirical_T0(double lambda, double sigma, double rho0);

}  // namespace fracdiff
