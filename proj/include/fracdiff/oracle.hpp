#pragma once

// Slow, independent reference computations. Nothing in here shares code with
// the production Mittag-Leffler routes in specfun: the series is summed in
// MPFR arithmetic, and where the series would need hundreds of digits the
// real-line spectral representation
//
//   E_rho(-x) = sin(rho pi) / (rho pi) * int_0^inf exp(-(u x)^{1/rho})
//                                       / (u^2 + 2 u cos(rho pi) + 1) du
//
// is integrated in __float128 (33 digits) with double-exponential quadrature.

#include <functional>
#include <span>
#include <vector>

namespace fracdiff::oracle {

struct OracleConfig {
  int precision_digits = 40;
  double fd_step = 1e-6;
  int grid_points = 64;
};

enum class ReferenceMethod { series, integral, exponential };

const char* to_string(ReferenceMethod method) noexcept;

struct ReferenceValue {
  double value = 0.0;
  ReferenceMethod method = ReferenceMethod::series;
  int digits = 0;  // working precision of the series route
  int terms = 0;
};

/// E_rho(z), z <= 0, |z| <= 60. Chooses the series when it is affordable.
double ml_reference(double rho, double z, const OracleConfig& cfg = {});
ReferenceValue ml_reference_detailed(double rho, double z, const OracleConfig& cfg = {});

/// Series in extended precision regardless of cost (bounded by max_digits).
ReferenceValue ml_reference_series(double rho, double z, const OracleConfig& cfg = {},
                                   int max_digits = 400);
/// Real-line integral in quad precision; any x >= 0.
double ml_reference_integral(double rho, double x);

/// exp(x^2) erfc(x) for x >= 0: series below 2, continued fraction above.
double erfcx_reference(double x);

double gamma_reference(double x);
double digamma_reference(double x);

inline double fd_derivative(const std::function<double(double)>& f, double x, double step) {
  return (f(x + step) - f(x - step)) / (2.0 * step);
}

struct L1Result {
  std::vector<double> derivative;  // nodes 1..N of the input grid
  bool coarse_grid = false;        // fewer than 16 nodes
};

/// L1 discretisation of the Caputo derivative on a uniform grid.
/// samples[j] = h(j * tau), j = 0..N.
L1Result l1_caputo(std::span<const double> samples, double tau, double rho);

struct RangeScan {
  double min = 0.0;
  double max = 0.0;
  bool monotone = false;  // strictly, in one direction
  bool decreasing = false;
  int sign_changes = 0;   // of successive differences
};

RangeScan range_scan(const std::function<double(double)>& f, double a, double b,
                     int grid_points = 64);

}  // namespace fracdiff::oracle
