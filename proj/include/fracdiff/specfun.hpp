#pragma once

// Gamma, digamma and the one-parameter Mittag-Leffler function E_rho(-x) on
// the negative real axis, together with its partial derivatives in the
// fractional order rho and in the operator power sigma.
//
// The argument is always written as x = lambda^sigma * t^rho >= 0, so that
// E_rho(-lambda^sigma t^rho) = E_rho(-x). Three evaluation routes exist:
//
//   series      Taylor series sum_k (-x)^k / Gamma(rho k + 1), small x
//   contour     E = p + q with p = 1 / (Gamma(1 - rho) x) and q a Hankel
//               contour integral, valid for x > 1
//   asymptotic  three-term inverse-power expansion, huge x only
//
// rho == 1 is served by exp(-x) directly.

#include <array>
#include <complex>
#include <span>

namespace fracdiff {

enum class MlRoute { series, contour, asymptotic, exponential };

const char* to_string(MlRoute route) noexcept;

/// Validated (rho, sigma, lambda, t) tuple. rho in (0, 1], sigma > 0,
/// lambda > 0, t >= 0.
class MlArgument {
 public:
  static MlArgument make(double rho, double sigma, double lambda, double t);

  double rho() const noexcept { return rho_; }
  double sigma() const noexcept { return sigma_; }
  double lambda() const noexcept { return lambda_; }
  double t() const noexcept { return t_; }

  /// lambda^sigma * t^rho, the magnitude of the Mittag-Leffler argument.
  double x() const noexcept;

 private:
  MlArgument(double rho, double sigma, double lambda, double t)
      : rho_(rho), sigma_(sigma), lambda_(lambda), t_(t) {}

  double rho_;
  double sigma_;
  double lambda_;
  double t_;
};

/// Hankel path delta(1; beta): two rays |xi| >= 1 at arg xi = +-beta joined by
/// the unit arc. beta = 3 pi rho / 4.
struct HankelContour {
  double beta = 0.0;
  double s_max = 40.0;
  int arc_nodes = 16;
  int ray_nodes = 32;

  static HankelContour for_rho(double rho);
};

struct MlValue {
  double value = 0.0;
  double p_term = 0.0;
  double q_term = 0.0;
  double abs_err_est = 0.0;
  MlRoute route = MlRoute::series;
  int nodes = 0;  // quadrature nodes (contour) or series terms
};

/// Value of E_rho(-x) together with its first partials.
struct MlDerivatives {
  double value = 0.0;
  double d_dx = 0.0;       // dE/dx at fixed rho
  double d_drho_x = 0.0;   // dE/drho at fixed x
  MlRoute route = MlRoute::series;
};

/// Hankel-integral correction term and its exact partials.
struct QTerm {
  double q = 0.0;
  double imag_residual = 0.0;  // imaginary part left after f+ + f- + g
  double dq_dx = 0.0;
  double dq_drho_x = 0.0;
  double abs_err_est = 0.0;
  int nodes = 0;
  HankelContour contour;
};

/// Grid-maximised stand-ins for the unnamed constants of the decay estimates.
struct CalibratedConstants {
  double ml_bound = 0.0;   // sup (1 + x) E_rho(-x)
  double q_decay = 0.0;    // sup |q| x^2,                                x > 2
  double drho_q = 0.0;     // sup |dq/drho| x^2 / (1/rho + ln t),         t > 1
  double dsigma_q = 0.0;   // sup |dq/dsigma| lambda^{2 sigma} t^rho / |ln lambda|
};

double gamma_fn(double x);
double digamma_fn(double x);

/// 1 / Gamma(y) for any real y (zero at the poles of Gamma).
double rgamma(double y);
/// d/dy (1 / Gamma(y)), finite everywhere.
double rgamma_deriv(double y);

/// Largest |z| for which the Taylor route is used at order rho.
double series_radius(double rho);

/// sum_{k>=0} z^k / Gamma(rho k + 1) with compensated summation.
/// Throws divergence_risk when |z| > series_radius(rho).
double ml_series(double rho, double z, int max_terms = 2000);

double ml_p(const MlArgument& arg);
double ml_p_x(double rho, double x);

/// q = -(1 / (2 pi i rho x)) * integral over delta(1; beta) of
/// exp(xi^{1/rho}) xi / (xi + x) dxi. Requires x > 1.
QTerm ml_q_contour_x(double rho, double x);
double ml_q_contour(const MlArgument& arg, const HankelContour& contour);

/// sum_{n=1..terms} (-1)^{n+1} x^{-n} / Gamma(1 - rho n).
double ml_asymptotic_x(double rho, double x, int terms = 3);

MlValue ml_eval(const MlArgument& arg);
MlValue ml_eval_x(double rho, double x);

MlDerivatives ml_derivatives_x(double rho, double x);

/// Total derivative of E_rho(-lambda^sigma t^rho) in rho.
double ml_drho(const MlArgument& arg);
/// Total derivative of E_rho(-lambda^sigma t^rho) in sigma.
double ml_dsigma(const MlArgument& arg);

/// Closed-form d p / d rho = -(ln t - psi(1 - rho)) / (Gamma(1 - rho) x).
double ml_dp_drho(const MlArgument& arg);

/// dq/drho and dq/dsigma along (lambda, sigma, t) fixed, from the contour.
struct QPartials {
  double q = 0.0;
  double dq_drho = 0.0;
  double dq_dsigma = 0.0;
};
QPartials ml_q_partials(const MlArgument& arg);

const CalibratedConstants& calibrated_constants();

namespace detail {
inline constexpr std::array<double, 9> kLanczosCoefficients = {
    0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
    771.32342877765313,      -176.61502916214059,   12.507343278686905,
    -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7};

/// Lanczos (g = 7) evaluation with a caller-supplied coefficient table.
double gamma_with_table(double x, std::span<const double> coefficients);

/// sin(pi x) with exact argument reduction.
double sinpi(double x);
}  // namespace detail

}  // namespace fracdiff
