#include "fracdiff/oracle.hpp"

#include <mpfr.h>

#include <algorithm>
#include <boost/math/constants/constants.hpp>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/multiprecision/float128.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "fracdiff/error.hpp"

namespace fracdiff::oracle {

namespace {

using Quad = boost::multiprecision::float128;

// Owning MPFR value with a fixed precision.
class BigFloat {
 public:
  explicit BigFloat(mpfr_prec_t bits) { mpfr_init2(v_, bits); mpfr_set_zero(v_, 1); }
  BigFloat(const BigFloat&) = delete;
  BigFloat& operator=(const BigFloat&) = delete;
  ~BigFloat() { mpfr_clear(v_); }

  mpfr_ptr get() { return v_; }
  mpfr_srcptr get() const { return v_; }
  double to_double() const { return mpfr_get_d(v_, MPFR_RNDN); }

 private:
  mpfr_t v_;
};

mpfr_prec_t bits_for_digits(int digits) {
  return static_cast<mpfr_prec_t>(std::ceil(digits * 3.3219280948873623)) + 16;
}

std::string num(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

// log10 of the largest term x^k / Gamma(rho k + 1) and the index where terms
// drop below 10^-floor_digits.
struct SeriesPlan {
  double log10_peak = 0.0;
  int terms = 0;
};

SeriesPlan plan_series(double rho, double x, int floor_digits, int cap) {
  SeriesPlan plan;
  if (x == 0.0) {
    plan.terms = 1;
    return plan;
  }
  const double lx = std::log10(x);
  bool past_peak = false;
  double prev = -std::numeric_limits<double>::infinity();
  for (int k = 0; k <= cap; ++k) {
    const double l = k * lx - std::lgamma(rho * k + 1.0) / std::numbers::ln10;
    plan.log10_peak = std::max(plan.log10_peak, l);
    if (l < prev) past_peak = true;
    prev = l;
    if (past_peak && l < plan.log10_peak - floor_digits - std::max(0.0, plan.log10_peak)) {
      plan.terms = k + 1;
      return plan;
    }
  }
  plan.terms = cap + 1;
  return plan;
}

}  // namespace

const char* to_string(ReferenceMethod method) noexcept {
  switch (method) {
    case ReferenceMethod::series: return "series";
    case ReferenceMethod::integral: return "integral";
    case ReferenceMethod::exponential: return "exponential";
  }
  return "unknown";
}

ReferenceValue ml_reference_series(double rho, double z, const OracleConfig& cfg,
                                   int max_digits) {
  if (cfg.precision_digits < 30)
    fail(ErrorCode::invalid_argument, "oracle precision must be at least 30 digits");
  if (!(rho > 0.0 && rho <= 1.0)) fail(ErrorCode::invalid_argument, "rho must be in (0,1]");
  if (!(z <= 0.0)) fail(ErrorCode::domain, "oracle expects z <= 0");
  const double x = -z;
  const int cap = 200000;
  SeriesPlan plan = plan_series(rho, x, cfg.precision_digits, cap);
  const int digits = cfg.precision_digits + static_cast<int>(std::ceil(plan.log10_peak)) + 10;
  if (digits > max_digits || plan.terms > cap)
    fail(ErrorCode::divergence_risk, "extended-precision series needs " + std::to_string(digits) +
                                         " digits at rho=" + num(rho) + ", z=" + num(z));
  const mpfr_prec_t bits = bits_for_digits(digits);
  BigFloat sum(bits), power(bits), term(bits), arg(bits), gam(bits), mrho(bits), mx(bits);
  mpfr_set_d(mrho.get(), rho, MPFR_RNDN);
  mpfr_set_d(mx.get(), x, MPFR_RNDN);
  mpfr_set_ui(power.get(), 1, MPFR_RNDN);
  mpfr_set_zero(sum.get(), 1);
  ReferenceValue out;
  out.method = ReferenceMethod::series;
  out.digits = digits;
  // Stop once |term| < 10^-(precision_digits - 5) |sum| past the peak term.
  const double stop_log10 = -(cfg.precision_digits - 5);
  bool past_peak = false;
  double prev_log = -std::numeric_limits<double>::infinity();
  for (int k = 0; k <= cap; ++k) {
    mpfr_mul_ui(arg.get(), mrho.get(), static_cast<unsigned long>(k), MPFR_RNDN);
    mpfr_add_ui(arg.get(), arg.get(), 1, MPFR_RNDN);
    mpfr_gamma(gam.get(), arg.get(), MPFR_RNDN);
    mpfr_div(term.get(), power.get(), gam.get(), MPFR_RNDN);
    if (k % 2 == 1) mpfr_neg(term.get(), term.get(), MPFR_RNDN);
    mpfr_add(sum.get(), sum.get(), term.get(), MPFR_RNDN);
    out.terms = k + 1;
    if (mpfr_zero_p(term.get())) break;
    const double lt = std::log10(std::abs(mpfr_get_d(term.get(), MPFR_RNDN)) + 1e-300);
    const double ls = std::log10(std::abs(mpfr_get_d(sum.get(), MPFR_RNDN)) + 1e-300);
    if (lt < prev_log) past_peak = true;
    prev_log = lt;
    if (past_peak && lt - ls < stop_log10) break;
    mpfr_mul(power.get(), power.get(), mx.get(), MPFR_RNDN);
  }
  out.value = sum.to_double();
  return out;
}

double ml_reference_integral(double rho, double x) {
  if (!(rho > 0.0 && rho < 1.0)) fail(ErrorCode::invalid_argument, "integral route needs rho in (0,1)");
  if (!(x >= 0.0)) fail(ErrorCode::domain, "integral route needs x >= 0");
  if (x == 0.0) return 1.0;
  using boost::math::constants::pi;
  const Quad r(rho);
  const Quad xx(x);
  const Quad c = cos(pi<Quad>() * r);
  const Quad s = sin(pi<Quad>() * r);
  // v = (u x)^{1/rho}: the integral becomes
  //   sin(rho pi) / (pi x) int_0^inf e^{-v} v^{rho-1} / ((v^rho / x + c)^2 + s^2) dv.
  auto f = [&](const Quad& v) -> Quad {
    if (v == 0) return Quad(0);
    const Quad vr = pow(v, r);
    const Quad a = vr / xx + c;
    return exp(-v) * vr / v / (a * a + s * s);
  };
  // Breakpoints around the peak of the rational factor (only for rho > 1/2).
  std::vector<Quad> breaks{Quad(0)};
  if (c < 0) {
    for (const Quad& sv : {-c - s, -c, -c + s}) {
      if (sv > 0) breaks.push_back(pow(xx * sv, 1 / r));
    }
  }
  breaks.push_back(breaks.back() + 1);
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  const Quad tol = Quad("1e-30");
  boost::math::quadrature::tanh_sinh<Quad> ts;
  boost::math::quadrature::exp_sinh<Quad> es;
  Quad total = 0;
  // Each finite piece is mapped onto [0, 1]; boost's endpoint bookkeeping
  // misfires on short intervals far from the origin in this type.
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    const Quad a = breaks[i];
    const Quad w = breaks[i + 1] - breaks[i];
    total += w * ts.integrate([&](const Quad& u) { return f(a + w * u); }, Quad(0), Quad(1), tol);
  }
  total += es.integrate(f, breaks.back(), std::numeric_limits<Quad>::infinity(), tol);
  const Quad value = s / (pi<Quad>() * xx) * total;
  return static_cast<double>(value);
}

ReferenceValue ml_reference_detailed(double rho, double z, const OracleConfig& cfg) {
  if (!(z <= 0.0)) fail(ErrorCode::domain, "oracle expects z <= 0");
  if (-z > 60.0) fail(ErrorCode::domain, "oracle range is |z| <= 60, got " + num(-z));
  if (!(rho > 0.0 && rho <= 1.0)) fail(ErrorCode::invalid_argument, "rho must be in (0,1]");
  if (rho == 1.0) {
    // e^z through the same MPFR machinery, rounded once.
    BigFloat v(bits_for_digits(cfg.precision_digits));
    mpfr_set_d(v.get(), z, MPFR_RNDN);
    mpfr_exp(v.get(), v.get(), MPFR_RNDN);
    return {v.to_double(), ReferenceMethod::exponential, cfg.precision_digits, 0};
  }
  const SeriesPlan plan = plan_series(rho, -z, cfg.precision_digits, 200000);
  const int digits = cfg.precision_digits + static_cast<int>(std::ceil(plan.log10_peak)) + 10;
  if (digits <= 120 && plan.terms <= 4000) return ml_reference_series(rho, z, cfg, 120);
  ReferenceValue out;
  out.value = ml_reference_integral(rho, -z);
  out.method = ReferenceMethod::integral;
  out.digits = 33;
  return out;
}

double ml_reference(double rho, double z, const OracleConfig& cfg) {
  return ml_reference_detailed(rho, z, cfg).value;
}

double erfcx_reference(double x) {
  if (!(x >= 0.0)) fail(ErrorCode::domain, "erfcx reference needs x >= 0");
  using boost::math::constants::pi;
  const Quad xx(x);
  if (x < 2.0) {
    // erf(x) = 2/sqrt(pi) sum (-1)^n x^{2n+1} / (n! (2n+1))
    Quad sum = 0;
    Quad p = xx;  // (-1)^n x^{2n+1} / n!
    const Quad eps("1e-45");
    for (int n = 0; n < 1000; ++n) {
      const Quad t = p / (2 * n + 1);
      sum += t;
      if (abs(t) < eps) break;
      p *= -xx * xx / (n + 1);
    }
    const Quad erfc = 1 - 2 / sqrt(pi<Quad>()) * sum;
    return static_cast<double>(exp(xx * xx) * erfc);
  }
  // erfc(x) e^{x^2} sqrt(pi) = 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...)))),
  // evaluated backwards at two depths until they agree.
  auto cf = [&](int depth) {
    Quad tail = xx;
    for (int k = depth; k >= 1; --k) tail = xx + Quad(k) / 2 / tail;
    return 1 / tail;
  };
  int depth = 200;
  Quad prev = cf(depth);
  while (true) {
    depth *= 2;
    const Quad cur = cf(depth);
    if (abs(cur - prev) < Quad("1e-32") * abs(cur) || depth > 1 << 20) {
      prev = cur;
      break;
    }
    prev = cur;
  }
  return static_cast<double>(prev / sqrt(pi<Quad>()));
}

double gamma_reference(double x) {
  BigFloat v(256);
  mpfr_set_d(v.get(), x, MPFR_RNDN);
  mpfr_gamma(v.get(), v.get(), MPFR_RNDN);
  return v.to_double();
}

double digamma_reference(double x) {
  BigFloat v(256);
  mpfr_set_d(v.get(), x, MPFR_RNDN);
  mpfr_digamma(v.get(), v.get(), MPFR_RNDN);
  return v.to_double();
}

L1Result l1_caputo(std::span<const double> samples, double tau, double rho) {
  if (samples.size() < 2) fail(ErrorCode::invalid_argument, "L1 scheme needs at least two samples");
  if (!(tau > 0.0)) fail(ErrorCode::invalid_argument, "grid spacing must be positive");
  if (!(rho > 0.0 && rho <= 1.0)) fail(ErrorCode::invalid_argument, "rho must be in (0,1]");
  const std::size_t n_nodes = samples.size() - 1;
  std::vector<double> b(n_nodes);
  // b_0 = 1 for every rho; pow(0, 0) would zero it at rho = 1.
  b[0] = 1.0;
  for (std::size_t j = 1; j < n_nodes; ++j)
    b[j] = std::pow(j + 1.0, 1.0 - rho) - std::pow(static_cast<double>(j), 1.0 - rho);
  BigFloat g(128);
  mpfr_set_d(g.get(), 2.0 - rho, MPFR_RNDN);
  mpfr_gamma(g.get(), g.get(), MPFR_RNDN);
  const double scale = std::pow(tau, -rho) / g.to_double();
  L1Result out;
  out.coarse_grid = samples.size() < 16;
  out.derivative.resize(n_nodes);
  for (std::size_t n = 1; n <= n_nodes; ++n) {
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) acc += b[j] * (samples[n - j] - samples[n - j - 1]);
    out.derivative[n - 1] = scale * acc;
  }
  return out;
}

RangeScan range_scan(const std::function<double(double)>& f, double a, double b, int grid_points) {
  if (!(a < b)) fail(ErrorCode::invalid_argument, "range_scan needs a < b");
  if (grid_points < 2) fail(ErrorCode::invalid_argument, "range_scan needs at least two points");
  std::vector<double> v(grid_points);
  for (int i = 0; i < grid_points; ++i) v[i] = f(a + (b - a) * i / (grid_points - 1));
  RangeScan out;
  out.min = *std::min_element(v.begin(), v.end());
  out.max = *std::max_element(v.begin(), v.end());
  int prev_sign = 0;
  bool all_down = true;
  bool all_up = true;
  for (int i = 1; i < grid_points; ++i) {
    const double d = v[i] - v[i - 1];
    const int sign = (d > 0) - (d < 0);
    if (sign >= 0) all_down = false;
    if (sign <= 0) all_up = false;
    if (sign != 0) {
      if (prev_sign != 0 && sign != prev_sign) ++out.sign_changes;
      prev_sign = sign;
    }
  }
  out.monotone = all_down || all_up;
  out.decreasing = all_down;
  return out;
}

}  // namespace fracdiff::oracle
