#include "fracdiff/specfun.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <vector>

#include "fracdiff/error.hpp"
#include "gauss_legendre.hpp"

namespace fracdiff {

namespace {

using cplx = std::complex<double>;

constexpr double kPi = std::numbers::pi;
constexpr double kSqrtTwoPi = 2.5066282746310005024;

// Taylor route is used while x^{1/rho} <= kSeriesCutoff; the largest series
// term is then about exp(kSeriesCutoff) / rho.
constexpr double kSeriesCutoff = 4.0;
// Inverse-power expansion is used from here on; the dropped terms are
// O(x^-4) < 1e-28.
constexpr double kAsymptoticThreshold = 1e7;

constexpr double kPanelTolerance = 1e-13;
constexpr int kMaxContourNodes = 1 << 14;

bool is_nonpositive_integer(double x) { return x <= 0.0 && std::floor(x) == x; }

std::string fmt_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

// Neumaier compensated accumulator.
struct CompensatedSum {
  double sum = 0.0;
  double carry = 0.0;
  void add(double v) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v))
      carry += (sum - t) + v;
    else
      carry += (v - t) + sum;
    sum = t;
  }
  double value() const { return sum + carry; }
};

double digamma_any(double y) {
  if (y > 0.0) return digamma_fn(y);
  if (is_nonpositive_integer(y)) fail(ErrorCode::pole, "digamma pole at " + fmt_double(y));
  // Reflection: psi(y) = psi(1 - y) - pi cot(pi y).
  return digamma_fn(1.0 - y) - kPi * detail::sinpi(y + 0.5) / detail::sinpi(y);
}

}  // namespace

const char* to_string(MlRoute route) noexcept {
  switch (route) {
    case MlRoute::series: return "series";
    case MlRoute::contour: return "contour";
    case MlRoute::asymptotic: return "asymptotic";
    case MlRoute::exponential: return "exponential";
  }
  return "unknown";
}

MlArgument MlArgument::make(double rho, double sigma, double lambda, double t) {
  if (!(rho > 0.0 && rho <= 1.0))
    fail(ErrorCode::invalid_argument, "rho must be in (0,1], got " + fmt_double(rho));
  if (!(sigma > 0.0) || !std::isfinite(sigma))
    fail(ErrorCode::invalid_argument, "sigma must be positive, got " + fmt_double(sigma));
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    fail(ErrorCode::invalid_argument, "lambda must be positive, got " + fmt_double(lambda));
  if (!(t >= 0.0) || !std::isfinite(t))
    fail(ErrorCode::invalid_argument, "t must be non-negative, got " + fmt_double(t));
  MlArgument arg(rho, sigma, lambda, t);
  if (!std::isfinite(arg.x()))
    fail(ErrorCode::invalid_argument, "lambda^sigma t^rho overflows");
  return arg;
}

double MlArgument::x() const noexcept {
  if (t_ == 0.0) return 0.0;
  return std::pow(lambda_, sigma_) * std::pow(t_, rho_);
}

HankelContour HankelContour::for_rho(double rho) {
  HankelContour c;
  c.beta = 0.75 * kPi * rho;
  c.s_max = std::max(40.0, std::pow(18.0 * std::numbers::ln10 * std::numbers::sqrt2, rho));
  return c;
}

// ---------------------------------------------------------------------------
// Gamma and digamma

namespace detail {

double sinpi(double x) {
  double r = x - 2.0 * std::round(0.5 * x);  // exact, r in [-1, 1]
  if (r > 0.5)
    r = 1.0 - r;
  else if (r < -0.5)
    r = -1.0 - r;
  return std::sin(kPi * r);
}

double gamma_with_table(double x, std::span<const double> c) {
  if (std::isnan(x)) return x;
  if (is_nonpositive_integer(x)) fail(ErrorCode::pole, "gamma pole at " + fmt_double(x));
  if (x < 0.5) return kPi / (sinpi(x) * gamma_with_table(1.0 - x, c));
  if (x > 171.7) return std::numeric_limits<double>::infinity();
  const double xm1 = x - 1.0;
  double a = c[0];
  for (std::size_t i = 1; i < c.size(); ++i) a += c[i] / (xm1 + static_cast<double>(i));
  const double t = xm1 + 7.5;
  // Split the power so t^{x-1/2} does not overflow before exp(-t) applies.
  const double half_pow = std::pow(t, 0.5 * (xm1 + 0.5));
  return kSqrtTwoPi * half_pow * (std::exp(-t) * half_pow) * a;
}

}  // namespace detail

double gamma_fn(double x) { return detail::gamma_with_table(x, detail::kLanczosCoefficients); }

double digamma_fn(double x) {
  if (!(x > 0.0)) fail(ErrorCode::domain, "digamma requires x > 0, got " + fmt_double(x));
  double shift = 0.0;
  while (x < 10.0) {
    shift -= 1.0 / x;
    x += 1.0;
  }
  const double inv2 = 1.0 / (x * x);
  // Bernoulli tail: B_{2n} / (2n x^{2n}) for n = 1..7.
  const double tail =
      inv2 * (1.0 / 12 -
              inv2 * (1.0 / 120 -
                      inv2 * (1.0 / 252 -
                              inv2 * (1.0 / 240 -
                                      inv2 * (1.0 / 132 - inv2 * (691.0 / 32760 - inv2 / 12))))));
  return shift + std::log(x) - 0.5 / x - tail;
}

double rgamma(double y) {
  if (is_nonpositive_integer(y)) return 0.0;
  if (y < 0.5) return detail::sinpi(y) * gamma_fn(1.0 - y) / kPi;
  return 1.0 / gamma_fn(y);
}

double rgamma_deriv(double y) {
  if (is_nonpositive_integer(y)) {
    // d/dy 1/Gamma(y) at y = -m equals (-1)^m m!.
    const double m = -y;
    const double fact = std::tgamma(m + 1.0);
    return std::fmod(m, 2.0) == 0.0 ? fact : -fact;
  }
  return -digamma_any(y) * rgamma(y);
}

// ---------------------------------------------------------------------------
// Series route

double series_radius(double rho) { return std::pow(kSeriesCutoff, rho); }

namespace {

struct SeriesSums {
  double value = 0.0;
  double d_dz = 0.0;
  double d_drho = 0.0;
  int terms = 0;
};

// Term magnitude a_k |z|^k with a_k = 1 / Gamma(rho k + 1).
double series_coefficient(double rho, int k) {
  const double arg = rho * k + 1.0;
  if (arg < 171.0) return 1.0 / gamma_fn(arg);
  return std::exp(-std::lgamma(arg));
}

SeriesSums series_sums(double rho, double z, int max_terms, bool derivatives) {
  CompensatedSum s0, s1, sr;
  double prev = std::numeric_limits<double>::infinity();
  for (int k = 0; k < max_terms; ++k) {
    const double a = series_coefficient(rho, k);
    const double zk = (k == 0) ? 1.0 : std::pow(z, k);
    const double term = a * zk;
    s0.add(term);
    if (derivatives && k > 0) {
      s1.add(k * a * std::pow(z, k - 1));
      sr.add(-k * digamma_fn(rho * k + 1.0) * term);
    }
    const double mag = std::abs(term);
    if (k > 2 && (mag < prev || mag == 0.0) && mag <= 1e-18 * std::abs(s0.value())) {
      return {s0.value(), s1.value(), sr.value(), k + 1};
    }
    prev = mag;
    if (z == 0.0) return {1.0, derivatives ? 1.0 / gamma_fn(rho + 1.0) : 0.0, 0.0, 1};
  }
  fail(ErrorCode::no_convergence, "Mittag-Leffler series did not converge in " +
                                      std::to_string(max_terms) + " terms");
}

}  // namespace

double ml_series(double rho, double z, int max_terms) {
  if (!(rho > 0.0 && rho <= 1.0))
    fail(ErrorCode::invalid_argument, "rho must be in (0,1], got " + fmt_double(rho));
  if (!(z <= 0.0)) fail(ErrorCode::domain, "series route expects z <= 0");
  if (-z > series_radius(rho))
    fail(ErrorCode::divergence_risk, "|z| = " + fmt_double(-z) + " exceeds series radius " +
                                         fmt_double(series_radius(rho)));
  return series_sums(rho, z, max_terms, false).value;
}

// ---------------------------------------------------------------------------
// p term and asymptotic expansion

double ml_p_x(double rho, double x) { return rgamma(1.0 - rho) / x; }

double ml_p(const MlArgument& arg) { return ml_p_x(arg.rho(), arg.x()); }

double ml_asymptotic_x(double rho, double x, int terms) {
  CompensatedSum s;
  double xn = 1.0;
  for (int n = 1; n <= terms; ++n) {
    xn /= x;
    const double y = 1.0 - rho * n;
    if (is_nonpositive_integer(y)) continue;
    s.add(((n % 2 == 1) ? 1.0 : -1.0) * xn * rgamma(y));
  }
  return s.value();
}

namespace {

struct AsymptoticSums {
  double value = 0.0;
  double d_dx = 0.0;
  double d_drho = 0.0;
  double first = 0.0;
};

AsymptoticSums asymptotic_sums(double rho, double x, int terms) {
  AsymptoticSums out;
  double xn = 1.0;
  for (int n = 1; n <= terms; ++n) {
    xn /= x;
    const double sign = (n % 2 == 1) ? 1.0 : -1.0;
    const double y = 1.0 - rho * n;
    const double rg = rgamma(y);
    out.value += sign * xn * rg;
    out.d_dx += sign * (-n) * xn / x * rg;
    out.d_drho += sign * xn * (-n) * rgamma_deriv(y);
    if (n == 1) out.first = sign * xn * rg;
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Contour route

namespace {

struct ContourAcc {
  cplx j{}, jx{}, jr{};
  double l1_j = 0.0, l1_jx = 0.0, l1_jr = 0.0;

  ContourAcc& operator+=(const ContourAcc& o) {
    j += o.j;
    jx += o.jx;
    jr += o.jr;
    l1_j += o.l1_j;
    l1_jx += o.l1_jx;
    l1_jr += o.l1_jr;
    return *this;
  }
};

struct ContourPoint {
  cplx xi;
  cplx log_xi;
  cplx w;    // xi^{1/rho}
  cplx dxi;  // d xi / du for the panel parameter u
};

void accumulate(ContourAcc& acc, const ContourPoint& pt, double weight, double x, double rho) {
  const cplx e = std::exp(pt.w);
  const cplx denom = pt.xi + x;
  const cplx base = e * pt.xi / denom * pt.dxi * weight;
  const cplx bx = -base / denom;
  const cplx br = base * pt.w * (-pt.log_xi / (rho * rho));
  acc.j += base;
  acc.jx += bx;
  acc.jr += br;
  acc.l1_j += std::abs(base);
  acc.l1_jx += std::abs(bx);
  acc.l1_jr += std::abs(br);
}

struct PanelResult {
  ContourAcc acc;
  double err = 0.0;
  int nodes = 0;
};

template <class PointFn>
PanelResult integrate_panel(double a, double b, double x, double rho, PointFn&& point) {
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (b + a);
  auto rule_sum = [&](int n) {
    const auto& rule = detail::gauss_legendre(n);
    ContourAcc acc;
    for (int i = 0; i < n; ++i) {
      const double u = mid + half * rule.nodes[i];
      accumulate(acc, point(u), half * rule.weights[i], x, rho);
    }
    return acc;
  };
  PanelResult out;
  int n = 16;
  ContourAcc prev = rule_sum(n);
  out.nodes += n;
  while (true) {
    n *= 2;
    ContourAcc cur = rule_sum(n);
    out.nodes += n;
    const double dj = std::abs(cur.j - prev.j);
    const double djx = std::abs(cur.jx - prev.jx);
    const double djr = std::abs(cur.jr - prev.jr);
    const bool ok = dj <= kPanelTolerance * cur.l1_j + 1e-300 &&
                    djx <= kPanelTolerance * cur.l1_jx + 1e-300 &&
                    djr <= kPanelTolerance * cur.l1_jr + 1e-300;
    if (ok) {
      out.acc = cur;
      out.err = dj;
      return out;
    }
    if (n >= detail::kMaxGaussNodes) {
      fail(ErrorCode::no_convergence, "contour panel quadrature did not stabilise");
    }
    prev = cur;
  }
}

struct ContourIntegrals {
  cplx j, jx, jr;
  double err = 0.0;
  int arc_nodes = 0;
  int ray_nodes = 0;
  HankelContour contour;
};

ContourIntegrals contour_integrals(double rho, double x) {
  ContourIntegrals out;
  out.contour = HankelContour::for_rho(rho);
  const double beta = out.contour.beta;
  const cplx ray_dir_w = std::polar(1.0, 0.75 * kPi);  // (e^{i beta})^{1/rho}
  const double r_max = std::min(std::pow(out.contour.s_max, 1.0 / rho), 100.0);

  // Rays, parametrised by r = s^{1/rho} so that |exp(xi^{1/rho})| = exp(-r / sqrt 2).
  auto ray_point = [&](double sign) {
    const cplx dir = std::polar(1.0, sign * beta);
    const cplx wdir = sign > 0 ? ray_dir_w : std::conj(ray_dir_w);
    return [=](double r) {
      const double s = std::pow(r, rho);
      ContourPoint pt;
      pt.xi = s * dir;
      pt.log_xi = cplx(rho * std::log(r), sign * beta);
      pt.w = r * wdir;
      pt.dxi = dir * (rho * s / r);
      return pt;
    };
  };
  ContourAcc plus, minus, arc;
  double err = 0.0;
  std::vector<double> breaks{1.0};
  for (double b = 2.0; b < r_max; b *= 2.0) breaks.push_back(b);
  breaks.push_back(r_max);
  const auto plus_fn = ray_point(+1.0);
  const auto minus_fn = ray_point(-1.0);
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    auto p = integrate_panel(breaks[i], breaks[i + 1], x, rho, plus_fn);
    auto m = integrate_panel(breaks[i], breaks[i + 1], x, rho, minus_fn);
    plus += p.acc;
    minus += m.acc;
    err += p.err + m.err;
    out.ray_nodes += p.nodes + m.nodes;
  }
  // Arc xi = e^{i theta}, theta = beta u, u in [-1, 1].
  auto arc_fn = [&](double u) {
    const double theta = beta * u;
    ContourPoint pt;
    pt.xi = std::polar(1.0, theta);
    pt.log_xi = cplx(0.0, theta);
    pt.w = std::polar(1.0, theta / rho);
    pt.dxi = cplx(0.0, beta) * pt.xi;
    return pt;
  };
  for (double a : {-1.0, 0.0}) {
    auto r = integrate_panel(a, a + 1.0, x, rho, arc_fn);
    arc += r.acc;
    err += r.err;
    out.arc_nodes += r.nodes;
  }
  if (out.arc_nodes + out.ray_nodes > kMaxContourNodes)
    fail(ErrorCode::no_convergence, "contour quadrature exceeded node budget");

  // Orientation: inbound along arg = -beta, the arc, outbound along arg = +beta.
  out.j = plus.j - minus.j + arc.j;
  out.jx = plus.jx - minus.jx + arc.jx;
  out.jr = plus.jr - minus.jr + arc.jr;
  out.err = err;
  out.contour.arc_nodes = out.arc_nodes;
  out.contour.ray_nodes = out.ray_nodes;
  return out;
}

}  // namespace

QTerm ml_q_contour_x(double rho, double x) {
  if (!(rho > 0.0 && rho <= 1.0))
    fail(ErrorCode::invalid_argument, "rho must be in (0,1], got " + fmt_double(rho));
  if (!(x > 1.0) || !std::isfinite(x))
    fail(ErrorCode::domain, "contour route requires lambda^sigma t^rho > 1, got " + fmt_double(x));
  const ContourIntegrals ci = contour_integrals(rho, x);
  const cplx c = 1.0 / cplx(0.0, 2.0 * kPi * rho);
  const cplx q = -c * ci.j / x;
  const cplx dq_dx = c * ci.j / (x * x) - c * ci.jx / x;
  const cplx dq_drho = (c / rho) * ci.j / x - c * ci.jr / x;
  QTerm out;
  out.q = q.real();
  out.imag_residual = q.imag();
  out.dq_dx = dq_dx.real();
  out.dq_drho_x = dq_drho.real();
  out.abs_err_est = std::abs(c) * ci.err / x;
  out.nodes = ci.arc_nodes + ci.ray_nodes;
  out.contour = ci.contour;
  return out;
}

double ml_q_contour(const MlArgument& arg, const HankelContour& contour) {
  const QTerm q = ml_q_contour_x(arg.rho(), arg.x());
  (void)contour;  // the rule is adaptive; the caller's contour only pins beta
  return q.q;
}

// ---------------------------------------------------------------------------
// Dispatch

namespace {

void check_rho_x(double rho, double x) {
  if (!(rho > 0.0 && rho <= 1.0))
    fail(ErrorCode::invalid_argument, "rho must be in (0,1], got " + fmt_double(rho));
  if (!(x >= 0.0) || !std::isfinite(x))
    fail(ErrorCode::invalid_argument, "x must be finite and >= 0, got " + fmt_double(x));
}

}  // namespace

MlValue ml_eval_x(double rho, double x) {
  check_rho_x(rho, x);
  MlValue out;
  if (x == 0.0) {
    out.value = 1.0;
    out.route = MlRoute::series;
    out.nodes = 1;
    return out;
  }
  if (rho == 1.0) {
    out.value = std::exp(-x);
    out.q_term = out.value;
    out.route = MlRoute::exponential;
    return out;
  }
  out.p_term = ml_p_x(rho, x);
  if (x <= series_radius(rho)) {
    const SeriesSums s = series_sums(rho, -x, 2000, false);
    out.value = s.value;
    out.q_term = out.value - out.p_term;
    out.route = MlRoute::series;
    out.nodes = s.terms;
    out.abs_err_est = 1e-16 * std::exp(std::pow(x, 1.0 / rho)) / rho;
  } else if (x >= kAsymptoticThreshold) {
    const AsymptoticSums a = asymptotic_sums(rho, x, 3);
    out.value = a.value;
    out.p_term = a.first;
    out.q_term = a.value - a.first;
    out.route = MlRoute::asymptotic;
    out.abs_err_est = std::pow(x, -4.0);
  } else {
    const QTerm q = ml_q_contour_x(rho, x);
    out.q_term = q.q;
    out.value = out.p_term + out.q_term;
    out.route = MlRoute::contour;
    out.nodes = q.nodes;
    out.abs_err_est = q.abs_err_est;
  }
  if (!(out.value > 0.0)) {
    // Round-off guard: E_rho(-x) >= 1 / (1 + Gamma(1 - rho) x) for rho < 1.
    out.value = 1.0 / (1.0 + gamma_fn(1.0 - rho) * x);
  }
  return out;
}

MlValue ml_eval(const MlArgument& arg) { return ml_eval_x(arg.rho(), arg.x()); }

MlDerivatives ml_derivatives_x(double rho, double x) {
  check_rho_x(rho, x);
  MlDerivatives out;
  if (x <= series_radius(rho)) {
    const SeriesSums s = series_sums(rho, -x, 2000, true);
    out.value = s.value;
    out.d_dx = -s.d_dz;
    out.d_drho_x = s.d_drho;
    out.route = MlRoute::series;
    return out;
  }
  const double y = 1.0 - rho;
  if (x >= kAsymptoticThreshold) {
    const AsymptoticSums a = asymptotic_sums(rho, x, 3);
    out.value = rho == 1.0 ? std::exp(-x) : a.value;
    out.d_dx = rho == 1.0 ? -std::exp(-x) : a.d_dx;
    out.d_drho_x = a.d_drho;
    out.route = MlRoute::asymptotic;
    return out;
  }
  const QTerm q = ml_q_contour_x(rho, x);
  out.value = rgamma(y) / x + q.q;
  out.d_dx = -rgamma(y) / (x * x) + q.dq_dx;
  out.d_drho_x = -rgamma_deriv(y) / x + q.dq_drho_x;
  out.route = MlRoute::contour;
  return out;
}

double ml_drho(const MlArgument& arg) {
  if (arg.t() == 0.0) return 0.0;
  const double x = arg.x();
  const MlDerivatives d = ml_derivatives_x(arg.rho(), x);
  return d.d_drho_x + d.d_dx * x * std::log(arg.t());
}

double ml_dsigma(const MlArgument& arg) {
  if (arg.lambda() == 1.0 || arg.t() == 0.0) return 0.0;
  const double x = arg.x();
  const MlDerivatives d = ml_derivatives_x(arg.rho(), x);
  return d.d_dx * x * std::log(arg.lambda());
}

double ml_dp_drho(const MlArgument& arg) {
  const double y = 1.0 - arg.rho();
  return (-rgamma_deriv(y) - rgamma(y) * std::log(arg.t())) / arg.x();
}

QPartials ml_q_partials(const MlArgument& arg) {
  const double x = arg.x();
  const QTerm q = ml_q_contour_x(arg.rho(), x);
  QPartials out;
  out.q = q.q;
  out.dq_drho = q.dq_drho_x + q.dq_dx * x * std::log(arg.t());
  out.dq_dsigma = q.dq_dx * x * std::log(arg.lambda());
  return out;
}

// ---------------------------------------------------------------------------
// Calibration

namespace {

CalibratedConstants calibrate() {
  CalibratedConstants c;
  const std::vector<double> rhos{0.05, 0.15, 0.25, 0.35, 0.45, 0.55, 0.65, 0.75, 0.85, 0.95, 0.999};
  c.ml_bound = 1.0;  // attained at x = 0
  for (double rho : rhos) {
    for (int i = 0; i <= 48; ++i) {
      const double x = std::pow(10.0, -3.0 + 7.0 * i / 48.0);
      c.ml_bound = std::max(c.ml_bound, (1.0 + x) * ml_eval_x(rho, x).value);
      if (x > 2.0 && x < kAsymptoticThreshold) {
        const QTerm q = ml_q_contour_x(rho, x);
        c.q_decay = std::max(c.q_decay, std::abs(q.q) * x * x);
      }
    }
  }
  for (double rho : rhos) {
    for (double lambda : {2.0, kPi * kPi, 100.0}) {
      for (int i = 0; i <= 12; ++i) {
        const double t = std::pow(10.0, 0.05 + 3.95 * i / 12.0);
        const MlArgument arg = MlArgument::make(rho, 1.0, lambda, t);
        const double x = arg.x();
        if (!(x > 1.0) || x >= kAsymptoticThreshold) continue;
        const QPartials qp = ml_q_partials(arg);
        c.drho_q = std::max(c.drho_q, std::abs(qp.dq_drho) * x * x / (1.0 / rho + std::log(t)));
        c.dsigma_q = std::max(c.dsigma_q, std::abs(qp.dq_dsigma) * lambda * lambda *
                                              std::pow(t, rho) / std::abs(std::log(lambda)));
      }
    }
  }
  return c;
}

}  // namespace

const CalibratedConstants& calibrated_constants() {
  static const CalibratedConstants constants = calibrate();
  return constants;
}

}  // namespace fracdiff
