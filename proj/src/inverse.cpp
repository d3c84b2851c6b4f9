#include "fracdiff/inverse.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <random>
#include <string>
#include <thread>

#include "fracdiff/specfun.hpp"

namespace fracdiff {

namespace {

constexpr int kGridPoints = 64;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// E_rho(-mu t^rho) for mu = lambda^sigma.
double decay(double rho, double mu, double t) { return ml_eval_x(rho, mu * std::pow(t, rho)).value; }

double grid_point(ParamBox box, int i, int n) { return box.lo + (box.hi - box.lo) * i / (n - 1); }

void check_rho_box(ParamBox box) {
  if (!(box.lo > 0.0 && box.lo < box.hi && box.hi <= 1.0))
    fail(ErrorCode::invalid_argument, "rho box must satisfy 0 < lo < hi <= 1");
}

void check_sigma_box(ParamBox box) {
  if (!(box.lo > 0.0 && box.lo < box.hi && std::isfinite(box.hi)))
    fail(ErrorCode::invalid_argument, "sigma box must satisfy 0 < lo < hi");
}

// Strictly decreasing in rho with negative derivative on a clamped grid.
bool rho_map_monotone(double sigma, double lambda, double t, ParamBox rho_box) {
  const ParamBox grid{rho_box.lo, std::min(rho_box.hi, kRhoClamp)};
  double prev = std::numeric_limits<double>::infinity();
  for (int i = 0; i < kGridPoints; ++i) {
    const auto arg = MlArgument::make(grid_point(grid, i, kGridPoints), sigma, lambda, t);
    const double v = ml_eval(arg).value;
    if (!(v < prev) || !(ml_drho(arg) < 0.0)) return false;
    prev = v;
  }
  return true;
}

int sign_of(double v) { return (v > 0.0) - (v < 0.0); }

struct LogResidual {
  double f0 = 0.0;
  double f1 = 0.0;
  double norm() const { return std::max(std::abs(f0), std::abs(f1)); }
};

LogResidual log_residual(const ObservationSet& obs, double rho, double sigma) {
  const double mu = std::pow(obs.lambda_obs, sigma);
  return {std::log(decay(rho, mu, obs.t0) / obs.ratio0()),
          std::log(decay(rho, mu, *obs.t1) / obs.ratio1())};
}

class TraceRecorder {
 public:
  TraceRecorder(std::vector<double>& trace, const AdmissibilityReport& report)
      : trace_(trace), report_(report) {}

  void record(double det) {
    trace_.push_back(det);
    const int s = sign_of(det);
    if (reference_ == 0) reference_ = s;
    if (s == 0 || s != reference_)
      throw InverseError(ErrorCode::determinant_sign,
                         "determinant changed sign along the solve (value " + num(det) + ")", report_);
  }

 private:
  std::vector<double>& trace_;
  const AdmissibilityReport& report_;
  int reference_ = 0;
};

// Damped Newton on the log-residual system, projected onto the box.
// Returns the number of iterations taken.
int newton_iterate(const ObservationSet& obs, double& rho, double& sigma, ParamBox rho_box,
                   ParamBox sigma_box, int max_iterations, TraceRecorder* trace) {
  const double rho_hi = std::min(rho_box.hi, kRhoClamp);
  LogResidual f = log_residual(obs, rho, sigma);
  int it = 0;
  for (; it < max_iterations && f.norm() > 1e-15; ++it) {
    const auto a0 = MlArgument::make(rho, sigma, obs.lambda_obs, obs.t0);
    const auto a1 = MlArgument::make(rho, sigma, obs.lambda_obs, *obs.t1);
    const double e0 = ml_eval(a0).value;
    const double e1 = ml_eval(a1).value;
    const double j00 = ml_drho(a0) / e0, j01 = ml_dsigma(a0) / e0;
    const double j10 = ml_drho(a1) / e1, j11 = ml_dsigma(a1) / e1;
    const double det = j00 * j11 - j01 * j10;
    if (trace) trace->record(det * e0 * e1);
    if (det == 0.0 || !std::isfinite(det)) break;
    const double d_rho = -(j11 * f.f0 - j01 * f.f1) / det;
    const double d_sigma = -(-j10 * f.f0 + j00 * f.f1) / det;
    double step = 1.0;
    bool improved = false;
    double next_rho = rho, next_sigma = sigma;
    LogResidual next;
    for (int halving = 0; halving < 40; ++halving, step *= 0.5) {
      next_rho = std::clamp(rho + step * d_rho, rho_box.lo, rho_hi);
      next_sigma = std::clamp(sigma + step * d_sigma, sigma_box.lo, sigma_box.hi);
      next = log_residual(obs, next_rho, next_sigma);
      if (next.norm() < f.norm()) {
        improved = true;
        break;
      }
    }
    if (!improved) break;
    const double moved = std::max(std::abs(next_rho - rho), std::abs(next_sigma - sigma));
    rho = next_rho;
    sigma = next_sigma;
    f = next;
    if (moved < 1e-15) break;
  }
  return it;
}

}  // namespace

const char* to_string(SolveMethod method) noexcept {
  switch (method) {
    case SolveMethod::bisection: return "bisection";
    case SolveMethod::nested: return "nested";
    case SolveMethod::newton: return "newton";
  }
  return "unknown";
}

void ObservationSet::validate() const {
  if (!(t0 > 0.0) || !std::isfinite(t0)) fail(ErrorCode::invalid_argument, "t0 must be positive");
  if (!(d0 >= 0.0) || !std::isfinite(d0)) fail(ErrorCode::invalid_argument, "d0 must be non-negative");
  if (!(phi1_abs > 0.0) || !std::isfinite(phi1_abs))
    fail(ErrorCode::invalid_argument, "phi1_abs must be positive");
  if (!(lambda_obs > 0.0) || !std::isfinite(lambda_obs))
    fail(ErrorCode::invalid_argument, "lambda_obs must be positive");
  if (t1.has_value() != d1.has_value()) fail(ErrorCode::invalid_argument, "t1 and d1 must be given together");
  if (t1) {
    if (!(*t1 > 0.0) || !std::isfinite(*t1)) fail(ErrorCode::invalid_argument, "t1 must be positive");
    if (!(*d1 >= 0.0) || !std::isfinite(*d1)) fail(ErrorCode::invalid_argument, "d1 must be non-negative");
    // t0 == t1 passes here and is rejected by the spacing gate instead.
    if (t0 < *t1) fail(ErrorCode::invalid_argument, "t0 must not be earlier than t1");
    if (lambda_obs == 1.0)
      fail(ErrorCode::invalid_argument, "two-point observations need lambda_obs != 1; observe another mode");
  }
}

AdmissibilityReport admissibility_check(const ObservationSet& obs, ParamBox rho_box, double sigma) {
  obs.validate();
  check_rho_box(rho_box);
  if (!(sigma > 0.0)) fail(ErrorCode::invalid_argument, "sigma must be positive");
  AdmissibilityReport rep;
  const double mu = std::pow(obs.lambda_obs, sigma);
  const double r = obs.ratio0();
  rep.lower0 = std::exp(-mu * obs.t0);
  rep.upper0 = decay(rho_box.lo, mu, obs.t0);
  rep.ok0 = rep.lower0 <= r && r < rep.upper0;
  rep.paper_condition_ok = rep.lower0 <= r && r < decay(rho_box.lo, 1.0, obs.t0);
  rep.monotone_ok = rho_map_monotone(sigma, obs.lambda_obs, obs.t0, rho_box);
  return rep;
}

double spacing_constant(double lambda, double t1, ParamBox rho_box, ParamBox sigma_box) {
  check_rho_box(rho_box);
  check_sigma_box(sigma_box);
  // D = ln(lambda) (x0 E'(x0)) (x1 E'(x1)) [ln(t0/t1) + h(x0) - h(x1)] with
  // h(x) = (dE/drho at fixed x) / (x E'(x)); h tends to -psi(1 - rho) as
  // x grows. Bounding the oscillation of h on [x1, inf) bounds the bracket.
  const ParamBox rho_grid{rho_box.lo, std::min(rho_box.hi, kRhoClamp)};
  constexpr int kRho = 12, kSigma = 6, kDecades = 8, kPerDecade = 10;
  double worst = 0.0;
  for (int i = 0; i < kRho; ++i) {
    const double rho = grid_point(rho_grid, i, kRho);
    const double limit = -digamma_fn(1.0 - rho);
    for (int j = 0; j < kSigma; ++j) {
      const double mu = std::pow(lambda, grid_point(sigma_box, j, kSigma));
      const double x1 = mu * std::pow(t1, rho);
      double lo = limit, hi = limit;
      for (int k = 0; k <= kDecades * kPerDecade; ++k) {
        const double x = x1 * std::pow(10.0, static_cast<double>(k) / kPerDecade);
        const auto d = ml_derivatives_x(rho, x);
        const double h = d.d_drho_x / (d.d_dx * x);
        lo = std::min(lo, h);
        hi = std::max(hi, h);
      }
      worst = std::max(worst, hi - lo);
    }
  }
  const double gap = 1.0 - rho_grid.hi;
  return worst * gap * gap;
}

AdmissibilityReport admissibility_check(const ObservationSet& obs, ParamBox rho_box,
                                        ParamBox sigma_box) {
  obs.validate();
  check_rho_box(rho_box);
  check_sigma_box(sigma_box);
  if (!obs.two_point()) fail(ErrorCode::invalid_argument, "two-parameter check needs t1 and d1");
  AdmissibilityReport rep;
  rep.two_point = true;
  const double mu_a = std::pow(obs.lambda_obs, sigma_box.lo);
  const double mu_b = std::pow(obs.lambda_obs, sigma_box.hi);
  const double mu_min = std::min(mu_a, mu_b), mu_max = std::max(mu_a, mu_b);
  const double t1 = *obs.t1;
  const double r0 = obs.ratio0(), r1 = obs.ratio1();
  rep.lower0 = std::exp(-mu_max * obs.t0);
  rep.upper0 = decay(rho_box.lo, mu_min, obs.t0);
  rep.lower1 = std::exp(-mu_max * t1);
  rep.upper1 = decay(rho_box.lo, mu_min, t1);
  rep.ok0 = rep.lower0 <= r0 && r0 < rep.upper0;
  rep.ok1 = rep.lower1 <= r1 && r1 < rep.upper1;
  rep.paper_condition_ok = std::exp(-mu_a * obs.t0) <= r0 && r0 < decay(rho_box.lo, 1.0, obs.t0) &&
                           std::exp(-mu_a * t1) <= r1 && r1 < decay(rho_box.lo, 1.0, t1);
  rep.monotone_ok = true;
  for (double sigma : {sigma_box.lo, sigma_box.hi})
    for (double t : {obs.t0, t1})
      rep.monotone_ok = rep.monotone_ok && rho_map_monotone(sigma, obs.lambda_obs, t, rho_box);
  if (obs.lambda_obs != 1.0) {
    rep.spacing_constant = spacing_constant(obs.lambda_obs, t1, rho_box, sigma_box);
    const double gap = 1.0 - std::min(rho_box.hi, kRhoClamp);
    const double needed = rep.spacing_constant / (gap * gap);
    rep.spacing_ratio = std::exp(needed);
    rep.spacing_ok = obs.t0 > t1 && std::log(obs.t0 / t1) > needed;
    int sign = 2;
    constexpr int kBox = 8;
    const ParamBox rho_grid{rho_box.lo, std::min(rho_box.hi, kRhoClamp)};
    for (int i = 0; i < kBox && sign != 0; ++i)
      for (int j = 0; j < kBox && sign != 0; ++j) {
        const int s = sign_of(determinant_D(grid_point(rho_grid, i, kBox), grid_point(sigma_box, j, kBox), obs));
        sign = sign == 2 ? s : (s == sign ? sign : 0);
      }
    rep.determinant_sign = sign == 2 ? 0 : sign;
  }
  return rep;
}

RecoveryResult invert_rho(const ObservationSet& obs, double sigma, ParamBox rho_box,
                          const SolveOptions& options) {
  RecoveryResult res;
  res.method = SolveMethod::bisection;
  res.report = admissibility_check(obs, rho_box, sigma);
  const auto& rep = res.report;
  if (!rep.ok0)
    throw InverseError(ErrorCode::inadmissible,
                       "observation ratio " + num(obs.ratio0()) + " outside [" + num(rep.lower0) + ", " +
                           num(rep.upper0) + ")",
                       rep);
  if (!rep.monotone_ok)
    throw InverseError(ErrorCode::non_monotone,
                       "rho map is not monotone at t0 = " + num(obs.t0) + "; t0 is below the monotone regime",
                       rep);
  const double mu = std::pow(obs.lambda_obs, sigma);
  const double r = obs.ratio0();
  auto residual = [&](double rho) { return decay(rho, mu, obs.t0) - r; };
  double lo = rho_box.lo, hi = rho_box.hi;
  double f_hi = residual(hi);
  if (f_hi > 0.0)
    throw InverseError(ErrorCode::bracket, "root lies above the rho box upper limit " + num(hi), rep);
  double rho = hi;
  double f = f_hi;
  int it = 0;
  if (f_hi != 0.0) {
    for (; it < options.max_bisection; ++it) {
      rho = 0.5 * (lo + hi);
      f = residual(rho);
      if (f == 0.0 || hi - lo <= 4e-16 * hi) break;
      if (f > 0.0) lo = rho;
      else hi = rho;
      if (std::abs(f) <= options.tol * r * 1e-3) break;
    }
    if (options.newton_polish) {
      for (int k = 0; k < options.max_newton && f != 0.0; ++k, ++it) {
        const double slope = ml_drho(MlArgument::make(std::min(rho, kRhoClamp), sigma, obs.lambda_obs, obs.t0));
        if (!(slope < 0.0)) break;
        double step = -f / slope;
        bool improved = false;
        for (int halving = 0; halving < 30; ++halving, step *= 0.5) {
          const double cand = std::clamp(rho + step, rho_box.lo, rho_box.hi);
          const double fc = residual(cand);
          if (std::abs(fc) < std::abs(f)) {
            rho = cand;
            f = fc;
            improved = true;
            break;
          }
        }
        if (!improved || std::abs(step) < 1e-16) break;
      }
    }
  }
  res.rho = rho;
  res.residual0 = f / r;
  res.iterations = it;
  if (!(std::abs(res.residual0) <= options.tol))
    throw InverseError(ErrorCode::no_convergence, "residual " + num(res.residual0) + " above tolerance", rep);
  return res;
}

double determinant_D(double rho, double sigma, const ObservationSet& obs) {
  if (!obs.t1) fail(ErrorCode::invalid_argument, "determinant needs two observation times");
  if (obs.lambda_obs == 1.0)
    fail(ErrorCode::invalid_argument, "determinant is identically zero for lambda = 1");
  const auto a0 = MlArgument::make(rho, sigma, obs.lambda_obs, obs.t0);
  const auto a1 = MlArgument::make(rho, sigma, obs.lambda_obs, *obs.t1);
  return ml_drho(a0) * ml_dsigma(a1) - ml_dsigma(a0) * ml_drho(a1);
}

RecoveryResult invert_rho_sigma(const ObservationSet& obs, ParamBox rho_box, ParamBox sigma_box,
                                const SolveOptions& options) {
  obs.validate();
  if (!obs.two_point()) fail(ErrorCode::invalid_argument, "two-parameter problem needs t1 and d1");
  RecoveryResult res;
  res.method = SolveMethod::nested;
  res.report = admissibility_check(obs, rho_box, sigma_box);
  const auto& rep = res.report;
  if (!rep.ok0 || !rep.ok1)
    throw InverseError(ErrorCode::inadmissible, "observation ratios outside the attainable window", rep);
  if (!rep.spacing_ok)
    throw InverseError(ErrorCode::spacing,
                       "t0 / t1 = " + num(obs.t0 / *obs.t1) + " does not exceed the required " +
                           num(rep.spacing_ratio),
                       rep);
  if (!rep.monotone_ok) throw InverseError(ErrorCode::non_monotone, "rho map is not monotone on the box", rep);

  const double t1 = *obs.t1;
  const double r0 = obs.ratio0(), r1 = obs.ratio1();
  const double log_lambda = std::log(obs.lambda_obs);
  const double mu_a = std::pow(obs.lambda_obs, sigma_box.lo);
  const double mu_b = std::pow(obs.lambda_obs, sigma_box.hi);
  const double log_mu_min = std::log(std::min(mu_a, mu_b)), log_mu_max = std::log(std::max(mu_a, mu_b));
  TraceRecorder trace(res.det_trace, rep);

  // For fixed rho, mu -> E_rho(-mu t1^rho) is strictly decreasing.
  enum class Inner { found, above, below };
  auto inner = [&](double rho, double& mu) {
    if (decay(rho, std::exp(log_mu_max), t1) > r1) return Inner::above;
    if (decay(rho, std::exp(log_mu_min), t1) < r1) return Inner::below;
    double lo = log_mu_min, hi = log_mu_max;
    for (int k = 0; k < options.max_bisection && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++k) {
      const double mid = 0.5 * (lo + hi);
      if (decay(rho, std::exp(mid), t1) > r1) lo = mid;
      else hi = mid;
    }
    mu = std::exp(0.5 * (lo + hi));
    return Inner::found;
  };
  // Decreasing in rho; +1/-1 stand in when mu leaves the box above/below.
  auto outer = [&](double rho, double& mu) {
    switch (inner(rho, mu)) {
      case Inner::above: return 1.0;
      case Inner::below: return -1.0;
      case Inner::found: break;
    }
    trace.record(determinant_D(std::min(rho, kRhoClamp), std::log(mu) / log_lambda, obs));
    return decay(rho, mu, obs.t0) / r0 - 1.0;
  };

  double lo = rho_box.lo, hi = std::min(rho_box.hi, kRhoClamp);
  double mu = 0.0;
  const double f_lo = outer(lo, mu);
  const double f_hi = outer(hi, mu);
  if (!(f_lo >= 0.0 && f_hi <= 0.0))
    throw InverseError(ErrorCode::bracket, "no sign change of the outer residual on the rho box", rep);
  double rho = f_lo == 0.0 ? lo : hi;
  double f = f_lo == 0.0 ? f_lo : f_hi;
  int it = 0;
  if (f_lo != 0.0 && f_hi != 0.0) {
    for (; it < options.max_bisection && hi - lo > 1e-13; ++it) {
      rho = 0.5 * (lo + hi);
      f = outer(rho, mu);
      if (f == 0.0) break;
      if (f > 0.0) lo = rho;
      else hi = rho;
    }
    rho = 0.5 * (lo + hi);
  }
  double inner_mu = 0.0;
  if (inner(rho, inner_mu) != Inner::found)
    throw InverseError(ErrorCode::bracket, "inner solve left the sigma box at the outer root", rep);
  double sigma = std::log(inner_mu) / log_lambda;
  if (options.newton_polish)
    it += newton_iterate(obs, rho, sigma, rho_box, sigma_box, options.max_newton, &trace);
  const auto final_res = log_residual(obs, rho, sigma);
  res.rho = rho;
  res.sigma = sigma;
  res.residual0 = std::expm1(final_res.f0);
  res.residual1 = std::expm1(final_res.f1);
  res.iterations = it;
  if (!(std::max(std::abs(res.residual0), std::abs(res.residual1)) <= options.tol))
    throw InverseError(ErrorCode::no_convergence, "two-parameter residual above tolerance", rep);
  return res;
}

RecoveryResult newton_rho_sigma(const ObservationSet& obs, double rho_start, double sigma_start,
                                ParamBox rho_box, ParamBox sigma_box, const SolveOptions& options,
                                int max_iterations) {
  obs.validate();
  check_rho_box(rho_box);
  check_sigma_box(sigma_box);
  if (!obs.two_point()) fail(ErrorCode::invalid_argument, "two-parameter problem needs t1 and d1");
  RecoveryResult res;
  res.method = SolveMethod::newton;
  res.report.two_point = true;
  TraceRecorder trace(res.det_trace, res.report);
  double rho = rho_start, sigma = sigma_start;
  res.iterations = newton_iterate(obs, rho, sigma, rho_box, sigma_box, max_iterations, &trace);
  const auto f = log_residual(obs, rho, sigma);
  res.rho = rho;
  res.sigma = sigma;
  res.residual0 = std::expm1(f.f0);
  res.residual1 = std::expm1(f.f1);
  if (!(f.norm() <= options.tol))
    throw InverseError(ErrorCode::no_convergence,
                       "Newton from (" + num(rho_start) + ", " + num(sigma_start) + ") stalled", res.report);
  return res;
}

MultistartResult multistart(const ObservationSet& obs, ParamBox rho_box, ParamBox sigma_box, int restarts,
                            std::uint64_t seed, int threads, double spread_tol, const SolveOptions& options) {
  if (restarts < 1) fail(ErrorCode::invalid_argument, "at least one restart is required");
  check_rho_box(rho_box);
  check_sigma_box(sigma_box);
  std::mt19937_64 rng(seed);
  const double rho_hi = std::min(rho_box.hi, kRhoClamp);
  const double rho_margin = 1e-3 * (rho_hi - rho_box.lo);
  const double sigma_margin = 1e-3 * (sigma_box.hi - sigma_box.lo);
  std::uniform_real_distribution<double> draw_rho(rho_box.lo + rho_margin, rho_hi - rho_margin);
  std::uniform_real_distribution<double> draw_sigma(sigma_box.lo + sigma_margin, sigma_box.hi - sigma_margin);
  std::vector<std::pair<double, double>> starts(restarts);
  for (auto& s : starts) {
    s.first = draw_rho(rng);
    s.second = draw_sigma(rng);
  }
  MultistartResult out;
  out.runs.resize(restarts);
  std::vector<std::exception_ptr> errors(restarts);
  auto work = [&](int first, int stride) {
    for (int i = first; i < restarts; i += stride) {
      try {
        out.runs[i] = newton_rho_sigma(obs, starts[i].first, starts[i].second, rho_box, sigma_box, options);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int workers = std::clamp(threads, 1, restarts);
  if (workers == 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work, w, workers);
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  out.consistent = true;
  for (const auto& run : out.runs) {
    const double spread = std::max(std::abs(run.rho - out.runs[0].rho), std::abs(*run.sigma - *out.runs[0].sigma));
    out.max_spread = std::max(out.max_spread, spread);
  }
  out.consistent = out.max_spread <= spread_tol;
  return out;
}

double empirical_T0(double lambda, double sigma, double rho0) {
  if (!(lambda > 0.0) || !(sigma > 0.0)) fail(ErrorCode::invalid_argument, "lambda and sigma must be positive");
  if (!(rho0 > 0.0 && rho0 < 1.0)) fail(ErrorCode::invalid_argument, "rho0 must be in (0,1)");
  const ParamBox grid{std::min(rho0, kRhoClamp), kRhoClamp};
  auto negative_everywhere = [&](double t) {
    for (int i = 0; i < kGridPoints; ++i) {
      const double rho = grid.lo == grid.hi ? grid.lo : grid_point(grid, i, kGridPoints);
      if (!(ml_drho(MlArgument::make(rho, sigma, lambda, t)) < 0.0)) return false;
    }
    return true;
  };
  for (int e = 1; e <= 20; ++e) {
    const double t = std::ldexp(1.0, e);
    if (negative_everywhere(t) && negative_everywhere(2 * t) && negative_everywhere(4 * t)) return t;
  }
  fail(ErrorCode::not_found, "no monotone regime found up to t = 2^20");
}

}  // namespace fracdiff
