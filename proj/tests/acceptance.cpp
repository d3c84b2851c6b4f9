// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.
// Criteria 6 and 8 drive the command-line tool; the rest call the library.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "cli_runner.hpp"
#include "fracdiff/experiment.hpp"
#include "fracdiff/forward.hpp"
#include "fracdiff/inverse.hpp"
#include "fracdiff/oracle.hpp"
#include "fracdiff/selftest.hpp"
#include "fracdiff/specfun.hpp"

using namespace fracdiff;
using nlohmann::json;

namespace {

constexpr double kPi2 = std::numbers::pi * std::numbers::pi;
constexpr std::uint64_t kSeed = 20240601;

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;

  // Records a measured quantity against its limit; fails the criterion if exceeded.
  void within(const std::string& what, double measured, double limit) {
    char buf[256];
    const bool ok = measured <= limit;  // NaN fails
    std::snprintf(buf, sizeof buf, "%s %s %.3g (limit %.3g)", ok ? "ok  " : "FAIL", what.c_str(), measured, limit);
    notes.emplace_back(buf);
    pass = pass && ok;
  }
  void require(const std::string& what, bool ok) {
    notes.push_back(std::string(ok ? "ok   " : "FAIL ") + what);
    pass = pass && ok;
  }
  void note(const std::string& text) { notes.push_back("     " + text); }
};

class Sampler {
 public:
  explicit Sampler(std::uint64_t seed) : rng_(seed) {}
  double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng_); }

 private:
  std::mt19937_64 rng_;
};

double decay(double rho, double sigma, double lambda, double t) {
  return ml_eval(MlArgument::make(rho, sigma, lambda, t)).value;
}

double rel_err(double got, double want) { return std::abs(got - want) / std::max(std::abs(want), 1e-300); }

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = a + (b - a) * i / (n - 1);
  return v;
}

// Criterion 1: Mittag-Leffler against the high-precision reference.
void ml_correctness(Outcome& o) {
  Sampler s(kSeed);
  double worst = 0.0;
  for (int i = 0; i < 500; ++i) {
    const double rho = s.uniform(0.1, 0.95);
    const double x = s.uniform(0.0, 50.0);
    worst = std::max(worst, std::abs(ml_eval_x(rho, x).value - oracle::ml_reference(rho, -x)));
  }
  o.within("max |E - reference| over 500 random points", worst, 1e-10);

  double exp_err = 0.0;
  for (double z : linspace(-10.0, 0.0, 201)) exp_err = std::max(exp_err, std::abs(ml_eval_x(1.0, -z).value - std::exp(z)));
  o.within("max |E_1(z) - exp(z)|, z in [-10, 0]", exp_err, 1e-12);

  double erfc_err = 0.0;
  for (double x : linspace(0.0, 5.0, 201))
    erfc_err = std::max(erfc_err, std::abs(ml_eval_x(0.5, x).value - oracle::erfcx_reference(x)));
  o.within("max |E_1/2(-x) - exp(x^2) erfc(x)|, x in [0, 5]", erfc_err, 1e-10);
}

// Criterion 2: decomposition into the algebraic and contour parts.
void decomposition(Outcome& o) {
  Sampler s(kSeed + 1);
  const double c = calibrated_constants().q_decay;
  double worst = 0.0, worst_ratio = 0.0;
  for (int i = 0; i < 200; ++i) {
    const double rho = s.uniform(0.1, 0.95);
    const double x = s.uniform(2.0, 50.0);
    const double q = ml_q_contour_x(rho, x).q;
    worst = std::max(worst, std::abs(oracle::ml_reference(rho, -x) - (ml_p_x(rho, x) + q)));
    worst_ratio = std::max(worst_ratio, std::abs(q) * x * x / c);
  }
  o.within("max |reference - (p + q)| over 200 points, x in [2, 50]", worst, 1e-8);
  o.within("max |q| x^2 / calibrated constant", worst_ratio, 1.0);

  // At rho = 1/2 the x^-2 coefficient 1/Gamma(1 - 2 rho) vanishes and q decays
  // like x^-3, so the -2 rho slope has no content there.
  const std::vector<double> times{1e2, 1e3, 1e4};
  for (double rho : {0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9}) {
    std::vector<double> q;
    for (double t : times) q.push_back(ml_q_partials(MlArgument::make(rho, 1.0, kPi2, t)).q);
    const double slope = fit_log_slope(times, q);
    char what[96];
    std::snprintf(what, sizeof what, "|slope + 2 rho| at rho = %.1f (slope %.4f)", rho, slope);
    if (rho == 0.5)
      o.note(std::string(what) + ": leading coefficient zero, slope -3 rho = -1.5 expected");
    else
      o.within(what, std::abs(slope + 2 * rho), 0.1);
  }
}

// Criterion 3: monotonicity in the order.
void order_monotonicity(Outcome& o) {
  const auto grid = linspace(0.1, 0.95, 64);
  int bad_value = 0, bad_derivative = 0;
  for (double sigma : {0.5, 1.0, 2.0})
    for (double t : {10.0, 1e2, 1e3}) {
      double previous = INFINITY;
      for (double rho : grid) {
        const auto arg = MlArgument::make(rho, sigma, kPi2, t);
        const double v = ml_eval(arg).value;
        bad_value += !(v < previous);
        bad_derivative += !(ml_drho(arg) < 0.0);
        previous = v;
      }
    }
  o.require("E strictly decreasing on 9 grids of 64 orders (" + std::to_string(bad_value) + " violations)",
            bad_value == 0);
  o.require("drho < 0 at all 576 grid points (" + std::to_string(bad_derivative) + " violations)",
            bad_derivative == 0);

  int bad_p = 0, checked = 0;
  for (double t : {2.0, 5.0, 10.0, 1e2, 1e3, 1e4})
    for (double sigma : {0.5, 1.0, 2.0})
      for (double rho : grid) {
        const auto arg = MlArgument::make(rho, sigma, kPi2, t);
        bad_p += !(-ml_dp_drho(arg) >= 1.0 / arg.x());
        ++checked;
      }
  o.require("-dp/drho >= 1/x for t >= 2 at " + std::to_string(checked) + " points (" + std::to_string(bad_p) +
                " violations)",
            bad_p == 0);
}

// Criterion 4: derivatives and the Jacobian determinant.
void derivatives(Outcome& o) {
  Sampler s(kSeed + 2);
  const double h = 1e-6;
  double worst_rho = 0.0, worst_sigma = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double rho = s.uniform(0.1, 0.95);
    const double sigma = s.uniform(0.5, 2.0);
    const double lambda = s.uniform(0.5, 50.0);
    const double t = std::exp(s.uniform(std::log(0.05), std::log(1e4)));
    const auto arg = MlArgument::make(rho, sigma, lambda, t);
    worst_rho = std::max(worst_rho, rel_err(ml_drho(arg), oracle::fd_derivative(
                                                              [&](double r) { return decay(r, sigma, lambda, t); }, rho, h)));
    worst_sigma = std::max(worst_sigma, rel_err(ml_dsigma(arg), oracle::fd_derivative(
                                                                    [&](double v) { return decay(rho, v, lambda, t); }, sigma, h)));
  }
  o.within("max rel err drho vs central differences, 100 points", worst_rho, 1e-5);
  o.within("max rel err dsigma vs central differences, 100 points", worst_sigma, 1e-5);

  bool zero = true;
  for (double rho : linspace(0.1, 1.0, 10))
    for (double t : {1e-3, 1.0, 1e2, 1e5}) zero = zero && ml_dsigma(MlArgument::make(rho, 1.3, 1.0, t)) == 0.0;
  o.require("dsigma at lambda = 1 is exactly 0", zero);

  double worst_det = 0.0, worst_equal = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double rho = s.uniform(0.2, 0.9);
    const double sigma = s.uniform(0.5, 2.0);
    ObservationSet obs;
    obs.t0 = 1e4;
    obs.t1 = 100.0;
    obs.d1 = 0.0;
    obs.lambda_obs = kPi2;
    auto e = [&](double r, double v, double t) { return decay(r, v, kPi2, t); };
    const double a = (e(rho + h, sigma, 1e4) - e(rho - h, sigma, 1e4)) / (2 * h);
    const double b = (e(rho, sigma + h, 1e4) - e(rho, sigma - h, 1e4)) / (2 * h);
    const double c = (e(rho + h, sigma, 100.0) - e(rho - h, sigma, 100.0)) / (2 * h);
    const double d = (e(rho, sigma + h, 100.0) - e(rho, sigma - h, 100.0)) / (2 * h);
    worst_det = std::max(worst_det, rel_err(determinant_D(rho, sigma, obs), a * d - b * c));
    obs.t1 = obs.t0;
    worst_equal = std::max(worst_equal, std::abs(determinant_D(rho, sigma, obs)));
  }
  o.within("max rel err determinant vs finite-difference Jacobian, 100 points", worst_det, 1e-5);
  o.within("max |D| with t0 = t1", worst_equal, 1e-300);
}

// Criterion 5: forward solution.
void forward_solution(Outcome& o) {
  // The gap to the heat solution is O(1 - rho); the sequence shows it closing.
  for (double gap : {1e-4, 1e-6, 1e-9, 0.0}) {
    const ForwardProblem p(SpectralModel::interval(1.0, 1), FracParams::make(1.0 - gap, 1.0), InitialData::from({1.0}));
    double heat = 0.0;
    for (double t = 1e-3; t <= 1.0; t *= 1.5) heat = std::max(heat, std::abs(p.observe(t).value - std::exp(-kPi2 * t)));
    char what[112];
    std::snprintf(what, sizeof what, "max |u_1(t) - exp(-pi^2 t)| at 1 - rho = %.0e, t in [1e-3, 1]", gap);
    if (gap >= 1e-6) {
      char value[32];
      std::snprintf(value, sizeof value, ": %.3g", heat);
      o.note(std::string(what) + value);
    } else {
      o.within(what, heat, 1e-6);
    }
  }

  const std::vector<int> nodes{256, 512, 1024, 2048};
  for (double rho : {0.3, 0.5, 0.7}) {
    const ForwardProblem p(SpectralModel::interval(1.0, 1), FracParams::make(rho, 1.0), InitialData::from({1.0}));
    std::vector<double> h, r;
    for (int n : nodes) {
      h.push_back(1.0 / n);
      r.push_back(p.caputo_residual(1, 1.0, n).max_residual);
    }
    const bool decreasing = std::is_sorted(r.rbegin(), r.rend());
    const double order = fit_log_slope(h, r);
    char what[128];
    std::snprintf(what, sizeof what, "|L1 order - (2 - rho)| at rho = %.1f (fitted %.4f, residuals %s)", rho, order,
                  decreasing ? "decreasing" : "NOT decreasing");
    o.within(what, decreasing ? std::abs(order - (2.0 - rho)) : INFINITY, 0.25);
  }

  const auto data = InitialData::harmonic(12);
  const ForwardProblem line(SpectralModel::interval(1.0, 12), FracParams::make(0.6, 1.3), data);
  const ForwardProblem plate(SpectralModel::rectangle(1.0, 2.0, 12), FracParams::make(0.6, 1.3), data);
  double edge = 0.0, scale = 0.0;
  for (double t : {1e-3, 0.1, 10.0}) {
    for (double x : {0.0, 1.0}) {
      const double pt[] = {x};
      edge = std::max(edge, std::abs(line.evaluate_field(pt, t, 1e-10).value));
    }
    const double mid[] = {0.5};
    scale = std::max(scale, std::abs(line.evaluate_field(mid, t, 1e-10).value));
    for (double u : linspace(0.0, 1.0, 7)) {
      const double sides[4][2] = {{0.0, 2.0 * u}, {1.0, 2.0 * u}, {u, 0.0}, {u, 2.0}};
      for (const auto& pt : sides) edge = std::max(edge, std::abs(plate.evaluate_field(pt, t, 1e-10).value));
    }
  }
  o.within("max |u| on the boundary relative to interior magnitude", edge / scale, 1e-15);
}

// Criterion 6: single-parameter recovery through the CLI.
void first_inverse(Outcome& o) {
  const auto dir = cli_runner::scratch_dir();
  double worst = 0.0;
  int failed_runs = 0;
  for (double rho : linspace(0.15, 0.9, 20)) {
    ObservationSet obs;
    obs.t0 = 40.0;
    obs.lambda_obs = kPi2;
    obs.d0 = decay(rho, 1.0, kPi2, 40.0);
    const auto file = dir / "first.json";
    cli_runner::write_file(file, observation_to_json(obs));
    const auto r = cli_runner::run("invert --sigma 1 '" + file.string() + "'");
    if (r.exit_code != 0) {
      ++failed_runs;
      continue;
    }
    worst = std::max(worst, std::abs(json::parse(r.out).at("rho").get<double>() - rho));
  }
  o.require("20 CLI inversions exit 0 (" + std::to_string(failed_runs) + " failed)", failed_runs == 0);
  o.within("max |rho - rho*| over 20 orders in [0.15, 0.9]", worst, 1e-8);

  const std::string base = R"({"t0":40,"d0":0.01,"phi1_abs":1,"lambda_obs":9.869604401089358})";
  const auto check = cli_runner::run("check --sigma 1", base);
  const auto report = json::parse(check.out);
  const double upper = report.at("upper0").get<double>();
  const double lower = report.at("lower0").get<double>();
  o.require("lower endpoint equals exp(-lambda t0)", rel_err(lower, std::exp(-kPi2 * 40.0)) <= 1e-14);

  auto exit_for = [&](double d0) {
    ObservationSet obs;
    obs.t0 = 40.0;
    obs.lambda_obs = kPi2;
    obs.d0 = d0;
    return cli_runner::run("invert --sigma 1", observation_to_json(obs)).exit_code;
  };
  for (auto [label, d0] : {std::pair<const char*, double>{"ratio = upper endpoint", upper},
                           {"ratio = 1.01 x upper endpoint", 1.01 * upper},
                           {"ratio = 1", 1.0},
                           {"ratio = 0.99 x lower endpoint", 0.99 * lower},
                           {"ratio = 0", 0.0}}) {
    const int code = exit_for(d0);
    o.require(std::string(label) + " rejected with exit 5 (got " + std::to_string(code) + ")", code == 5);
  }
}

// Criterion 7: two-parameter recovery.
void second_inverse(Outcome& o) {
  const int threads = std::max(1u, std::thread::hardware_concurrency());
  double worst = 0.0, worst_spread = 0.0;
  int inconsistent = 0, sign_flips = 0;
  for (double rho : linspace(0.2, 0.9, 5))
    for (double sigma : linspace(0.5, 2.0, 5)) {
      ObservationSet obs;
      obs.t0 = 1e4;
      obs.t1 = 100.0;
      obs.lambda_obs = kPi2;
      obs.d0 = decay(rho, sigma, kPi2, 1e4);
      obs.d1 = decay(rho, sigma, kPi2, 100.0);
      const auto r = invert_rho_sigma(obs);
      worst = std::max({worst, std::abs(r.rho - rho), std::abs(*r.sigma - sigma)});
      for (double d : r.det_trace) sign_flips += (d > 0 ? 1 : -1) != r.report.determinant_sign;
      const auto ms = multistart(obs, kDefaultJointRhoBox, kDefaultSigmaBox, 8, kSeed, threads);
      inconsistent += !ms.consistent;
      worst_spread = std::max(worst_spread, ms.max_spread);
      for (const auto& run : ms.runs) {
        worst_spread = std::max({worst_spread, std::abs(run.rho - r.rho), std::abs(*run.sigma - *r.sigma)});
        for (double d : run.det_trace) sign_flips += (d > 0 ? 1 : -1) != r.report.determinant_sign;
      }
    }
  o.within("max abs error over the 5 x 5 grid", worst, 1e-6);
  o.require("8-restart multistart consistent on all 25 cases (" + std::to_string(inconsistent) + " not)",
            inconsistent == 0);
  o.within("max distance between restart solutions", worst_spread, 1e-6);
  o.require("determinant sign constant along every trace (" + std::to_string(sign_flips) + " flips)",
            sign_flips == 0);

  const auto cfg = parse_experiment(R"({"model":{"type":"custom","eigenvalues":[0.5,2,4.5,8]},
    "initial":{"coefficients":[1,0.5,0.25,0.125]},"frac":{"rho":0.6,"sigma":1.4},"times":[1]})");
  const auto obs = observe_experiment(cfg, 1e4, 100.0).observation;
  const auto r = invert_rho_sigma(obs);
  o.within("lambda_1 = 0.5 branch max abs error", std::max(std::abs(r.rho - 0.6), std::abs(*r.sigma - 1.4)), 1e-6);
  bool negative = r.report.determinant_sign == -1;
  for (double d : r.det_trace) negative = negative && d < 0.0;
  o.require("lambda_1 = 0.5 branch determinant sign -1 along the trace", negative);
}

// Criterion 8: forward -> observe -> invert through the CLI.
void end_to_end(Outcome& o) {
  const std::string config = std::string("--config '") + FRACDIFF_SOURCE_DIR + "/tools/configs/interval_two_param.json' ";
  std::string first_forward, first_observe, first_invert;
  bool identical = true, exits_ok = true;
  double worst = INFINITY;
  for (int run = 0; run < 3; ++run) {
    const auto fwd = cli_runner::run(config + "forward");
    const auto observe = cli_runner::run(config + "observe --t0 1e4 --t1 100");
    const auto invert = cli_runner::run("--threads " + std::to_string(run + 1) + " invert -", observe.out);
    exits_ok = exits_ok && fwd.exit_code == 0 && observe.exit_code == 0 && invert.exit_code == 0;
    if (run == 0) {
      first_forward = fwd.out;
      first_observe = observe.out;
      first_invert = invert.out;
      const auto result = json::parse(invert.out);
      worst = std::max(std::abs(result.at("rho").get<double>() - 0.6), std::abs(result.at("sigma").get<double>() - 1.3));
    } else {
      identical = identical && fwd.out == first_forward && observe.out == first_observe && invert.out == first_invert;
    }
  }
  o.require("forward, observe and invert all exit 0", exits_ok);
  o.require("forward table non-empty", first_forward.rfind("t,observation,tail_bound\n", 0) == 0);
  o.within("max |recovered - configured| for (rho, sigma) = (0.6, 1.3)", worst, 1e-6);
  o.require("outputs byte-identical over 3 runs with 1, 2 and 3 threads", identical);
}

struct Criterion {
  int id;
  const char* title;
  double time_limit;  // seconds; infinity when none is set
  std::function<void(Outcome&)> body;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "Mittag-Leffler correctness", 10.0, ml_correctness},
      {2, "p + q decomposition and q decay", INFINITY, decomposition},
      {3, "monotonicity in rho", INFINITY, order_monotonicity},
      {4, "derivatives and determinant", INFINITY, derivatives},
      {5, "forward solution", 30.0, forward_solution},
      {6, "recovery of rho (CLI)", INFINITY, first_inverse},
      {7, "recovery of (rho, sigma)", 120.0, second_inverse},
      {8, "end-to-end CLI pipeline", INFINITY, end_to_end},
  };

  int failures = 0;
  std::vector<std::string> summary;
  for (const auto& c : criteria) {
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    try {
      c.body(o);
    } catch (const std::exception& e) {
      o.require(std::string("exception: ") + e.what(), false);
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (std::isfinite(c.time_limit)) o.within("runtime seconds", seconds, c.time_limit);

    std::printf("criterion %d: %s\n", c.id, c.title);
    for (const auto& n : o.notes) std::printf("    %s\n", n.c_str());
    char line[160];
    std::snprintf(line, sizeof line, "criterion %d: %s  %-36s %7.2f s", c.id, o.pass ? "PASS" : "FAIL", c.title,
                  seconds);
    summary.emplace_back(line);
    failures += !o.pass;
    std::fflush(stdout);
  }
  std::printf("\n");
  for (const auto& s : summary) std::printf("%s\n", s.c_str());
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  std::filesystem::remove_all(cli_runner::scratch_dir());
  return failures == 0 ? 0 : 1;
}
