// fracdiff command-line front end. Talks to the library only through the C
// interface in fracdiff/fracdiff.h.
//
// Exit codes: 0 ok, 1 selftest failure, 2 invalid flags, 3 config or I/O,
// 4 tolerance or convergence failure, 5 inadmissible data, 6 determinant
// sign change during a two-parameter solve.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "fracdiff/fracdiff.h"

namespace {

enum Exit : int {
  kExitOk = 0,
  kExitSelftest = 1,
  kExitUsage = 2,
  kExitConfig = 3,
  kExitNumeric = 4,
  kExitInadmissible = 5,
  kExitDeterminant = 6,
};

int exit_code_for(fd_status status) {
  switch (status) {
    case FD_OK: return kExitOk;
    case FD_ERR_INVALID_ARGUMENT:
    case FD_ERR_DOMAIN:
    case FD_ERR_POLE: return kExitUsage;
    case FD_ERR_CONFIG:
    case FD_ERR_NOT_FOUND:
    case FD_ERR_IO: return kExitConfig;
    case FD_ERR_INADMISSIBLE:
    case FD_ERR_SPACING:
    case FD_ERR_BRACKET:
    case FD_ERR_NON_MONOTONE: return kExitInadmissible;
    case FD_ERR_DETERMINANT_SIGN: return kExitDeterminant;
    default: return kExitNumeric;
  }
}

// Carries an exit code out of a subcommand with a message for stderr.
struct CliFailure {
  int code;
  std::string message;
};

[[noreturn]] void fail_with(int code, std::string message) { throw CliFailure{code, std::move(message)}; }

[[noreturn]] void fail_status(fd_status status, const std::string& context) {
  fail_with(exit_code_for(status), context + ": " + fd_status_name(status) + ": " + fd_last_error());
}

// Owns a malloc'd string handed out by the library.
struct OwnedText {
  char* ptr = nullptr;
  OwnedText() = default;
  OwnedText(const OwnedText&) = delete;
  OwnedText& operator=(const OwnedText&) = delete;
  ~OwnedText() { fd_string_free(ptr); }
  std::string str() const { return ptr ? std::string(ptr) : std::string(); }
};

struct ExperimentHandle {
  fd_experiment* ptr = nullptr;
  ExperimentHandle() = default;
  ExperimentHandle(const ExperimentHandle&) = delete;
  ExperimentHandle& operator=(const ExperimentHandle&) = delete;
  ~ExperimentHandle() { fd_experiment_free(ptr); }
};

std::string read_source(const std::string& path, int missing_code) {
  if (path == "-") return std::string(std::istreambuf_iterator<char>(std::cin), {});
  std::ifstream in(path, std::ios::binary);
  if (!in) fail_with(missing_code, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::optional<std::string>& path, const std::string& text) {
  if (!path || *path == "-") {
    std::fwrite(text.data(), 1, text.size(), stdout);
    std::fflush(stdout);
    return;
  }
  std::ofstream out(*path, std::ios::binary);
  if (!out) fail_with(kExitConfig, "cannot write " + *path);
  out << text;
  if (!out) fail_with(kExitConfig, "write failed for " + *path);
}

std::string with_newline(std::string s) {
  if (s.empty() || s.back() != '\n') s.push_back('\n');
  return s;
}

std::string number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct GlobalFlags {
  std::string config;
  std::string out;
  unsigned long long seed = 20240601;
  int threads = 1;

  std::optional<std::string> out_path() const { return out.empty() ? std::nullopt : std::optional(out); }
};

void load_experiment(const GlobalFlags& g, ExperimentHandle& exp) {
  if (g.config.empty()) fail_with(kExitUsage, "--config is required");
  const std::string text = read_source(g.config, kExitConfig);
  if (const fd_status s = fd_experiment_from_json(text.c_str(), &exp.ptr); s != FD_OK) fail_status(s, g.config);
}

// Explicit --out wins over the path named in the config.
std::optional<std::string> output_target(const GlobalFlags& g, const fd_experiment* exp) {
  if (auto p = g.out_path()) return p;
  if (const char* p = fd_experiment_output_path(exp)) return std::string(p);
  return std::nullopt;
}

struct MlFlags {
  std::optional<double> rho;
  double sigma = 1.0;
  std::optional<double> lambda;
  std::optional<double> t;
  std::optional<double> z;
};

int run_ml(const MlFlags& f, const GlobalFlags& g) {
  if (!f.rho) fail_with(kExitUsage, "--rho is required");
  const double rho = *f.rho;
  // rho = 1 is the exponential shortcut, reachable only with a raw argument.
  const bool rho_ok = f.z ? (rho > 0.0 && rho <= 1.0) : (rho > 0.0 && rho < 1.0);
  if (!rho_ok) fail_with(kExitUsage, "rho must be in (0,1)");

  fd_ml_value v{};
  fd_status s;
  if (f.z) {
    if (f.lambda || f.t) fail_with(kExitUsage, "--z excludes --lambda and --t");
    s = fd_ml_eval_z(rho, *f.z, &v);
  } else {
    if (!f.lambda || !f.t) fail_with(kExitUsage, "--lambda and --t are required without --z");
    s = fd_ml_eval(rho, f.sigma, *f.lambda, *f.t, &v);
  }
  if (s != FD_OK) fail_status(s, "ml");

  std::string line = "{\"value\":" + number(v.value) + ",\"p_term\":" + number(v.p_term) +
                     ",\"q_term\":" + number(v.q_term) + ",\"route\":\"" + fd_route_name(v.route) +
                     "\",\"abs_err_est\":" + number(v.abs_err_est) + ",\"nodes\":" + std::to_string(v.nodes) + "}\n";
  write_text(g.out_path(), line);
  return kExitOk;
}

int run_forward(const GlobalFlags& g) {
  ExperimentHandle exp;
  load_experiment(g, exp);
  OwnedText table;
  if (const fd_status s = fd_forward_table(exp.ptr, &table.ptr); s != FD_OK) fail_status(s, "forward");
  std::string text = with_newline(table.str());

  if (fd_experiment_has_field(exp.ptr)) {
    OwnedText field;
    if (const fd_status s = fd_field_table(exp.ptr, &field.ptr); s != FD_OK) fail_status(s, "forward field");
    if (const char* path = fd_experiment_field_path(exp.ptr))
      write_text(std::string(path), with_newline(field.str()));
    else
      text += "\n" + with_newline(field.str());
  }
  write_text(output_target(g, exp.ptr), text);
  return kExitOk;
}

int run_observe(double t0, std::optional<double> t1, const GlobalFlags& g) {
  if (!(t0 > 0.0)) fail_with(kExitUsage, "--t0 must be positive");
  if (t1 && !(*t1 > 0.0)) fail_with(kExitUsage, "--t1 must be positive");
  ExperimentHandle exp;
  load_experiment(g, exp);
  OwnedText obs;
  int zero_coefficient = 0;
  if (const fd_status s = fd_observe_json(exp.ptr, t0, t1.value_or(0.0), &obs.ptr, &zero_coefficient); s != FD_OK)
    fail_status(s, "observe");
  if (zero_coefficient)
    std::fprintf(stderr, "warning: observed Fourier coefficient is zero; the observation carries no information\n");
  write_text(g.out_path(), with_newline(obs.str()));
  return kExitOk;
}

struct InvertFlags {
  std::string obs = "-";
  std::vector<double> rho_box;
  std::vector<double> sigma_box;
  std::optional<double> sigma;
  double tol = 1e-10;
  int restarts = 8;
};

fd_invert_options invert_options(const InvertFlags& f, const GlobalFlags& g) {
  if (f.sigma && !f.sigma_box.empty()) fail_with(kExitUsage, "--sigma and --sigma-box are mutually exclusive");
  fd_invert_options o;
  fd_invert_options_init(&o);
  if (!f.rho_box.empty()) {
    if (f.rho_box.size() != 2) fail_with(kExitUsage, "--rho-box takes a,b");
    o.rho_lo = f.rho_box[0];
    o.rho_hi = f.rho_box[1];
  }
  if (!f.sigma_box.empty()) {
    if (f.sigma_box.size() != 2) fail_with(kExitUsage, "--sigma-box takes c,d");
    o.sigma_lo = f.sigma_box[0];
    o.sigma_hi = f.sigma_box[1];
  }
  if (f.sigma) {
    o.has_sigma = 1;
    o.sigma = *f.sigma;
  }
  if (!(f.tol > 0.0)) fail_with(kExitUsage, "--tol must be positive");
  o.tol = f.tol;
  o.restarts = f.restarts;
  o.seed = g.seed;
  o.threads = g.threads;
  return o;
}

int run_invert(const InvertFlags& f, const GlobalFlags& g, bool check_only) {
  const fd_invert_options o = invert_options(f, g);
  const std::string text = read_source(f.obs, kExitConfig);
  OwnedText result;
  const fd_status s =
      check_only ? fd_check_json(text.c_str(), &o, &result.ptr) : fd_invert_json(text.c_str(), &o, &result.ptr);
  if (result.ptr) write_text(g.out_path(), with_newline(result.str()));
  if (s != FD_OK) fail_status(s, check_only ? "check" : "invert");
  return kExitOk;
}

int run_selftest(const std::string& level, const std::vector<std::string>& faults, const GlobalFlags& g) {
  unsigned flags = 0;
  for (const auto& name : faults) {
    if (name == "gamma-table") flags |= 1u;
    else if (name == "series-sign") flags |= 2u;
    else fail_with(kExitUsage, "unknown fault " + name);
  }
  OwnedText table;
  const fd_status s = fd_selftest(level.c_str(), flags, g.seed, &table.ptr);
  if (table.ptr) write_text(g.out_path(), table.str());
  if (s == FD_ERR_TOLERANCE) return kExitSelftest;
  if (s != FD_OK) fail_status(s, "selftest");
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Space-time fractional diffusion: forward runs and order recovery"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalFlags g;
  app.add_option("--config", g.config, "experiment config JSON");
  app.add_option("--out", g.out, "output file (default stdout)");
  app.add_option("--seed", g.seed, "seed for randomized restarts and selftest sampling");
  app.add_option("--threads", g.threads, "worker threads for multi-start")->check(CLI::PositiveNumber);

  MlFlags ml;
  auto* ml_cmd = app.add_subcommand("ml", "evaluate E_rho(-lambda^sigma t^rho) or E_rho(z)");
  ml_cmd->add_option("--rho", ml.rho, "order in (0,1); 1 only with --z");
  ml_cmd->add_option("--sigma", ml.sigma, "spatial order");
  ml_cmd->add_option("--lambda", ml.lambda, "eigenvalue");
  ml_cmd->add_option("--t", ml.t, "time");
  ml_cmd->add_option("--z", ml.z, "raw non-positive argument");

  auto* forward_cmd = app.add_subcommand("forward", "write the first-mode time series for a config");

  double t0 = 0.0;
  std::optional<double> t1;
  auto* observe_cmd = app.add_subcommand("observe", "emit an observation JSON for invert");
  observe_cmd->add_option("--t0", t0, "first observation time")->required();
  observe_cmd->add_option("--t1", t1, "second observation time (two-parameter problem)");

  InvertFlags inv;
  auto add_invert_flags = [&](CLI::App* cmd) {
    cmd->add_option("observation", inv.obs, "observation JSON file, - for stdin");
    cmd->add_option("--obs", inv.obs, "observation JSON file, - for stdin");
    cmd->add_option("--rho-box", inv.rho_box, "rho search box a,b")->delimiter(',')->expected(2);
    cmd->add_option("--sigma-box", inv.sigma_box, "sigma search box c,d")->delimiter(',')->expected(2);
    cmd->add_option("--sigma", inv.sigma, "known sigma (first problem)");
    cmd->add_option("--tol", inv.tol, "solver tolerance");
    cmd->add_option("--restarts", inv.restarts, "multi-start runs for the two-parameter problem");
  };
  auto* invert_cmd = app.add_subcommand("invert", "recover rho, or (rho, sigma), from an observation");
  add_invert_flags(invert_cmd);
  auto* check_cmd = app.add_subcommand("check", "admissibility report only");
  add_invert_flags(check_cmd);

  std::string level = "quick";
  std::vector<std::string> faults;
  auto* selftest_cmd = app.add_subcommand("selftest", "oracle-versus-production checks");
  selftest_cmd->add_option("level", level, "quick or full")->check(CLI::IsMember({"quick", "full"}));
  selftest_cmd->add_option("--inject-fault", faults, "negative control: gamma-table, series-sign");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*ml_cmd) return run_ml(ml, g);
    if (*forward_cmd) return run_forward(g);
    if (*observe_cmd) return run_observe(t0, t1, g);
    if (*invert_cmd) return run_invert(inv, g, false);
    if (*check_cmd) return run_invert(inv, g, true);
    if (*selftest_cmd) return run_selftest(level, faults, g);
  } catch (const CliFailure& f) {
    std::fprintf(stderr, "fracdiff: %s\n", f.message.c_str());
    return f.code;
  }
  return kExitUsage;
}
