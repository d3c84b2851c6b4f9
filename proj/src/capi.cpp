#include "fracdiff/fracdiff.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <string>

#include "fracdiff/experiment.hpp"
#include "fracdiff/selftest.hpp"
#include "fracdiff/specfun.hpp"

using namespace fracdiff;

struct fd_model {
  SpectralModel model;
};

struct fd_experiment {
  ExperimentConfig cfg;
};

namespace {

thread_local std::string g_last_error;

fd_status record(fd_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

template <class F>
fd_status guarded(F&& body) {
  try {
    g_last_error.clear();
    return body();
  } catch (const Error& e) {
    return record(static_cast<fd_status>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return record(FD_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return record(FD_ERR_INTERNAL, e.what());
  }
}

char* duplicate(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (!p) throw std::bad_alloc();
  std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

fd_route route_of(MlRoute r) {
  switch (r) {
    case MlRoute::series: return FD_ROUTE_SERIES;
    case MlRoute::contour: return FD_ROUTE_CONTOUR;
    case MlRoute::asymptotic: return FD_ROUTE_ASYMPTOTIC;
    case MlRoute::exponential: return FD_ROUTE_EXPONENTIAL;
  }
  return FD_ROUTE_SERIES;
}

void fill(const MlValue& v, fd_ml_value* out) {
  out->value = v.value;
  out->p_term = v.p_term;
  out->q_term = v.q_term;
  out->abs_err_est = v.abs_err_est;
  out->route = route_of(v.route);
  out->nodes = v.nodes;
}

void require_out(const void* p) {
  if (!p) fail(ErrorCode::invalid_argument, "output pointer is null");
}

ParamBox rho_box_for(const fd_invert_options& o) {
  if (o.rho_lo == 0.0 && o.rho_hi == 0.0) return o.has_sigma ? kDefaultRhoBox : kDefaultJointRhoBox;
  return {o.rho_lo, o.rho_hi};
}

SolveOptions solve_options(const fd_invert_options& o) {
  SolveOptions s;
  if (o.tol > 0.0) s.tol = o.tol;
  return s;
}

}  // namespace

extern "C" {

const char* fd_last_error(void) { return g_last_error.c_str(); }

const char* fd_status_name(fd_status status) {
  if (status == FD_OK) return "ok";
  if (status == FD_ERR_INTERNAL) return "internal";
  return to_string(static_cast<ErrorCode>(status));
}

void fd_string_free(char* s) { std::free(s); }

fd_status fd_gamma(double x, double* out) {
  return guarded([&] {
    require_out(out);
    *out = gamma_fn(x);
    return FD_OK;
  });
}

fd_status fd_digamma(double x, double* out) {
  return guarded([&] {
    require_out(out);
    *out = digamma_fn(x);
    return FD_OK;
  });
}

const char* fd_route_name(fd_route route) {
  switch (route) {
    case FD_ROUTE_SERIES: return "series";
    case FD_ROUTE_CONTOUR: return "contour";
    case FD_ROUTE_ASYMPTOTIC: return "asymptotic";
    case FD_ROUTE_EXPONENTIAL: return "exponential";
  }
  return "unknown";
}

fd_status fd_ml_eval(double rho, double sigma, double lambda, double t, fd_ml_value* out) {
  return guarded([&] {
    require_out(out);
    fill(ml_eval(MlArgument::make(rho, sigma, lambda, t)), out);
    return FD_OK;
  });
}

fd_status fd_ml_eval_z(double rho, double z, fd_ml_value* out) {
  return guarded([&] {
    require_out(out);
    if (!(rho > 0.0 && rho <= 1.0)) fail(ErrorCode::invalid_argument, "rho must be in (0,1)");
    if (!(z <= 0.0)) fail(ErrorCode::domain, "z must be non-positive");
    fill(ml_eval_x(rho, -z), out);
    return FD_OK;
  });
}

fd_status fd_ml_drho(double rho, double sigma, double lambda, double t, double* out) {
  return guarded([&] {
    require_out(out);
    *out = ml_drho(MlArgument::make(rho, sigma, lambda, t));
    return FD_OK;
  });
}

fd_status fd_ml_dsigma(double rho, double sigma, double lambda, double t, double* out) {
  return guarded([&] {
    require_out(out);
    *out = ml_dsigma(MlArgument::make(rho, sigma, lambda, t));
    return FD_OK;
  });
}

fd_status fd_model_interval(double length, int modes, fd_model** out) {
  return guarded([&] {
    require_out(out);
    *out = new fd_model{SpectralModel::interval(length, modes)};
    return FD_OK;
  });
}

fd_status fd_model_rectangle(double length_x, double length_y, int modes, fd_model** out) {
  return guarded([&] {
    require_out(out);
    *out = new fd_model{SpectralModel::rectangle(length_x, length_y, modes)};
    return FD_OK;
  });
}

fd_status fd_model_custom(const double* eigenvalues, size_t count, fd_model** out) {
  return guarded([&] {
    require_out(out);
    if (!eigenvalues && count > 0) fail(ErrorCode::invalid_argument, "eigenvalue array is null");
    *out = new fd_model{SpectralModel::custom(std::vector<double>(eigenvalues, eigenvalues + count))};
    return FD_OK;
  });
}

int fd_model_size(const fd_model* model) { return model ? model->model.size() : 0; }

fd_status fd_model_eigenvalue(const fd_model* model, int k, double* out) {
  return guarded([&] {
    require_out(out);
    require_out(model);
    *out = model->model.eigenvalue(k);
    return FD_OK;
  });
}

void fd_model_free(fd_model* model) { delete model; }

fd_status fd_experiment_from_json(const char* json, fd_experiment** out) {
  return guarded([&] {
    require_out(out);
    if (!json) fail(ErrorCode::config, "config text is null");
    *out = new fd_experiment{parse_experiment(json)};
    return FD_OK;
  });
}

void fd_experiment_free(fd_experiment* experiment) { delete experiment; }

const char* fd_experiment_format(const fd_experiment* experiment) {
  if (!experiment) return nullptr;
  return experiment->cfg.format == OutputFormat::json ? "json" : "csv";
}

const char* fd_experiment_output_path(const fd_experiment* experiment) {
  if (!experiment || !experiment->cfg.output_path) return nullptr;
  return experiment->cfg.output_path->c_str();
}

int fd_experiment_has_field(const fd_experiment* experiment) {
  return experiment && experiment->cfg.field.has_value() ? 1 : 0;
}

const char* fd_experiment_field_path(const fd_experiment* experiment) {
  if (!experiment || !experiment->cfg.field || !experiment->cfg.field->path) return nullptr;
  return experiment->cfg.field->path->c_str();
}

fd_status fd_forward_table(const fd_experiment* experiment, char** out) {
  return guarded([&] {
    require_out(out);
    require_out(experiment);
    *out = duplicate(forward_table(experiment->cfg));
    return FD_OK;
  });
}

fd_status fd_field_table(const fd_experiment* experiment, char** out) {
  return guarded([&] {
    require_out(out);
    require_out(experiment);
    *out = duplicate(field_table(experiment->cfg));
    return FD_OK;
  });
}

fd_status fd_observe_json(const fd_experiment* experiment, double t0, double t1, char** out,
                          int* zero_coefficient) {
  return guarded([&] {
    require_out(out);
    require_out(experiment);
    const auto outcome =
        observe_experiment(experiment->cfg, t0, t1 > 0.0 ? std::optional<double>(t1) : std::nullopt);
    if (zero_coefficient) *zero_coefficient = outcome.zero_coefficient ? 1 : 0;
    *out = duplicate(observation_to_json(outcome.observation));
    return FD_OK;
  });
}

void fd_invert_options_init(fd_invert_options* options) {
  if (!options) return;
  options->rho_lo = 0.0;
  options->rho_hi = 0.0;
  options->has_sigma = 0;
  options->sigma = 1.0;
  options->sigma_lo = kDefaultSigmaBox.lo;
  options->sigma_hi = kDefaultSigmaBox.hi;
  options->tol = 1e-10;
  options->restarts = 0;
  options->seed = 0;
  options->threads = 1;
}

fd_status fd_invert_json(const char* observation_json, const fd_invert_options* options, char** out) {
  return guarded([&] {
    require_out(out);
    require_out(options);
    if (!observation_json) fail(ErrorCode::config, "observation text is null");
    const ObservationSet obs = observation_from_json(observation_json);
    const ParamBox rho_box = rho_box_for(*options);
    const ParamBox sigma_box{options->sigma_lo, options->sigma_hi};
    const SolveOptions solve = solve_options(*options);
    InvertOutcome outcome;
    fd_status status = FD_OK;
    try {
      if (options->has_sigma) {
        outcome.result = invert_rho(obs, options->sigma, rho_box, solve);
      } else {
        if (!obs.two_point())
          fail(ErrorCode::invalid_argument, "observation has no t1/d1; pass a fixed sigma for the first problem");
        outcome.result = invert_rho_sigma(obs, rho_box, sigma_box, solve);
        if (options->restarts > 0) {
          outcome.multistart = multistart(obs, rho_box, sigma_box, options->restarts, options->seed,
                                          options->threads, 1e-6, solve);
          if (!outcome.multistart->consistent) {
            outcome.status = "non_unique";
            outcome.message = "restarts converged to different solutions";
            status = FD_ERR_NO_CONVERGENCE;
          }
        }
      }
      outcome.report = outcome.result->report;
    } catch (const InverseError& e) {
      outcome.status = to_string(e.code());
      outcome.message = e.what();
      outcome.report = e.report();
      status = static_cast<fd_status>(e.code());
      g_last_error = e.what();
    }
    *out = duplicate(invert_outcome_to_json(outcome));
    return status;
  });
}

fd_status fd_check_json(const char* observation_json, const fd_invert_options* options, char** out) {
  return guarded([&] {
    require_out(out);
    require_out(options);
    if (!observation_json) fail(ErrorCode::config, "observation text is null");
    const ObservationSet obs = observation_from_json(observation_json);
    const ParamBox rho_box = rho_box_for(*options);
    AdmissibilityReport report;
    if (options->has_sigma) {
      report = admissibility_check(obs, rho_box, options->sigma);
    } else {
      if (!obs.two_point())
        fail(ErrorCode::invalid_argument, "observation has no t1/d1; pass a fixed sigma for the first problem");
      report = admissibility_check(obs, rho_box, ParamBox{options->sigma_lo, options->sigma_hi});
    }
    *out = duplicate(report_to_json(report));
    if (!report.admissible()) return record(FD_ERR_INADMISSIBLE, "observation is not admissible");
    return FD_OK;
  });
}

fd_status fd_selftest(const char* level, unsigned fault_flags, unsigned long long seed, char** out) {
  return guarded([&] {
    require_out(out);
    const std::string lv = level ? level : "quick";
    if (lv != "quick" && lv != "full") fail(ErrorCode::invalid_argument, "selftest level must be quick or full");
    const auto report =
        run_selftest(lv == "full" ? SelftestLevel::full : SelftestLevel::quick, fault_flags, seed ? seed : 20240601);
    *out = duplicate(report.table());
    if (!report.all_pass()) return record(FD_ERR_TOLERANCE, "selftest failed");
    return FD_OK;
  });
}

}  // extern "C"
