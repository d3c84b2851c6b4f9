#ifndef FRACDIFF_FRACDIFF_H
#define FRACDIFF_FRACDIFF_H

/* C interface to the fracdiff library: Mittag-Leffler evaluation, forward
 * runs of D^rho u + A^sigma u = 0, and recovery of (rho, sigma) from
 * first-mode observations.
 *
 * Every entry point returns an fd_status. On failure a message is available
 * from fd_last_error() until the next call on the same thread. Strings
 * returned through char** are owned by the caller and released with
 * fd_string_free(). */

#include <stddef.h>

#if defined(_WIN32)
#  if defined(FRACDIFF_BUILDING)
#    define FD_API __declspec(dllexport)
#  else
#    define FD_API __declspec(dllimport)
#  endif
#else
#  define FD_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Values match fracdiff::ErrorCode. */
typedef enum fd_status {
  FD_OK = 0,
  FD_ERR_INVALID_ARGUMENT = 1,
  FD_ERR_DOMAIN = 2,
  FD_ERR_POLE = 3,
  FD_ERR_DIVERGENCE_RISK = 4,
  FD_ERR_NO_CONVERGENCE = 5,
  FD_ERR_CONFIG = 6,
  FD_ERR_TOLERANCE = 7,
  FD_ERR_INADMISSIBLE = 8,
  FD_ERR_SPACING = 9,
  FD_ERR_DETERMINANT_SIGN = 10,
  FD_ERR_BRACKET = 11,
  FD_ERR_NON_MONOTONE = 12,
  FD_ERR_NOT_FOUND = 13,
  FD_ERR_IO = 14,
  FD_ERR_INTERNAL = 99
} fd_status;

FD_API const char* fd_last_error(void);
FD_API const char* fd_status_name(fd_status status);
FD_API void fd_string_free(char* s);

FD_API fd_status fd_gamma(double x, double* out);
FD_API fd_status fd_digamma(double x, double* out);

typedef enum fd_route { FD_ROUTE_SERIES = 0, FD_ROUTE_CONTOUR = 1, FD_ROUTE_ASYMPTOTIC = 2, FD_ROUTE_EXPONENTIAL = 3 } fd_route;

typedef struct fd_ml_value {
  double value;
  double p_term;
  double q_term;
  double abs_err_est;
  fd_route route;
  int nodes;
} fd_ml_value;

FD_API const char* fd_route_name(fd_route route);
/* E_rho(-lambda^sigma t^rho); rho in (0,1]. */
FD_API fd_status fd_ml_eval(double rho, double sigma, double lambda, double t, fd_ml_value* out);
/* E_rho(z) for real z <= 0. */
FD_API fd_status fd_ml_eval_z(double rho, double z, fd_ml_value* out);
FD_API fd_status fd_ml_drho(double rho, double sigma, double lambda, double t, double* out);
FD_API fd_status fd_ml_dsigma(double rho, double sigma, double lambda, double t, double* out);

typedef struct fd_model fd_model;

FD_API fd_status fd_model_interval(double length, int modes, fd_model** out);
FD_API fd_status fd_model_rectangle(double length_x, double length_y, int modes, fd_model** out);
FD_API fd_status fd_model_custom(const double* eigenvalues, size_t count, fd_model** out);
FD_API int fd_model_size(const fd_model* model);
/* k is 1-based. */
FD_API fd_status fd_model_eigenvalue(const fd_model* model, int k, double* out);
FD_API void fd_model_free(fd_model* model);

typedef struct fd_experiment fd_experiment;

/* Parses and validates a JSON experiment config. */
FD_API fd_status fd_experiment_from_json(const char* json, fd_experiment** out);
FD_API void fd_experiment_free(fd_experiment* experiment);
/* Configured output format ("csv" or "json") and path (NULL when unset). */
FD_API const char* fd_experiment_format(const fd_experiment* experiment);
FD_API const char* fd_experiment_output_path(const fd_experiment* experiment);
FD_API int fd_experiment_has_field(const fd_experiment* experiment);
FD_API const char* fd_experiment_field_path(const fd_experiment* experiment);

/* Time series t,observation,tail_bound in the configured format. */
FD_API fd_status fd_forward_table(const fd_experiment* experiment, char** out);
/* Field values x,t,u (x,y,t,u on rectangles). */
FD_API fd_status fd_field_table(const fd_experiment* experiment, char** out);
/* Observation JSON at t0 and optionally t1 (t1 <= 0 means absent).
 * *zero_coefficient is set when the observed Fourier coefficient vanishes. */
FD_API fd_status fd_observe_json(const fd_experiment* experiment, double t0, double t1, char** out,
                                 int* zero_coefficient);

typedef struct fd_invert_options {
  /* rho_lo = rho_hi = 0 selects the default box of the problem solved:
   * [0.1, 1] with sigma known, [0.1, 0.95] for the joint problem. */
  double rho_lo;
  double rho_hi;
  int has_sigma; /* first problem: sigma known */
  double sigma;
  double sigma_lo; /* two-parameter problem */
  double sigma_hi;
  double tol;
  int restarts; /* uniqueness restarts for the two-parameter problem; 0 skips */
  unsigned long long seed;
  int threads;
} fd_invert_options;

FD_API void fd_invert_options_init(fd_invert_options* options);

/* Solves the inverse problem for an observation JSON document. The result
 * JSON, or the admissibility report on rejection, is written to *out in
 * both cases whenever the input could be parsed. */
FD_API fd_status fd_invert_json(const char* observation_json, const fd_invert_options* options, char** out);
/* Admissibility report only. FD_ERR_INADMISSIBLE when not admissible. */
FD_API fd_status fd_check_json(const char* observation_json, const fd_invert_options* options, char** out);

/* level: "quick" or "full". fault_flags: see fracdiff::SelftestFault.
 * Returns FD_ERR_TOLERANCE when any check fails; the table is in *out. */
FD_API fd_status fd_selftest(const char* level, unsigned fault_flags, unsigned long long seed, char** out);

#ifdef __cplusplus
}
#endif

#endif
