#include "fracdiff/forward.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fracdiff/error.hpp"
#include "fracdiff/oracle.hpp"
#include "fracdiff/specfun.hpp"

namespace fracdiff {

FracParams FracParams::make(double rho, double sigma) {
  if (!(rho > 0.0 && rho <= 1.0)) fail(ErrorCode::invalid_argument, "rho must be in (0,1)");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) fail(ErrorCode::invalid_argument, "sigma must be positive");
  return FracParams{rho, sigma};
}

ForwardProblem::ForwardProblem(SpectralModel model, FracParams params, InitialData data)
    : model_(std::move(model)), params_(FracParams::make(params.rho, params.sigma)), data_(std::move(data)) {
  if (data_.size() > model_.size())
    fail(ErrorCode::tolerance, "initial data has " + std::to_string(data_.size()) +
                                   " coefficients but the model stores only " +
                                   std::to_string(model_.size()) + " eigenvalues");
}

double ForwardProblem::decay_factor(int k, double t) const {
  const auto arg = MlArgument::make(params_.rho, params_.sigma, model_.eigenvalue(k), t);
  return ml_eval(arg).value;
}

double ForwardProblem::mode_coefficient(int k, double t) const {
  if (!(t >= 0.0)) fail(ErrorCode::invalid_argument, "time must be non-negative");
  model_.eigenvalue(k);
  const double phi = data_.coefficient(k);
  if (phi == 0.0) return 0.0;
  return phi * decay_factor(k, t);
}

Observation ForwardProblem::observe(double t, bool use_substitute) const {
  if (!(t > 0.0)) fail(ErrorCode::invalid_argument, "observation time must be positive");
  Observation obs;
  if (use_substitute && model_.unit_eigenvalue()) {
    obs.index = model_.observation_index();
    if (obs.index == 0) fail(ErrorCode::invalid_argument, "every stored eigenvalue equals 1");
  }
  obs.lambda = model_.eigenvalue(obs.index);
  const double phi = std::abs(data_.coefficient(obs.index));
  obs.zero_coefficient = phi < 1e-14;
  obs.value = phi == 0.0 ? 0.0 : phi * decay_factor(obs.index, t);
  return obs;
}

Truncation ForwardProblem::truncation(double t_min, double tol) const {
  if (!(tol > 0.0)) fail(ErrorCode::invalid_argument, "tolerance must be positive");
  if (!(t_min > 0.0)) fail(ErrorCode::invalid_argument, "t_min must be positive");
  const double c = calibrated_constants().ml_bound;
  const int n = data_.size();
  // suffix[k] = sum_{j > k} phi_j^2 bound_j^2
  std::vector<double> suffix(n + 1, 0.0);
  for (int k = n; k >= 1; --k) {
    const double x = std::pow(model_.eigenvalue(k), params_.sigma) * std::pow(t_min, params_.rho);
    const double b = data_.coefficient(k) * c / (1.0 + x);
    suffix[k - 1] = suffix[k] + b * b;
  }
  const double tol2 = tol * tol;
  for (int k = 0; k <= n; ++k) {
    if (suffix[k] < tol2) return Truncation{k, std::sqrt(suffix[k])};
  }
  return Truncation{n, 0.0};
}

double ForwardProblem::tail_bound(int modes, double t) const {
  if (!(t > 0.0)) fail(ErrorCode::invalid_argument, "time must be positive");
  const double c = calibrated_constants().ml_bound;
  double sum = 0.0;
  for (int k = std::max(modes, 0) + 1; k <= data_.size(); ++k) {
    const double x = std::pow(model_.eigenvalue(k), params_.sigma) * std::pow(t, params_.rho);
    const double b = data_.coefficient(k) * c / (1.0 + x);
    sum += b * b;
  }
  return std::sqrt(sum);
}

FieldValue ForwardProblem::evaluate_field(std::span<const double> point, double t, double tol) const {
  if (!model_.has_eigenfunctions())
    fail(ErrorCode::invalid_argument, "field evaluation needs a model with eigenfunctions");
  if (!(t >= 0.0)) fail(ErrorCode::invalid_argument, "time must be non-negative");
  if (!(tol > 0.0)) fail(ErrorCode::invalid_argument, "tolerance must be positive");
  const int n = data_.size();
  FieldValue out;
  if (t == 0.0) {
    for (int k = 1; k <= n; ++k) out.value += data_.coefficient(k) * model_.eigenfunction(k, point);
    out.modes = n;
    return out;
  }
  const double c = calibrated_constants().ml_bound;
  std::vector<double> suffix(n + 1, 0.0);
  for (int k = n; k >= 1; --k) {
    const double x = std::pow(model_.eigenvalue(k), params_.sigma) * std::pow(t, params_.rho);
    suffix[k - 1] = suffix[k] + std::abs(data_.coefficient(k)) * c * model_.eigenfunction_sup(k) / (1.0 + x);
  }
  int used = n;
  for (int k = 0; k <= n; ++k) {
    if (suffix[k] < tol) {
      used = k;
      break;
    }
  }
  for (int k = 1; k <= used; ++k) {
    const double phi = data_.coefficient(k);
    if (phi == 0.0) continue;
    out.value += mode_coefficient(k, t) * model_.eigenfunction(k, point);
  }
  out.modes = used;
  out.tail_bound = suffix[used];
  return out;
}

CaputoResidual ForwardProblem::caputo_residual(int k, double horizon, int nodes, double window_start) const {
  if (nodes < 64) fail(ErrorCode::invalid_argument, "Caputo residual needs at least 64 grid nodes");
  if (!(horizon > 0.0)) fail(ErrorCode::invalid_argument, "horizon must be positive");
  if (!(window_start >= 0.0 && window_start < 1.0))
    fail(ErrorCode::invalid_argument, "window start must be in [0,1)");
  const double lambda_pow = std::pow(model_.eigenvalue(k), params_.sigma);
  const double tau = horizon / nodes;
  std::vector<double> samples(nodes + 1);
  for (int j = 0; j <= nodes; ++j) samples[j] = mode_coefficient(k, j * tau);
  const auto l1 = oracle::l1_caputo(samples, tau, params_.rho);
  CaputoResidual out;
  out.nodes = nodes;
  for (int j = 1; j <= nodes; ++j) {
    if (j < window_start * nodes) continue;
    out.max_residual = std::max(out.max_residual, std::abs(l1.derivative[j - 1] + lambda_pow * samples[j]));
  }
  return out;
}

}  // namespace fracdiff
