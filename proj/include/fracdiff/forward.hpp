#pragma once

// Eigenfunction-expansion solution u(t) = sum_k phi_k E_rho(-lambda_k^sigma t^rho) v_k
// of D^rho u + A^sigma u = 0, u(0) = phi.

#include <span>
#include <vector>

#include "fracdiff/spectral.hpp"

namespace fracdiff {

/// rho in (0, 1], sigma > 0. rho == 1 is the classical heat limit.
struct FracParams {
  double rho = 0.5;
  double sigma = 1.0;

  static FracParams make(double rho, double sigma);
};

struct Observation {
  double value = 0.0;
  int index = 1;        // mode actually observed
  double lambda = 0.0;  // its eigenvalue
  bool zero_coefficient = false;
};

struct Truncation {
  int modes = 0;            // K_used; 0 means the empty partial sum suffices
  double tail_bound = 0.0;  // bound on the dropped part in the H-norm
};

struct FieldValue {
  double value = 0.0;
  int modes = 0;
  double tail_bound = 0.0;  // pointwise bound on the dropped part
};

struct CaputoResidual {
  double max_residual = 0.0;  // over nodes with t >= window_start * T
  int nodes = 0;
};

class ForwardProblem {
 public:
  ForwardProblem(SpectralModel model, FracParams params, InitialData data);

  const SpectralModel& model() const noexcept { return model_; }
  const FracParams& params() const noexcept { return params_; }
  const InitialData& data() const noexcept { return data_; }

  /// T_k(t) = phi_k E_rho(-lambda_k^sigma t^rho), t >= 0.
  double mode_coefficient(int k, double t) const;

  /// |phi_k*| E_rho(-lambda_k*^sigma t^rho). k* = 1 unless use_substitute and
  /// lambda_1 == 1, in which case the first mode with lambda != 1.
  Observation observe(double t, bool use_substitute = false) const;

  /// Smallest K with sum_{k>K} phi_k^2 (C / (1 + lambda_k^sigma t_min^rho))^2 < tol^2.
  Truncation truncation(double t_min, double tol) const;
  /// H-norm bound on the modes beyond `modes` at time t > 0.
  double tail_bound(int modes, double t) const;

  /// Partial sum at a point, truncated so the pointwise tail bound is < tol.
  /// t == 0 returns the initial datum's expansion.
  FieldValue evaluate_field(std::span<const double> point, double t, double tol) const;

  /// max |L1 Caputo derivative of T_k + lambda_k^sigma T_k| on the uniform grid
  /// t_j = j T / nodes, restricted to t_j >= window_start * T.
  CaputoResidual caputo_residual(int k, double horizon, int nodes, double window_start = 0.5) const;

 private:
  double decay_factor(int k, double t) const;

  SpectralModel model_;
  FracParams params_;
  InitialData data_;
};

}  // namespace fracdiff
