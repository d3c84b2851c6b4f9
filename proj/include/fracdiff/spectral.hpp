#pragma once

// Dirichlet spectra of the operator A and its fractional powers A^sigma.
// Indices are 1-based throughout, matching mode numbering.

#include <cmath>
#include <span>
#include <utility>
#include <vector>

namespace fracdiff {

enum class DomainKind { interval, rectangle, custom };

const char* to_string(DomainKind kind) noexcept;

class SpectralModel {
 public:
  static SpectralModel interval(double length, int modes);
  static SpectralModel rectangle(double length_x, double length_y, int modes);
  static SpectralModel custom(std::vector<double> eigenvalues);

  DomainKind kind() const noexcept { return kind_; }
  int size() const noexcept { return static_cast<int>(eigenvalues_.size()); }
  std::span<const double> eigenvalues() const noexcept { return eigenvalues_; }
  double eigenvalue(int k) const;

  double length_x() const noexcept { return length_x_; }
  double length_y() const noexcept { return length_y_; }
  /// (m, n) lattice indices of rectangle mode k.
  std::pair<int, int> rectangle_mode(int k) const;

  bool has_eigenfunctions() const noexcept { return kind_ != DomainKind::custom; }
  /// Spatial dimension of eigenfunction arguments (0 for custom).
  int dimension() const noexcept;
  /// v_k(point); point has dimension() coordinates.
  double eigenfunction(int k, std::span<const double> point) const;
  /// sup_x |v_k(x)|.
  double eigenfunction_sup(int k) const;

  /// lambda_1 == 1, which makes ln(lambda_1) vanish.
  bool unit_eigenvalue() const noexcept { return observation_index_ != 1; }
  /// First k with lambda_k != 1, or 0 when every stored eigenvalue is 1.
  int observation_index() const noexcept { return observation_index_; }

 private:
  SpectralModel() = default;
  void finish();

  DomainKind kind_ = DomainKind::custom;
  std::vector<double> eigenvalues_;
  std::vector<std::pair<int, int>> lattice_;
  double length_x_ = 0.0;
  double length_y_ = 0.0;
  int observation_index_ = 0;
};

/// Fourier coefficients phi_k of the initial datum in the eigenbasis.
struct InitialData {
  std::vector<double> coefficients;

  static InitialData from(std::vector<double> coefficients);
  /// e_k (1-based) padded to the given length.
  static InitialData unit(int k, int length);
  /// phi_k = 1 / k for k = 1..length.
  static InitialData harmonic(int length);

  int size() const noexcept { return static_cast<int>(coefficients.size()); }
  double coefficient(int k) const noexcept {
    return k >= 1 && k <= size() ? coefficients[k - 1] : 0.0;
  }
  double norm() const;
  bool first_mode_vanishes() const noexcept { return std::abs(coefficient(1)) < 1e-14; }
};

struct FracPowerResult {
  InitialData data;
  double domain_proxy = 0.0;  // sum lambda_k^{2 sigma} g_k^2
};

/// A^sigma g, coefficient-wise. sigma >= 0.
FracPowerResult apply_frac_power(const SpectralModel& model, double sigma, const InitialData& g);

}  // namespace fracdiff
