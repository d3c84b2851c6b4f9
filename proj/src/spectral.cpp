#include "fracdiff/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <tuple>

#include "fracdiff/error.hpp"

namespace fracdiff {

namespace {

constexpr double kUnitTolerance = 1e-12;

bool is_unit(double lambda) { return std::abs(lambda - 1.0) <= kUnitTolerance; }

}  // namespace

const char* to_string(DomainKind kind) noexcept {
  switch (kind) {
    case DomainKind::interval: return "interval";
    case DomainKind::rectangle: return "rectangle";
    case DomainKind::custom: return "custom";
  }
  return "unknown";
}

SpectralModel SpectralModel::interval(double length, int modes) {
  if (!(length > 0.0) || !std::isfinite(length))
    fail(ErrorCode::invalid_argument, "interval length must be positive");
  if (modes < 1) fail(ErrorCode::invalid_argument, "at least one mode is required");
  SpectralModel m;
  m.kind_ = DomainKind::interval;
  m.length_x_ = length;
  m.eigenvalues_.resize(modes);
  for (int k = 1; k <= modes; ++k) {
    const double w = k * std::numbers::pi / length;
    m.eigenvalues_[k - 1] = w * w;
  }
  m.finish();
  return m;
}

SpectralModel SpectralModel::rectangle(double length_x, double length_y, int modes) {
  if (!(length_x > 0.0) || !(length_y > 0.0) || !std::isfinite(length_x) || !std::isfinite(length_y))
    fail(ErrorCode::invalid_argument, "rectangle sides must be positive");
  if (modes < 1) fail(ErrorCode::invalid_argument, "at least one mode is required");
  // The K smallest keys all have m <= K and n <= K.
  std::vector<std::tuple<double, int, int>> lattice;
  lattice.reserve(static_cast<std::size_t>(modes) * modes);
  const double ix = 1.0 / (length_x * length_x);
  const double iy = 1.0 / (length_y * length_y);
  for (int a = 1; a <= modes; ++a)
    for (int b = 1; b <= modes; ++b)
      lattice.emplace_back(static_cast<double>(a) * a * ix + static_cast<double>(b) * b * iy, a, b);
  std::partial_sort(lattice.begin(), lattice.begin() + modes, lattice.end());
  SpectralModel m;
  m.kind_ = DomainKind::rectangle;
  m.length_x_ = length_x;
  m.length_y_ = length_y;
  const double pi2 = std::numbers::pi * std::numbers::pi;
  for (int k = 0; k < modes; ++k) {
    const auto& [key, a, b] = lattice[k];
    m.eigenvalues_.push_back(pi2 * key);
    m.lattice_.emplace_back(a, b);
  }
  m.finish();
  return m;
}

SpectralModel SpectralModel::custom(std::vector<double> eigenvalues) {
  if (eigenvalues.empty()) fail(ErrorCode::invalid_argument, "eigenvalue list is empty");
  for (std::size_t i = 0; i < eigenvalues.size(); ++i) {
    if (!(eigenvalues[i] > 0.0) || !std::isfinite(eigenvalues[i]))
      fail(ErrorCode::invalid_argument, "eigenvalues must be positive and finite");
    if (i > 0 && eigenvalues[i] < eigenvalues[i - 1])
      fail(ErrorCode::invalid_argument,
           "eigenvalues must be non-decreasing (index " + std::to_string(i + 1) + ")");
  }
  SpectralModel m;
  m.kind_ = DomainKind::custom;
  m.eigenvalues_ = std::move(eigenvalues);
  m.finish();
  return m;
}

void SpectralModel::finish() {
  observation_index_ = 0;
  for (int k = 1; k <= size(); ++k) {
    if (!is_unit(eigenvalues_[k - 1])) {
      observation_index_ = k;
      break;
    }
  }
}

double SpectralModel::eigenvalue(int k) const {
  if (k < 1 || k > size())
    fail(ErrorCode::invalid_argument, "mode index " + std::to_string(k) + " outside 1.." +
                                          std::to_string(size()));
  return eigenvalues_[k - 1];
}

std::pair<int, int> SpectralModel::rectangle_mode(int k) const {
  if (kind_ != DomainKind::rectangle) fail(ErrorCode::invalid_argument, "not a rectangle model");
  eigenvalue(k);
  return lattice_[k - 1];
}

int SpectralModel::dimension() const noexcept {
  switch (kind_) {
    case DomainKind::interval: return 1;
    case DomainKind::rectangle: return 2;
    case DomainKind::custom: return 0;
  }
  return 0;
}

double SpectralModel::eigenfunction(int k, std::span<const double> point) const {
  if (!has_eigenfunctions()) fail(ErrorCode::invalid_argument, "custom models have no eigenfunctions");
  eigenvalue(k);
  if (static_cast<int>(point.size()) != dimension())
    fail(ErrorCode::invalid_argument, "point has " + std::to_string(point.size()) +
                                          " coordinates, expected " + std::to_string(dimension()));
  // sin(pi m x / L) through sinpi keeps boundary values exactly zero.
  auto sine = [](int m, double x, double l) {
    const double arg = m * (x / l);
    const double r = std::remainder(arg, 2.0);
    if (r == 0.0 || std::abs(r) == 1.0) return 0.0;
    return std::sin(std::numbers::pi * r);
  };
  if (kind_ == DomainKind::interval) {
    return std::sqrt(2.0 / length_x_) * sine(k, point[0], length_x_);
  }
  const auto [a, b] = lattice_[k - 1];
  return 2.0 / std::sqrt(length_x_ * length_y_) * sine(a, point[0], length_x_) *
         sine(b, point[1], length_y_);
}

double SpectralModel::eigenfunction_sup(int k) const {
  eigenvalue(k);
  switch (kind_) {
    case DomainKind::interval: return std::sqrt(2.0 / length_x_);
    case DomainKind::rectangle: return 2.0 / std::sqrt(length_x_ * length_y_);
    case DomainKind::custom: break;
  }
  fail(ErrorCode::invalid_argument, "custom models have no eigenfunctions");
}

InitialData InitialData::from(std::vector<double> coefficients) {
  for (double c : coefficients)
    if (!std::isfinite(c)) fail(ErrorCode::invalid_argument, "initial coefficients must be finite");
  return InitialData{std::move(coefficients)};
}

InitialData InitialData::unit(int k, int length) {
  if (k < 1 || length < k) fail(ErrorCode::invalid_argument, "unit vector index out of range");
  std::vector<double> c(length, 0.0);
  c[k - 1] = 1.0;
  return InitialData{std::move(c)};
}

InitialData InitialData::harmonic(int length) {
  if (length < 1) fail(ErrorCode::invalid_argument, "length must be positive");
  std::vector<double> c(length);
  for (int k = 1; k <= length; ++k) c[k - 1] = 1.0 / k;
  return InitialData{std::move(c)};
}

double InitialData::norm() const {
  double s = 0.0;
  for (double c : coefficients) s = std::hypot(s, c);
  return s;
}

FracPowerResult apply_frac_power(const SpectralModel& model, double sigma, const InitialData& g) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma))
    fail(ErrorCode::invalid_argument, "sigma must be non-negative");
  if (g.size() > model.size())
    fail(ErrorCode::invalid_argument, "initial data has more coefficients than the model has modes");
  FracPowerResult out;
  out.data.coefficients.resize(g.size());
  for (int k = 1; k <= g.size(); ++k) {
    const double c = std::pow(model.eigenvalue(k), sigma) * g.coefficients[k - 1];
    out.data.coefficients[k - 1] = c;
    out.domain_proxy += c * c;
  }
  return out;
}

}  // namespace fracdiff
