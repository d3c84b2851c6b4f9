#pragma once

#include <span>
#include <vector>

namespace fracdiff::detail {

/// Gauss-Legendre rule on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

inline constexpr int kMinGaussNodes = 8;
inline constexpr int kMaxGaussNodes = 1024;

/// Rule with n nodes; n must be a power of two in [8, 1024]. Rules are built
/// once on first use and shared read-only afterwards.
const GaussRule& gauss_legendre(int n);

/// Builds an n-point rule directly (Newton iteration on P_n).
GaussRule make_gauss_legendre(int n);

}  // namespace fracdiff::detail
