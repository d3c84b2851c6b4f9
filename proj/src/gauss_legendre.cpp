#include "gauss_legendre.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace fracdiff::detail {

GaussRule make_gauss_legendre(int n) {
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    // Tricomi initial guess, then Newton on P_n.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // One more derivative evaluation at the converged node.
    double p0 = 1.0;
    double p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  return rule;
}

namespace {

constexpr int kRuleCount = 8;  // 8, 16, ..., 1024

struct RuleTable {
  std::array<GaussRule, kRuleCount> rules;
  RuleTable() {
    for (int j = 0; j < kRuleCount; ++j) rules[j] = make_gauss_legendre(kMinGaussNodes << j);
  }
};

}  // namespace

const GaussRule& gauss_legendre(int n) {
  static const RuleTable table;
  for (int j = 0; j < kRuleCount; ++j)
    if ((kMinGaussNodes << j) == n) return table.rules[j];
  throw std::invalid_argument("gauss_legendre: unsupported node count");
}

}  // namespace fracdiff::detail
