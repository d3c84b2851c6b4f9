#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <tuple>
#include <vector>

#include "fracdiff/error.hpp"
#include "fracdiff/spectral.hpp"

using namespace fracdiff;

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kPi2 = kPi * kPi;
}  // namespace

TEST(IntervalModel, DirichletSpectrum) {
  const auto m = SpectralModel::interval(1.0, 3);
  ASSERT_EQ(m.size(), 3);
  EXPECT_NEAR(m.eigenvalue(1), kPi2, 1e-13);
  EXPECT_NEAR(m.eigenvalue(2), 4 * kPi2, 1e-12);
  EXPECT_NEAR(m.eigenvalue(3), 9 * kPi2, 1e-12);
  EXPECT_NEAR(SpectralModel::interval(2.0, 1).eigenvalue(1), 2.4674011002723395, 1e-14);
}

TEST(IntervalModel, EigenfunctionValues) {
  const auto m = SpectralModel::interval(1.0, 2);
  const double mid[] = {0.5};
  EXPECT_NEAR(m.eigenfunction(1, mid), std::sqrt(2.0), 1e-15);
  for (double edge : {0.0, 1.0}) {
    const double p[] = {edge};
    EXPECT_EQ(m.eigenfunction(1, p), 0.0);
    EXPECT_EQ(m.eigenfunction(2, p), 0.0);
  }
  EXPECT_NEAR(m.eigenfunction_sup(1), std::sqrt(2.0), 1e-15);
}

TEST(IntervalModel, GramMatrixIsIdentity) {
  const auto m = SpectralModel::interval(1.0, 10);
  const int n = 2000;  // composite trapezoid, exact for these trigonometric products
  for (int j = 1; j <= 10; ++j)
    for (int k = j; k <= 10; ++k) {
      double s = 0.0;
      for (int i = 1; i < n; ++i) {
        const double x[] = {static_cast<double>(i) / n};
        s += m.eigenfunction(j, x) * m.eigenfunction(k, x);
      }
      EXPECT_NEAR(s / n, j == k ? 1.0 : 0.0, 1e-8) << j << "," << k;
    }
}

TEST(RectangleModel, LowModes) {
  const auto sq = SpectralModel::rectangle(1.0, 1.0, 4);
  EXPECT_NEAR(sq.eigenvalue(1), 2 * kPi2, 1e-12);
  EXPECT_NEAR(sq.eigenvalue(2), 5 * kPi2, 1e-12);
  EXPECT_NEAR(sq.eigenvalue(3), 5 * kPi2, 1e-12);
  EXPECT_NEAR(sq.eigenvalue(4), 8 * kPi2, 1e-12);
  EXPECT_EQ(sq.rectangle_mode(4), std::make_pair(2, 2));
  EXPECT_NEAR(SpectralModel::rectangle(1.0, 2.0, 1).eigenvalue(1), 1.25 * kPi2, 1e-12);
}

TEST(RectangleModel, MatchesBruteForceLattice) {
  const double lx = 1.0, ly = 1.7;
  std::vector<double> all;
  for (int m = 1; m <= 60; ++m)
    for (int n = 1; n <= 60; ++n) all.push_back(kPi2 * (m * m / (lx * lx) + n * n / (ly * ly)));
  std::sort(all.begin(), all.end());
  const auto model = SpectralModel::rectangle(lx, ly, 50);
  for (int k = 1; k <= 50; ++k) EXPECT_NEAR(model.eigenvalue(k), all[k - 1], 1e-10 * all[k - 1]) << k;
}

TEST(RectangleModel, EigenfunctionVanishesOnBoundary) {
  const auto m = SpectralModel::rectangle(1.0, 2.0, 6);
  for (int k = 1; k <= 6; ++k)
    for (auto [x, y] : {std::pair{0.0, 0.3}, {1.0, 0.3}, {0.4, 0.0}, {0.4, 2.0}}) {
      const double p[] = {x, y};
      EXPECT_EQ(m.eigenfunction(k, p), 0.0);
    }
}

TEST(CustomModel, UnitEigenvalueIsFlagged) {
  const auto unit = SpectralModel::custom({1.0});
  EXPECT_TRUE(unit.unit_eigenvalue());
  EXPECT_EQ(unit.observation_index(), 0);
  const auto sub = SpectralModel::custom({1.0, 3.0});
  EXPECT_EQ(sub.observation_index(), 2);
  const auto ok = SpectralModel::custom({2.0, 3.0, 5.0});
  EXPECT_FALSE(ok.unit_eigenvalue());
  EXPECT_EQ(ok.observation_index(), 1);
  EXPECT_FALSE(ok.has_eigenfunctions());
}

TEST(CustomModel, RejectsBadLists) {
  EXPECT_THROW(SpectralModel::custom({3.0, 2.0}), Error);
  EXPECT_THROW(SpectralModel::custom({}), Error);
  EXPECT_THROW(SpectralModel::custom({-1.0}), Error);
}

TEST(FracPower, Examples) {
  const auto m = SpectralModel::interval(1.0, 3);
  const auto g = InitialData::from({0.3, -1.2, 2.0});
  EXPECT_EQ(apply_frac_power(m, 0.0, g).data.coefficients, g.coefficients);
  EXPECT_NEAR(apply_frac_power(m, 1.0, InitialData::unit(1, 3)).data.coefficient(1), kPi2, 1e-13);
  EXPECT_NEAR(apply_frac_power(m, 0.5, InitialData::unit(2, 3)).data.coefficient(2), 2 * kPi, 1e-13);
}

TEST(FracPower, SemigroupProperty) {
  const auto m = SpectralModel::rectangle(1.0, 1.3, 12);
  const auto g = InitialData::harmonic(12);
  for (auto [a, b] : {std::pair{0.3, 0.4}, {1.0, 0.25}, {0.7, 1.6}}) {
    const auto twice = apply_frac_power(m, b, apply_frac_power(m, a, g).data).data;
    const auto once = apply_frac_power(m, a + b, g).data;
    for (int k = 1; k <= 12; ++k)
      EXPECT_NEAR(twice.coefficient(k), once.coefficient(k), 1e-12 * std::abs(once.coefficient(k)));
  }
}

TEST(FracPower, RejectsLongerData) {
  EXPECT_THROW(apply_frac_power(SpectralModel::interval(1.0, 2), 1.0, InitialData::harmonic(3)), Error);
}

TEST(InitialData, FirstModeFlag) {
  EXPECT_TRUE(InitialData::from({0.0, 1.0}).first_mode_vanishes());
  EXPECT_TRUE(InitialData::from({1e-15, 1.0}).first_mode_vanishes());
  EXPECT_FALSE(InitialData::harmonic(2).first_mode_vanishes());
  EXPECT_NEAR(InitialData::from({3.0, 4.0}).norm(), 5.0, 1e-15);
  EXPECT_EQ(InitialData::harmonic(2).coefficient(7), 0.0);
}
