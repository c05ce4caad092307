#include "test_util.hpp"

#include <gtest/gtest.h>

using namespace cbed;
using namespace cbed::testing;

namespace {

Spectrum single_box_spectrum() {
  const auto g = single_box();
  SpinRep rep(1);
  HilbertSpace space(4, rep);
  return dense_spectrum(box_terms(g, rep), space, false);
}

/// Closed form for H = S^2/2 on four spins-1/2 in a field B:
/// two singlets at 0, three triplets at 1, one quintet at 3.
double single_box_Z(double beta, double B) {
  const double c1 = 1 + 2 * std::cosh(beta * B);
  const double c2 = c1 + 2 * std::cosh(2 * beta * B);
  return 2 + 3 * std::exp(-beta) * c1 + std::exp(-3 * beta) * c2;
}

}  // namespace

TEST(Thermo, SingleBoxClosedForm) {
  const auto s = single_box_spectrum();
  for (double beta : {0.1, 1.0, 4.0})
    for (double B : {0.0, 0.3, -1.2}) {
      const auto p = thermo_point(s, beta, B, 4);
      EXPECT_NEAR(p.Z / single_box_Z(beta, B), 1.0, 1e-12);
      EXPECT_NEAR(p.F, -std::log(single_box_Z(beta, B)) / beta, 1e-12);
    }
}

TEST(Thermo, SusceptibilityMatchesFiniteDifference) {
  const auto g = checkerboard(4, 2);
  SpinRep rep(1);
  HilbertSpace space(g.n_sites, rep);
  const auto s = dense_spectrum(box_terms(g, rep), space, false);
  for (double beta : {0.5, 2.0}) {
    for (double B : {0.0, 0.4}) {
      const double h = 1e-4;
      const double mp = thermo_point(s, beta, B + h, 8).M;
      const double mm = thermo_point(s, beta, B - h, 8).M;
      EXPECT_NEAR(thermo_point(s, beta, B, 8).chi, (mp - mm) / (2 * h), 1e-7);
      // M = -dF/dB / N
      const double fp = thermo_point(s, beta, B + h, 8).F;
      const double fm = thermo_point(s, beta, B - h, 8).F;
      EXPECT_NEAR(thermo_point(s, beta, B, 8).M, -(fp - fm) / (2 * h) / 8, 1e-7);
    }
  }
}

TEST(Thermo, ZeroFieldMagnetizationVanishesAndChiBounded) {
  const auto g = checkerboard(4, 2);
  SpinRep rep(1);
  HilbertSpace space(g.n_sites, rep);
  const auto s = dense_spectrum(box_terms(g, rep), space, false);
  for (double beta : {0.1, 0.5, 1.0, 2.0, 5.0, 10.0}) {
    const auto p = thermo_point(s, beta, 0.0, 8);
    EXPECT_LT(std::abs(p.M), 1e-12);
    EXPECT_LE(p.chi, 0.125);
    EXPECT_GE(p.chi, 0.0);
  }
}

TEST(Thermo, LargeBetaIsStable) {
  const auto s = single_box_spectrum();
  const auto p = thermo_point(s, 1e4, 0.0, 4);
  EXPECT_TRUE(std::isfinite(p.log_Z));
  EXPECT_NEAR(p.log_Z, std::log(2.0), 1e-12);
  EXPECT_NEAR(p.F, -std::log(2.0) / 1e4, 1e-15);
  std::vector<double> e{-1e5, -1e5 + 1.0};
  EXPECT_NEAR(log_partition_function(e, {}, 10.0, 0.0), 1e6 + std::log1p(std::exp(-10.0)), 1e-6);
}

TEST(Thermo, InvalidInputsRejected) {
  const auto s = single_box_spectrum();
  EXPECT_THROW(thermo_point(s, 0.0, 0.0, 4), std::invalid_argument);
  EXPECT_THROW(thermo_point(s, -1.0, 0.0, 4), std::invalid_argument);
  Spectrum unlabeled;
  unlabeled.eigenvalues = {0.0, 1.0};
  EXPECT_THROW(thermo_point(unlabeled, 1.0, 0.0, 2), std::invalid_argument);
}

TEST(Thermo, ScanBoundMarginsNonNegative) {
  const auto g = checkerboard(4, 2);
  SpinRep rep(1);
  HilbertSpace space(g.n_sites, rep);
  const auto s = dense_spectrum(box_terms(g, rep), space, false);
  const auto rows = thermo_scan(s, 8, {0.1, 1.0, 10.0}, {-1.0, 0.0, 0.5});
  ASSERT_EQ(rows.size(), 9u);
  for (const auto& r : rows) {
    EXPECT_GE(r.bound_margin, -1e-9);
    if (r.point.B == 0.0) EXPECT_EQ(r.bound_margin, 0.0);
  }
}
