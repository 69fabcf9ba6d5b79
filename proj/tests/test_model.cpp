#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "dwh/model.hpp"

using namespace dwh;

namespace {
TrapParams fig3_trap() {
  TrapParams t;
  t.omega = 25.0;
  t.n_atoms = 10000;
  return t;
}
CavityParams fig3_cavity() {
  CavityParams c;
  c.xi = 0.01;
  c.n_photons = std::sqrt(275.0) / 0.01;
  return c;
}
}  // namespace

TEST(DerivedRates, CorrectionTermsVanish) {
  const auto r = derived_rates(fig3_trap(), CavityParams{}, 0.0);
  EXPECT_DOUBLE_EQ(r.omega_prime, 25.0);
  EXPECT_DOUBLE_EQ(r.omega_eff, 25.0);
  EXPECT_FALSE(r.has_epsilon());
  EXPECT_EQ(r.gamma_meas, 0.0);
}

TEST(DerivedRates, DressedFrequency) {
  const auto c = fig3_cavity();
  EXPECT_NEAR(c.coupling(), 16.583123951777, 1e-11);
  const auto r = derived_rates(fig3_trap(), c, 0.0);
  EXPECT_NEAR(r.omega_eff, 30.0, 1e-12);
  EXPECT_GE(r.omega_eff, std::abs(r.omega_prime));
}

TEST(DerivedRates, EpsilonLiteral) {
  TrapParams t;
  t.omega = 1.0;
  t.kappa = 20.0;
  t.n_atoms = 1000;
  CavityParams c;
  c.xi = 1e-3;
  c.n_photons = 1e10;
  const auto r = derived_rates(t, c, 0.0);
  EXPECT_NEAR(r.epsilon, 2e-6, 1e-20);
}

TEST(DerivedRates, OmegaPrimeShifts) {
  TrapParams t;
  t.omega = 1.0;
  t.lambda = 0.5;
  t.kappa = 0.25;
  t.n_atoms = 11;
  const auto r = derived_rates(t, CavityParams{}, 2.0);
  EXPECT_DOUBLE_EQ(r.omega_prime, 1.0 + 2.0 * 0.5 * 10 + 8.0 * 0.25 * 2.0);
}

TEST(DerivedRates, MeasurementStrength) {
  CavityParams c;
  c.xi = 0.5;
  c.drive = 2.0;
  c.gamma = 4.0;
  const auto r = derived_rates(TrapParams{}, c, 0.0);
  EXPECT_DOUBLE_EQ(r.gamma_meas, 16.0 * 0.25 * 4.0 / 16.0);
  c.gamma = 0.0;
  EXPECT_THROW(derived_rates(TrapParams{}, c, 0.0), InvalidParameter);
  c.drive = 0.0;
  EXPECT_NO_THROW(derived_rates(TrapParams{}, c, 0.0));
}

TEST(Validation, CollectsAllProblems) {
  TrapParams t;
  t.n_atoms = 0;
  t.kappa = -1.0;
  t.eta = std::nan("");
  try {
    t.validate();
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.problems().size(), 3u);
  }
  CavityParams c;
  c.gamma = -1.0;
  try {
    c.validate();
    FAIL();
  } catch (const ValidationError& e) {
    ASSERT_EQ(e.problems().size(), 1u);
    EXPECT_NE(e.problems()[0].find("gamma"), std::string::npos);
  }
}

TEST(Quadrature, FromJy) {
  EXPECT_EQ(quadrature_from_jy(0.0, 3.0), 0.0);
  EXPECT_NEAR(quadrature_from_jy(1667.0, std::sqrt(5000.0)), -23.574940084759, 1e-11);
  EXPECT_DOUBLE_EQ(quadrature_from_jy(-5.0, 5.0), 1.0);
  EXPECT_THROW(quadrature_from_jy(1.0, 0.0), InvalidParameter);
}

TEST(Quadrature, BohdInvert) {
  EXPECT_EQ(atomic_bohd_invert(0.0, 2.0), 0.0);
  EXPECT_DOUBLE_EQ(atomic_bohd_invert(3.0, 2.0), 1.5);
  for (double x : {-7.25, 0.1, 3.5, 1e5}) EXPECT_DOUBLE_EQ(atomic_bohd_invert(1.75 * x, 1.75), x);
  EXPECT_THROW(atomic_bohd_invert(1.0, 0.0), InvalidParameter);
}

TEST(BeamSplitter, Times) {
  auto t = optimal_beamsplitter_times(std::numbers::pi, 1);
  ASSERT_EQ(t.size(), 2u);
  EXPECT_DOUBLE_EQ(t[0], 0.5);
  EXPECT_DOUBLE_EQ(t[1], 1.5);
  t = optimal_beamsplitter_times(25.0, 0);
  EXPECT_NEAR(t[0], 0.0628318530718, 1e-12);
  EXPECT_DOUBLE_EQ(optimal_beamsplitter_times(1.0, 0)[0], std::numbers::pi / 2);
  for (double tn : optimal_beamsplitter_times(3.7, 20)) EXPECT_NEAR(std::abs(std::sin(3.7 * tn)), 1.0, 1e-14);
  EXPECT_THROW(optimal_beamsplitter_times(0.0, 1), InvalidParameter);
  EXPECT_THROW(optimal_beamsplitter_times(1.0, -1), InvalidParameter);
}

TEST(OpticalBohd, Values) {
  EXPECT_EQ(optical_bohd(0.0), 0.0);
  EXPECT_DOUBLE_EQ(optical_bohd(std::numbers::pi / 2), -1.0);
  EXPECT_NEAR(optical_bohd(-0.4631), 0.446723732, 1e-9);
  for (double p : {-2.0, 0.3, 1.1, 5.0}) {
    EXPECT_DOUBLE_EQ(optical_bohd(-p, 0.7, 1.3), -optical_bohd(p, 0.7, 1.3));
    EXPECT_NEAR(optical_bohd(p + 2 * std::numbers::pi), optical_bohd(p), 1e-14);
  }
}

TEST(Bloch, CasimirBound) {
  EXPECT_TRUE(within_casimir({5.0, 0.0, 0.0}, 10));
  EXPECT_TRUE(within_casimir({0.0, 0.0, std::sqrt(30.0)}, 10));
  EXPECT_FALSE(within_casimir({6.0, 0.0, 0.0}, 10));
}
