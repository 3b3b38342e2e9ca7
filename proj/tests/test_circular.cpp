#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "gdoa/circular.hpp"
#include "gdoa/errors.hpp"
#include "oracles.hpp"

using namespace gdoa;

TEST(BesselRatio, TrivialOrders) {
  EXPECT_EQ(bessel_ratio(0.0, 1), 0.0);
  EXPECT_EQ(bessel_ratio(0.0, 0), 1.0);
  EXPECT_EQ(bessel_ratio(3.0, 0), 1.0);
}

TEST(BesselRatio, MatchesPowerSeriesAtTwo) {
  const double expected = oracle::bessel_ratio_series(2.0, 1);
  EXPECT_NEAR(expected, 0.6978, 1e-4);
  EXPECT_NEAR(bessel_ratio(2.0, 1), expected, 1e-14);
}

TEST(BesselRatio, MatchesPowerSeriesAcrossRange) {
  for (double k : {1e-6, 0.01, 0.3, 1.0, 2.5, 7.0, 12.0, 19.9, 20.0, 20.1, 27.0, 35.0, 45.0}) {
    for (int m : {1, 2, 3, 5, 8, 13, 20, 32}) {
      const double ref = oracle::bessel_ratio_series(k, m);
      EXPECT_NEAR(bessel_ratio(k, m), ref, 1e-12 + 1e-12 * ref) << "kappa=" << k << " m=" << m;
    }
  }
}

TEST(BesselRatio, BatchAgreesWithSingle) {
  for (double k : {0.5, 20.0, 300.0, 1e5}) {
    const RVector r = bessel_ratios(k, 40);
    for (int m = 0; m < 40; ++m) EXPECT_NEAR(r(m), bessel_ratio(k, m), 1e-14);
  }
}

TEST(BesselRatio, BoundedAndMonotoneInKappa) {
  for (int m : {1, 2, 4, 10, 31}) {
    double prev = 0.0;
    for (double k = 0.0; k < 2e6; k = k * 1.3 + 0.05) {
      const double r = bessel_ratio(k, m);
      ASSERT_TRUE(std::isfinite(r));
      ASSERT_GE(r, 0.0);
      ASSERT_LE(r, 1.0);
      ASSERT_GE(r, prev - 1e-15) << "kappa=" << k << " m=" << m;
      prev = r;
    }
  }
}

TEST(BesselRatio, LargeKappaAsymptote) {
  // I_1/I_0 = 1 - 1/(2k) - 1/(8k^2) - 1/(8k^3) - 25/(128k^4) - ... for large k.
  for (double k : {1e3, 1e4, 1e6}) {
    const double approx = 1.0 - 1.0 / (2 * k) - 1.0 / (8 * k * k) - 1.0 / (8 * k * k * k);
    EXPECT_NEAR(bessel_ratio(k, 1), approx, 1.0 / (k * k * k * k) + 1e-15);
  }
}

TEST(BesselRatio, NegativeKappaRejected) {
  EXPECT_THROW(bessel_ratio(-1.0, 1), DomainError);
  EXPECT_THROW(bessel_ratio(1.0, -1), DomainError);
}

TEST(MomentVector, UniformCircular) {
  const CVector a = moment_vector({0.7, 0.0}, 5);
  EXPECT_EQ(a(0), cplx(1.0, 0.0));
  for (int m = 1; m < 5; ++m) EXPECT_EQ(std::abs(a(m)), 0.0);
}

TEST(MomentVector, PointMassLimit) {
  const double mu = -1.2;
  const CVector a = moment_vector({mu, 1e9}, 20);
  for (int m = 0; m < 20; ++m)
    EXPECT_LE(std::abs(a(m) - std::polar(1.0, m * mu)), 1e-3);
}

TEST(MomentVector, MatchesQuadrature) {
  const CVector a = moment_vector({0.3, 5.0}, 4);
  for (int m = 0; m < 4; ++m) {
    const cplx ref = oracle::von_mises_moment_quadrature(0.3, 5.0, m);
    EXPECT_LE(std::abs(a(m) - ref), 1e-8) << m;
  }
}

TEST(MomentVector, ConsistencyAndDecay) {
  std::mt19937_64 gen(4);
  std::uniform_real_distribution<double> mu(-kPi, kPi), lk(-2, 5);
  for (int t = 0; t < 50; ++t) {
    const VonMises vm{mu(gen), std::pow(10.0, lk(gen))};
    const CVector a = moment_vector(vm, 24);
    EXPECT_EQ(a(0), cplx(1.0, 0.0));
    EXPECT_NEAR(std::arg(a(1)), vm.mu, 1e-12);
    EXPECT_NEAR(std::abs(a(1)), bessel_ratio(vm.kappa, 1), 1e-15);
    for (int m = 1; m < 24; ++m) EXPECT_LE(std::abs(a(m)), std::abs(a(m - 1)) + 1e-15);
  }
}

TEST(Posterior, SingleHarmonicIsVonMises) {
  for (double c : {0.1, 1.0, 7.5, 300.0}) {
    CVector eta = CVector::Zero(6);
    eta(1) = c;
    const auto p = approximate_posterior(eta);
    EXPECT_FALSE(p.degenerate);
    EXPECT_NEAR(p.vm.mu, 0.0, 1e-12);
    EXPECT_NEAR(p.vm.kappa, c, 1e-9 * c);
  }
}

TEST(Posterior, PhaseShiftMovesMode) {
  // With a_1(w) = exp(jw), Re{conj(eta_1) exp(jw)} peaks where w = arg(eta_1).
  for (double phi : {-2.5, -0.4, 0.9, 3.0}) {
    CVector eta = CVector::Zero(8);
    eta(1) = std::polar(2.0, phi);
    const auto p = approximate_posterior(eta);
    EXPECT_NEAR(wrap_angle(p.vm.mu - phi), 0.0, 1e-10);
    EXPECT_NEAR(p.vm.kappa, 2.0, 1e-9);
  }
}

TEST(Posterior, ZeroEtaIsDegenerate) {
  const auto p = approximate_posterior(CVector::Zero(5));
  EXPECT_TRUE(p.degenerate);
  EXPECT_EQ(p.vm.mu, 0.0);
  EXPECT_EQ(p.vm.kappa, 0.0);
}

TEST(Posterior, ShortEtaRejected) {
  EXPECT_THROW(approximate_posterior(CVector::Zero(1)), DimensionError);
}

TEST(Posterior, RandomEtaMatchesDenseGrid) {
  std::mt19937_64 gen(2024);
  for (int trial = 0; trial < 5; ++trial) {
    const CVector eta = oracle::random_cmatrix(gen, 16, 1);
    const double step = 2 * kPi / (1 << 20);
    const double g = oracle::grid_argmax(eta, 1 << 20);
    const double ref = oracle::golden_max(
        [&](double w) { return oracle::log_density(eta, w); }, g - step, g + step);
    const auto p = approximate_posterior(eta);
    EXPECT_NEAR(wrap_angle(p.vm.mu - ref), 0.0, 1e-6);
  }
}

TEST(Posterior, ModeDominatesCoarseGridAndCurvature) {
  std::mt19937_64 gen(9);
  std::uniform_real_distribution<double> u(-kPi, kPi);
  for (int trial = 0; trial < 200; ++trial) {
    const int M = 2 + trial % 30;
    const CVector eta = oracle::random_cmatrix(gen, M, 1, 0.5 + trial % 7);
    std::optional<VonMises> prior;
    if (trial % 3 == 0) prior = VonMises{u(gen), 3.0};
    const double kp = prior ? prior->kappa : 0.0, mp = prior ? prior->mu : 0.0;
    const auto p = approximate_posterior(eta, prior);
    const double at_mode = oracle::log_density(eta, p.vm.mu, kp, mp);
    EXPECT_NEAR(at_mode, cosine_series_log_density(eta, prior, p.vm.mu), 1e-12 * (std::abs(at_mode) + 1.0));
    for (int g = 0; g < 4096; ++g) {
      const double w = -kPi + 2 * kPi * g / 4096;
      ASSERT_GE(at_mode, oracle::log_density(eta, w, kp, mp) - 1e-9) << trial;
    }
    // Gradient vanishes; kappa matches the negative central second difference.
    const double h = 1e-4;
    const double fp = oracle::log_density(eta, p.vm.mu + h, kp, mp);
    const double fm = oracle::log_density(eta, p.vm.mu - h, kp, mp);
    const double scale = eta.cwiseAbs().sum() * M * M + kp + 1.0;
    EXPECT_NEAR((fp - fm) / (2 * h), 0.0, 1e-6 * scale);
    const double curvature = -(fp - 2 * at_mode + fm) / (h * h);
    EXPECT_NEAR(p.vm.kappa, std::max(0.0, curvature), 1e-4 * scale);
    EXPECT_GE(p.vm.kappa, 0.0);
    EXPECT_GE(p.vm.mu, -kPi);
    EXPECT_LT(p.vm.mu, kPi);
  }
}

TEST(Posterior, PriorOnlyGivesPrior) {
  const auto p = approximate_posterior(CVector::Zero(4), VonMises{1.1, 4.0});
  EXPECT_FALSE(p.degenerate);
  EXPECT_NEAR(p.vm.mu, 1.1, 1e-12);
  EXPECT_NEAR(p.vm.kappa, 4.0, 1e-9);
}
