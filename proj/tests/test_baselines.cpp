#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "gdoa/baselines.hpp"
#include "gdoa/errors.hpp"
#include "gdoa/rng.hpp"

using namespace gdoa;

TEST(Grid, DefaultIsHalfDegree) {
  const AngularGrid g = AngularGrid::uniform();
  ASSERT_EQ(g.thetas.size(), 361u);
  EXPECT_EQ(g.thetas.front(), -90.0);
  EXPECT_EQ(g.thetas.back(), 90.0);
  for (std::size_t i = 1; i < g.thetas.size(); ++i)
    EXPECT_NEAR(g.thetas[i] - g.thetas[i - 1], 0.5, 1e-12);
}

TEST(Cbf, EmptyGridRejected) {
  EXPECT_THROW(cbf_spectrum({CMatrix::Ones(3, 1)}, AngularGrid{}), ConfigError);
}

TEST(Cbf, NoiselessSourcePeaksAtItsAngle) {
  const int M = 20, L = 4;
  const AngularGrid g = AngularGrid::uniform();
  for (double theta : {-62.5, -10.0, 0.0, 33.5}) {
    Rng rng(1);
    const CMatrix Y = steering_vector(theta_to_omega(theta), M) * draw_weights(1, L, {}, rng);
    const RVector P = cbf_spectrum({Y}, g);
    Eigen::Index best;
    P.maxCoeff(&best);
    EXPECT_EQ(g.thetas[best], theta);
    // M^2 normalization gives the mean |x|^2 at the true angle.
    EXPECT_NEAR(P(best), Y.row(0).squaredNorm() / L, 1e-12);
    const RVector Pn = cbf_spectrum({Y}, g, true);
    EXPECT_NEAR(Pn.maxCoeff(), 0.0, 1e-12);
  }
}

TEST(Cbf, WhiteNoiseIsFlat) {
  // E|a^H w|^2 = M for unit-variance white noise, so E[P] = 1/M everywhere.
  const int M = 10, L = 1, trials = 1000;
  const AngularGrid g = AngularGrid::uniform(61);
  RVector mean = RVector::Zero(61);
  for (int s = 0; s < trials; ++s) {
    Rng rng(100 + s);
    CMatrix Y(M, L);
    for (int m = 0; m < M; ++m) Y(m, 0) = rng.complex_normal(1.0);
    mean += cbf_spectrum({Y}, g);
  }
  mean /= trials;
  EXPECT_LE((mean.array() * M - 1.0).abs().maxCoeff(), 0.1);
}

TEST(Cbf, NonNegativeAndPhaseInvariant) {
  Rng rng(3);
  CMatrix Y(8, 3);
  for (int l = 0; l < 3; ++l)
    for (int m = 0; m < 8; ++m) Y(m, l) = rng.complex_normal(1.0);
  const AngularGrid g = AngularGrid::uniform();
  const RVector P = cbf_spectrum({Y}, g);
  const RVector Q = cbf_spectrum({CMatrix(Y * std::polar(1.0, 0.77))}, g);
  EXPECT_GE(P.minCoeff(), 0.0);
  EXPECT_LE((P - Q).cwiseAbs().maxCoeff(), 1e-12 * P.maxCoeff());
}

TEST(Cbf, SeparatedSourcesResolvedCloseSourcesMerge) {
  const int M = 20, L = 10;
  const AngularGrid g = AngularGrid::uniform();
  const auto far = cbf_doa_estimates(
      {steering_matrix({theta_to_omega(-40.0), theta_to_omega(-20.0)}, M) * CMatrix::Ones(2, L)},
      g, 2);
  ASSERT_EQ(far.size(), 2u);
  EXPECT_NEAR(far[0], -40.0, 1.0);
  EXPECT_NEAR(far[1], -20.0, 1.0);
  // Merged: no two maxima in [25, 40] with a >= 3 dB dip between them.
  const CMatrix A = steering_matrix({theta_to_omega(30.0), theta_to_omega(35.0)}, M);
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Rng rng(seed);
    const RVector P = cbf_spectrum({A * draw_weights(2, L, {}, rng)}, g, true);
    std::vector<int> in;
    for (int i : find_peaks(P))
      if (g.thetas[i] >= 25.0 && g.thetas[i] <= 40.0) in.push_back(i);
    std::sort(in.begin(), in.end());
    for (std::size_t i = 0; i + 1 < in.size(); ++i) {
      const double dip = P.segment(in[i], in[i + 1] - in[i] + 1).minCoeff();
      EXPECT_LT(std::min(P(in[i]), P(in[i + 1])) - dip, 3.0) << seed;
    }
  }
}

TEST(Peaks, SortedByHeight) {
  RVector s(7);
  s << 0, 2, 1, 5, 1, 3, 0;
  EXPECT_EQ(find_peaks(s), (std::vector<int>{3, 5, 1}));
}
