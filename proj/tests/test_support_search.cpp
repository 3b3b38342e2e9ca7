#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "gdoa/circular.hpp"
#include "gdoa/errors.hpp"
#include "gdoa/support_search.hpp"
#include "oracles.hpp"

using namespace gdoa;

namespace {

struct Instance {
  CMatrix moments;
  RMatrix nu;
  CMatrix Y;
  JHMatrices jh;
  HyperParams hyper;
};

Instance random_instance(std::mt19937_64& gen, int M, int N, int L) {
  std::uniform_real_distribution<double> u(-kPi, kPi), lk(-1, 3), lv(-1, 1), r(0.05, 0.95);
  Instance in;
  in.moments.resize(M, N);
  for (int i = 0; i < N; ++i) in.moments.col(i) = moment_vector({u(gen), std::pow(10.0, lk(gen))}, M);
  in.nu.resize(M, L);
  for (int l = 0; l < L; ++l)
    for (int m = 0; m < M; ++m) in.nu(m, l) = std::pow(10.0, lv(gen));
  in.Y = oracle::random_cmatrix(gen, M, L, 2.0);
  in.jh = compute_JH(in.moments, NoiseEstimate(NoiseCase::IV, M, L, in.nu.reshaped()), in.Y);
  in.hyper = {r(gen), std::pow(10.0, lv(gen))};
  return in;
}

std::vector<int> random_support(std::mt19937_64& gen, int N, int size) {
  std::vector<int> all(N);
  for (int i = 0; i < N; ++i) all[i] = i;
  std::shuffle(all.begin(), all.end(), gen);
  all.resize(size);
  std::sort(all.begin(), all.end());
  return all;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

void expect_matches_dense(const SearchWorkspace& ws, double tol) {
  for (int l = 0; l < ws.L(); ++l) {
    const auto ref = oracle::dense_posterior(ws.jh.J[l], ws.jh.H, l, ws.active, ws.hyper.tau);
    if (ws.active.empty()) continue;
    const double cs = std::max(1.0, ref.C.norm());
    const double xs = std::max(1.0, ref.x.norm());
    EXPECT_LE((ws.cov[l] - ref.C).norm() / cs, tol);
    EXPECT_LE((ws.means.col(l) - ref.x).norm() / xs, tol);
  }
}

} // namespace

TEST(ComputeJH, UnitVarianceGivesDirichletKernel) {
  const int M = 9;
  const std::vector<double> w{-1.0, 0.2, 0.21, 2.5};
  const CMatrix A = steering_matrix(w, M);
  const CMatrix Y = CMatrix::Zero(M, 2);
  const auto jh = compute_JH(A, NoiseEstimate::constant(NoiseCase::I, M, 2, 1.0), Y);
  for (int l = 0; l < 2; ++l)
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        // sum_m exp(j m (w_j - w_i)) in closed form.
        const double d = w[j] - w[i];
        const cplx ref = i == j ? cplx(M)
                                : (1.0 - std::polar(1.0, M * d)) / (1.0 - std::polar(1.0, d));
        EXPECT_LE(std::abs(jh.J[l](i, j) - ref), 1e-12);
      }
}

TEST(ComputeJH, MatchesNaiveLoops) {
  std::mt19937_64 gen(1);
  const Instance in = random_instance(gen, 7, 5, 3);
  std::vector<CMatrix> J;
  CMatrix H;
  oracle::naive_jh(in.moments, in.nu, in.Y, J, H);
  for (int l = 0; l < 3; ++l) {
    EXPECT_LE((in.jh.J[l] - J[l]).cwiseAbs().maxCoeff(), 1e-13 * J[l].cwiseAbs().maxCoeff());
    const RVector d = in.jh.J[l].diagonal().real();
    EXPECT_EQ(d.minCoeff(), d.maxCoeff());
    EXPECT_NEAR(d(0), in.nu.col(l).cwiseInverse().sum(), 1e-13 * d(0));
    EXPECT_EQ((in.jh.J[l] - in.jh.J[l].adjoint()).norm(), 0.0);
  }
  EXPECT_LE((in.jh.H - H).cwiseAbs().maxCoeff(), 1e-13 * H.cwiseAbs().maxCoeff());
}

TEST(ComputeJH, RejectsNonpositiveVariance) {
  EXPECT_THROW(NoiseEstimate(NoiseCase::I, 3, 2, RVector::Zero(1)), Error);
}

TEST(LnZ, EmptySupportIsZero) {
  std::mt19937_64 gen(2);
  const Instance in = random_instance(gen, 6, 4, 2);
  EXPECT_EQ(ln_Z({}, in.jh, in.hyper), 0.0);
}

TEST(LnZ, MatchesDenseDefinition) {
  std::mt19937_64 gen(3);
  for (int t = 0; t < 50; ++t) {
    const Instance in = random_instance(gen, 8, 8, 3);
    const auto S = random_support(gen, 8, t % 6);
    const double ref = oracle::dense_ln_z(in.jh.J, in.jh.H, S, in.hyper.rho, in.hyper.tau);
    EXPECT_LE(rel(ln_Z(S, in.jh, in.hyper), ref), 1e-10);
  }
}

TEST(LnZ, IncreasingInRho) {
  std::mt19937_64 gen(4);
  const Instance in = random_instance(gen, 6, 6, 2);
  const std::vector<int> S{1, 4};
  double prev = -INFINITY;
  for (double rho : {0.1, 0.3, 0.5, 0.7, 0.9}) {
    const double z = ln_Z(S, in.jh, {rho, in.hyper.tau});
    EXPECT_GT(z, prev);
    prev = z;
  }
}

TEST(Delta, EmptySupportClosedForm) {
  std::mt19937_64 gen(5);
  const Instance in = random_instance(gen, 6, 5, 3);
  const SearchWorkspace ws = make_workspace(in.jh, in.hyper);
  for (int k = 0; k < 5; ++k) {
    const Activation a = delta_activate(k, ws);
    for (int l = 0; l < 3; ++l) {
      const double v = 1.0 / (in.nu.col(l).cwiseInverse().sum() + 1.0 / in.hyper.tau);
      EXPECT_NEAR(a.v(l), v, 1e-14 * v);
      EXPECT_LE(std::abs(a.u(l) - v * in.jh.H(k, l)), 1e-13 * std::abs(v * in.jh.H(k, l)) + 1e-300);
    }
  }
}

TEST(Delta, MatchesLnZDifferences) {
  std::mt19937_64 gen(6);
  for (int t = 0; t < 100; ++t) {
    const Instance in = random_instance(gen, 8, 8, 3);
    const auto S = random_support(gen, 8, t % 3);
    const SearchWorkspace ws = make_workspace(in.jh, in.hyper, S);
    const double base = oracle::dense_ln_z(in.jh.J, in.jh.H, S, in.hyper.rho, in.hyper.tau);
    for (int k = 0; k < 8; ++k) {
      std::vector<int> T = S;
      const bool active = std::binary_search(S.begin(), S.end(), k);
      double d;
      if (active) {
        T.erase(std::find(T.begin(), T.end(), k));
        d = delta_deactivate(k, ws);
      } else {
        T.insert(std::lower_bound(T.begin(), T.end(), k), k);
        d = delta_activate(k, ws).delta;
      }
      const double ref =
          oracle::dense_ln_z(in.jh.J, in.jh.H, T, in.hyper.rho, in.hyper.tau) - base;
      EXPECT_LE(rel(d, ref), 1e-8) << "k=" << k;
    }
  }
}

TEST(Delta, OddsShiftIsUniform) {
  std::mt19937_64 gen(7);
  const Instance in = random_instance(gen, 6, 6, 2);
  const SearchWorkspace a = make_workspace(in.jh, {0.5, in.hyper.tau}, {2});
  const SearchWorkspace b = make_workspace(in.jh, {0.2, in.hyper.tau}, {2});
  const double shift = std::log(0.2 / 0.8) - std::log(1.0);
  for (int k : {0, 1, 3, 4, 5})
    EXPECT_NEAR(delta_activate(k, b).delta - delta_activate(k, a).delta, shift, 1e-10);
}

TEST(Delta, SingletonSymmetry) {
  std::mt19937_64 gen(8);
  const Instance in = random_instance(gen, 6, 4, 3);
  const SearchWorkspace empty = make_workspace(in.jh, in.hyper);
  const SearchWorkspace one = make_workspace(in.jh, in.hyper, {2});
  EXPECT_NEAR(delta_deactivate(2, one), -delta_activate(2, empty).delta, 1e-10);
}

TEST(Delta, StrongComponentNotPruned) {
  const int M = 10;
  const CMatrix A = steering_matrix({0.4, -1.9}, M);
  CMatrix Y = 50.0 * A.col(0) * CMatrix::Ones(1, 2);
  const auto jh = compute_JH(A, NoiseEstimate::constant(NoiseCase::I, M, 2, 0.1), Y);
  const SearchWorkspace ws = make_workspace(jh, {0.5, 100.0}, {0});
  EXPECT_LT(delta_deactivate(0, ws), -1e4);
}

TEST(Delta, WrongStateRejected) {
  std::mt19937_64 gen(9);
  const Instance in = random_instance(gen, 5, 4, 1);
  const SearchWorkspace ws = make_workspace(in.jh, in.hyper, {1});
  EXPECT_THROW(delta_activate(1, ws), DomainError);
  EXPECT_THROW(delta_deactivate(0, ws), DomainError);
}

TEST(Flip, BlockUpdatesMatchDenseInversion) {
  std::mt19937_64 gen(10);
  for (int t = 0; t < 40; ++t) {
    const Instance in = random_instance(gen, 8, 8, 3);
    SearchWorkspace ws = make_workspace(in.jh, in.hyper, random_support(gen, 8, t % 5));
    std::uniform_int_distribution<int> pick(0, 7);
    for (int f = 0; f < 12; ++f) {
      apply_flip(pick(gen), ws);
      expect_matches_dense(ws, 1e-10);
      EXPECT_LE(rel(ws.ln_z, oracle::dense_ln_z(in.jh.J, in.jh.H, ws.active, in.hyper.rho,
                                                in.hyper.tau)),
                1e-9);
      EXPECT_TRUE(std::is_sorted(ws.active.begin(), ws.active.end()));
    }
  }
}

TEST(Flip, ActivateThenDeactivateRestores) {
  std::mt19937_64 gen(11);
  const Instance in = random_instance(gen, 8, 6, 2);
  SearchWorkspace ws = make_workspace(in.jh, in.hyper, {0, 3});
  const auto cov = ws.cov;
  const CMatrix means = ws.means;
  apply_flip(4, ws);
  apply_flip(4, ws);
  ASSERT_EQ(ws.active, (std::vector<int>{0, 3}));
  for (int l = 0; l < 2; ++l) EXPECT_LE((ws.cov[l] - cov[l]).norm(), 1e-10 * cov[l].norm());
  EXPECT_LE((ws.means - means).norm(), 1e-10 * means.norm());
}

TEST(Flip, HermitianAfterManyFlips) {
  std::mt19937_64 gen(12);
  const Instance in = random_instance(gen, 10, 10, 2);
  SearchWorkspace ws = make_workspace(in.jh, in.hyper);
  std::uniform_int_distribution<int> pick(0, 9);
  for (int f = 0; f < 49; ++f) {
    apply_flip(pick(gen), ws);
    for (const auto& C : ws.cov)
      if (C.size() > 0) EXPECT_LE((C - C.adjoint()).norm(), 1e-12 * C.norm());
  }
  EXPECT_EQ(ws.flips_since_refresh, 49);
  apply_flip(pick(gen), ws);
  EXPECT_EQ(ws.flips_since_refresh, 0);
  expect_matches_dense(ws, 1e-12);
}

TEST(Greedy, EmptyForNoiseWithTinyRho) {
  std::mt19937_64 gen(13);
  const int M = 10, N = 10, L = 4;
  CMatrix A(M, N);
  std::uniform_real_distribution<double> u(-kPi, kPi);
  for (int i = 0; i < N; ++i) A.col(i) = moment_vector({u(gen), 50.0}, M);
  const CMatrix Y = oracle::random_cmatrix(gen, M, L, std::sqrt(0.5));
  const auto jh = compute_JH(A, NoiseEstimate::constant(NoiseCase::I, M, L, 1.0), Y);
  SearchWorkspace ws = make_workspace(jh, {1e-6, 1.0});
  EXPECT_EQ(greedy_search(ws).support.order(), 0);
}

TEST(Greedy, TrajectoryIncreasingAndLocallyOptimal) {
  std::mt19937_64 gen(14);
  for (int t = 0; t < 30; ++t) {
    const Instance in = random_instance(gen, 8, 8, 3);
    SearchWorkspace ws = make_workspace(in.jh, in.hyper);
    const SearchResult r = greedy_search(ws);
    for (std::size_t i = 1; i < r.ln_z_trajectory.size(); ++i)
      EXPECT_GT(r.ln_z_trajectory[i], r.ln_z_trajectory[i - 1]);
    for (int k = 0; k < 8; ++k) {
      const double d = std::binary_search(ws.active.begin(), ws.active.end(), k)
                           ? delta_deactivate(k, ws)
                           : delta_activate(k, ws).delta;
      EXPECT_LE(d, 0.0);
    }
    EXPECT_EQ(r.support.active_set, ws.active);
  }
}

TEST(Greedy, NeverExceedsExhaustiveMaximum) {
  std::mt19937_64 gen(15);
  int hits = 0;
  for (int t = 0; t < 30; ++t) {
    const int N = 4 + t % 5;
    const Instance in = random_instance(gen, N + 2, N, 2);
    double best = -INFINITY;
    for (unsigned mask = 0; mask < (1u << N); ++mask) {
      std::vector<int> S;
      for (int i = 0; i < N; ++i)
        if (mask & (1u << i)) S.push_back(i);
      best = std::max(best, oracle::dense_ln_z(in.jh.J, in.jh.H, S, in.hyper.rho, in.hyper.tau));
    }
    SearchWorkspace ws = make_workspace(in.jh, in.hyper);
    greedy_search(ws);
    const double z = oracle::dense_ln_z(in.jh.J, in.jh.H, ws.active, in.hyper.rho, in.hyper.tau);
    EXPECT_LE(z, best + 1e-9 * std::max(1.0, std::abs(best)));
    if (rel(z, best) <= 1e-9) ++hits;
  }
  EXPECT_GE(hits, 27);
}

TEST(Greedy, TieBreaksToLowestIndex) {
  // Two identical columns give identical activation gains. Near point-mass
  // moments make the copy redundant once the first is active.
  const int M = 6;
  CMatrix A(M, 3);
  A.col(0) = moment_vector({0.3, 1e12}, M);
  A.col(1) = moment_vector({-2.0, 1e12}, M);
  A.col(2) = A.col(1);
  const CMatrix Y = 10.0 * A.col(1);
  const auto jh = compute_JH(A, NoiseEstimate::constant(NoiseCase::I, M, 1, 1.0), Y);
  SearchWorkspace ws = make_workspace(jh, {0.5, 1000.0});
  const SearchResult r = greedy_search(ws);
  EXPECT_EQ(delta_activate(1, make_workspace(jh, {0.5, 1000.0})).delta,
            delta_activate(2, make_workspace(jh, {0.5, 1000.0})).delta);
  EXPECT_EQ(r.support.active_set, (std::vector<int>{1}));
}
