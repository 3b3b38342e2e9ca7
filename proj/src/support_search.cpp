#include "gdoa/support_search.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gdoa/errors.hpp"

namespace gdoa {
namespace {

constexpr int kRefreshInterval = 50;

Eigen::Index position_of(const std::vector<int>& active, int k) {
  const auto it = std::lower_bound(active.begin(), active.end(), k);
  if (it == active.end() || *it != k) return -1;
  return it - active.begin();
}

CMatrix regularized_block(const CMatrix& J, const std::vector<int>& active,
                          double tau) {
  const auto n = static_cast<Eigen::Index>(active.size());
  CMatrix B(n, n);
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = 0; b < n; ++b) B(a, b) = J(active[a], active[b]);
  B.diagonal().array() += 1.0 / tau;
  return B;
}

CVector gather(const CMatrix& H, const std::vector<int>& active, Eigen::Index l) {
  CVector h(static_cast<Eigen::Index>(active.size()));
  for (std::size_t a = 0; a < active.size(); ++a) h(a) = H(active[a], l);
  return h;
}

double log_odds(const HyperParams& hyper) {
  return std::log(hyper.rho / (1.0 - hyper.rho));
}

void check_hyper(const HyperParams& hyper) {
  if (!(hyper.tau > 0.0)) throw DomainError("support search: tau must be > 0");
  if (!(hyper.rho > 0.0 && hyper.rho < 1.0))
    throw DomainError("support search: rho must lie in (0, 1)");
}

} // namespace

SupportState SupportState::from_active(int N, std::vector<int> active) {
  std::sort(active.begin(), active.end());
  SupportState out;
  out.s.assign(static_cast<std::size_t>(N), false);
  for (int i : active) {
    if (i < 0 || i >= N) throw DimensionError("support index out of range");
    if (out.s[i]) throw DimensionError("duplicate support index");
    out.s[i] = true;
  }
  out.active_set = std::move(active);
  return out;
}

JHMatrices compute_JH(const CMatrix& moments, const NoiseEstimate& noise,
                      const CMatrix& Y) {
  const Eigen::Index M = moments.rows();
  const Eigen::Index N = moments.cols();
  const Eigen::Index L = Y.cols();
  if (Y.rows() != M || noise.M() != M || noise.L() != L)
    throw DimensionError("compute_JH: inconsistent dimensions");
  JHMatrices out;
  out.J.reserve(static_cast<std::size_t>(L));
  out.H.resize(N, L);
  for (Eigen::Index l = 0; l < L; ++l) {
    RVector w(M);
    for (Eigen::Index m = 0; m < M; ++m) {
      const double nu = noise.at(static_cast<int>(m), static_cast<int>(l));
      if (!(nu > 0.0)) throw DomainError("compute_JH: nonpositive variance");
      w(m) = 1.0 / nu;
    }
    const CMatrix WA = w.asDiagonal() * moments;
    CMatrix J = moments.adjoint() * WA;
    J.triangularView<Eigen::StrictlyUpper>() = J.adjoint();
    J.diagonal().setConstant(w.sum());
    out.J.push_back(std::move(J));
    out.H.col(l) = WA.adjoint() * Y.col(l);
  }
  return out;
}

double ln_Z(const std::vector<int>& active, const JHMatrices& jh,
            const HyperParams& hyper) {
  check_hyper(hyper);
  if (active.empty()) return 0.0;
  const double n = static_cast<double>(active.size());
  double score = n * log_odds(hyper);
  const Eigen::Index L = jh.H.cols();
  for (Eigen::Index l = 0; l < L; ++l) {
    const CMatrix B = regularized_block(jh.J[l], active, hyper.tau);
    const Eigen::LLT<CMatrix> llt(B);
    if (llt.info() != Eigen::Success)
      throw NumericalError("ln_Z: system is not Hermitian positive definite");
    const CVector h = gather(jh.H, active, l);
    double logdet = 0.0;
    const CMatrix& Lf = llt.matrixLLT();
    for (Eigen::Index i = 0; i < Lf.rows(); ++i) logdet += 2.0 * std::log(Lf(i, i).real());
    const double quad = h.dot(llt.solve(h)).real();
    score += -logdet - n * std::log(hyper.tau) + quad;
  }
  return score;
}

double ln_Z(const SupportState& s, const SearchWorkspace& ws) {
  return ln_Z(s.active_set, ws.jh, ws.hyper);
}

void refresh(SearchWorkspace& ws) {
  const Eigen::Index L = ws.L();
  const auto n = static_cast<Eigen::Index>(ws.active.size());
  ws.cov.assign(static_cast<std::size_t>(L), CMatrix(n, n));
  ws.means.resize(n, L);
  for (Eigen::Index l = 0; l < L; ++l) {
    if (n == 0) continue;
    const CMatrix B = regularized_block(ws.jh.J[l], ws.active, ws.hyper.tau);
    const Eigen::LLT<CMatrix> llt(B);
    if (llt.info() != Eigen::Success)
      throw NumericalError("weight posterior: system is not Hermitian positive definite");
    CMatrix C = llt.solve(CMatrix::Identity(n, n));
    C = 0.5 * (C + C.adjoint()).eval();
    ws.means.col(l) = C * gather(ws.jh.H, ws.active, l);
    ws.cov[l] = std::move(C);
  }
  ws.ln_z = ln_Z(ws.active, ws.jh, ws.hyper);
  ws.flips_since_refresh = 0;
}

SearchWorkspace make_workspace(JHMatrices jh, const HyperParams& hyper,
                               std::vector<int> active) {
  check_hyper(hyper);
  if (static_cast<Eigen::Index>(jh.J.size()) != jh.H.cols())
    throw DimensionError("make_workspace: J count must equal snapshot count");
  SearchWorkspace ws;
  ws.jh = std::move(jh);
  ws.hyper = hyper;
  ws.active = SupportState::from_active(ws.N(), std::move(active)).active_set;
  refresh(ws);
  return ws;
}

Activation delta_activate(int k, const SearchWorkspace& ws) {
  if (k < 0 || k >= ws.N()) throw DimensionError("delta_activate: index out of range");
  if (position_of(ws.active, k) >= 0)
    throw DomainError("delta_activate: index already active");
  const Eigen::Index L = ws.L();
  const auto n = static_cast<Eigen::Index>(ws.active.size());
  const double tau = ws.hyper.tau;
  Activation act;
  act.k = k;
  act.v.resize(L);
  act.u.resize(L);
  act.w.resize(static_cast<std::size_t>(L));
  double delta = log_odds(ws.hyper);
  for (Eigen::Index l = 0; l < L; ++l) {
    const CMatrix& J = ws.jh.J[l];
    CVector jk(n);
    for (Eigen::Index a = 0; a < n; ++a) jk(a) = J(ws.active[a], k);
    CVector w = n > 0 ? CVector(ws.cov[l] * jk) : CVector(0);
    const double schur = J(k, k).real() + 1.0 / tau - jk.dot(w).real();
    if (!(schur > 0.0))
      throw NumericalError("delta_activate: nonpositive Schur complement for index " +
                           std::to_string(k));
    const double v = 1.0 / schur;
    const cplx residual = ws.jh.H(k, l) - (n > 0 ? jk.dot(ws.means.col(l)) : cplx{});
    const cplx u = v * residual;
    act.v(l) = v;
    act.u(l) = u;
    act.w[l] = std::move(w);
    delta += std::log(v / tau) + std::norm(u) / v;
  }
  act.delta = delta;
  return act;
}

double delta_deactivate(int k, const SearchWorkspace& ws) {
  const Eigen::Index p = position_of(ws.active, k);
  if (p < 0) throw DomainError("delta_deactivate: index not active");
  double delta = -log_odds(ws.hyper);
  for (Eigen::Index l = 0; l < ws.L(); ++l) {
    const double c = ws.cov[l](p, p).real();
    if (!(c > 0.0))
      throw NumericalError("delta_deactivate: nonpositive posterior variance");
    delta -= std::log(c / ws.hyper.tau) + std::norm(ws.means(p, l)) / c;
  }
  return delta;
}

void apply_flip(int k, SearchWorkspace& ws, const Activation* scratch) {
  const Eigen::Index L = ws.L();
  const auto n = static_cast<Eigen::Index>(ws.active.size());
  const Eigen::Index p = position_of(ws.active, k);
  if (p < 0) {
    Activation local;
    if (scratch == nullptr || scratch->k != k) {
      local = delta_activate(k, ws);
      scratch = &local;
    }
    // Insert k at its sorted position q.
    const auto q = static_cast<Eigen::Index>(
        std::lower_bound(ws.active.begin(), ws.active.end(), k) - ws.active.begin());
    auto dst = [q](Eigen::Index a) { return a < q ? a : a + 1; };
    CMatrix means(n + 1, L);
    for (Eigen::Index l = 0; l < L; ++l) {
      const double v = scratch->v(l);
      const cplx u = scratch->u(l);
      const CVector& w = scratch->w[l];
      CMatrix C(n + 1, n + 1);
      for (Eigen::Index a = 0; a < n; ++a) {
        for (Eigen::Index b = 0; b < n; ++b)
          C(dst(a), dst(b)) = ws.cov[l](a, b) + v * w(a) * std::conj(w(b));
        C(dst(a), q) = -v * w(a);
        C(q, dst(a)) = -v * std::conj(w(a));
        means(dst(a), l) = ws.means(a, l) - w(a) * u;
      }
      C(q, q) = v;
      means(q, l) = u;
      ws.cov[l] = std::move(C);
    }
    ws.means = std::move(means);
    ws.active.insert(ws.active.begin() + q, k);
    ws.ln_z += scratch->delta;
  } else {
    const double delta = delta_deactivate(k, ws);
    auto src = [p](Eigen::Index a) { return a < p ? a : a + 1; };
    CMatrix means(n - 1, L);
    for (Eigen::Index l = 0; l < L; ++l) {
      const CMatrix& C = ws.cov[l];
      const cplx c = C(p, p);
      const cplx xk = ws.means(p, l);
      CMatrix Cn(n - 1, n - 1);
      for (Eigen::Index a = 0; a < n - 1; ++a) {
        for (Eigen::Index b = 0; b < n - 1; ++b)
          Cn(a, b) = C(src(a), src(b)) - C(src(a), p) * C(p, src(b)) / c;
        means(a, l) = ws.means(src(a), l) - C(src(a), p) / c * xk;
      }
      ws.cov[l] = std::move(Cn);
    }
    ws.means = std::move(means);
    ws.active.erase(ws.active.begin() + p);
    ws.ln_z += delta;
  }
  if (++ws.flips_since_refresh >= kRefreshInterval) refresh(ws);
}

SearchResult greedy_search(SearchWorkspace& ws) {
  const int N = ws.N();
  SearchResult result;
  result.ln_z_trajectory.push_back(ws.ln_z);
  const int cap = 10 * N;
  for (int flips = 0;; ++flips) {
    int best_k = -1;
    double best_delta = 0.0;
    Activation best_act;
    for (int k = 0; k < N; ++k) {
      if (position_of(ws.active, k) >= 0) {
        const double d = delta_deactivate(k, ws);
        if (best_k < 0 || d > best_delta) {
          best_k = k;
          best_delta = d;
        }
      } else {
        Activation act = delta_activate(k, ws);
        if (best_k < 0 || act.delta > best_delta) {
          best_k = k;
          best_delta = act.delta;
          best_act = std::move(act);
        }
      }
    }
    if (best_k < 0 || !(best_delta > 0.0)) break;
    if (flips >= cap) throw NumericalError("greedy_search: flip cap exceeded");
    apply_flip(best_k, ws, best_act.k == best_k ? &best_act : nullptr);
    result.ln_z_trajectory.push_back(ws.ln_z);
  }
  result.support = ws.support();
  return result;
}

} // namespace gdoa
