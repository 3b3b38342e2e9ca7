#pragma once

// Greedy maximization of the support score lnZ(s) with rank-one updates of
// the per-snapshot weight posteriors.

#include <vector>

#include "gdoa/estimates.hpp"
#include "gdoa/types.hpp"

namespace gdoa {

struct SupportState {
  std::vector<bool> s;         // length N
  std::vector<int> active_set; // {i : s_i = 1}, ascending

  static SupportState from_active(int N, std::vector<int> active);
  int N() const { return static_cast<int>(s.size()); }
  int order() const { return static_cast<int>(active_set.size()); }
};

// J_l (N x N, one per snapshot) and H (N x L).
struct JHMatrices {
  std::vector<CMatrix> J;
  CMatrix H;
};

// [J_l]_ii = sum_m 1/nu_{m,l}; [J_l]_ij = a_i^H Sigma_l^{-1} a_j (i != j);
// H_{:,l} = A^H Sigma_l^{-1} y_l.
JHMatrices compute_JH(const CMatrix& moments, const NoiseEstimate& noise,
                      const CMatrix& Y);

struct SearchWorkspace {
  JHMatrices jh;
  HyperParams hyper;
  std::vector<int> active;   // ascending
  std::vector<CMatrix> cov;  // per snapshot, |S| x |S|: ([J_l]_S + I/tau)^{-1}
  CMatrix means;             // |S| x L: cov_l * H_{S,l}
  double ln_z = 0.0;         // score of `active`
  int flips_since_refresh = 0;

  int N() const { return static_cast<int>(jh.H.rows()); }
  int L() const { return static_cast<int>(jh.H.cols()); }
  SupportState support() const { return SupportState::from_active(N(), active); }
};

// Builds a workspace whose posteriors are solved densely for `active`.
SearchWorkspace make_workspace(JHMatrices jh, const HyperParams& hyper,
                               std::vector<int> active = {});

// Rebuilds posteriors and score by direct factorization.
void refresh(SearchWorkspace& ws);

// Direct evaluation of
//   |S| ln(rho/(1-rho)) + sum_l [ -ln det([J_l]_S + I/tau) - |S| ln tau
//                                 + H_{S,l}^H ([J_l]_S + I/tau)^{-1} H_{S,l} ],
// i.e. the score with its support-independent constant dropped. The empty
// support scores 0.
double ln_Z(const std::vector<int>& active, const JHMatrices& jh,
            const HyperParams& hyper);
double ln_Z(const SupportState& s, const SearchWorkspace& ws);

// Candidate data for activating an inactive index.
struct Activation {
  int k = -1;
  double delta = 0.0;
  RVector v;                // per snapshot Schur complement inverse
  CVector u;                // per snapshot new weight
  std::vector<CVector> w;   // per snapshot cov_l [J_l]_{S,k}
};

Activation delta_activate(int k, const SearchWorkspace& ws);
double delta_deactivate(int k, const SearchWorkspace& ws);

// Flips index k. For an activation the scratch from delta_activate may be
// passed to skip recomputation. Every 50 accepted flips the posteriors are
// rebuilt densely to stop drift.
void apply_flip(int k, SearchWorkspace& ws, const Activation* scratch = nullptr);

struct SearchResult {
  SupportState support;
  std::vector<double> ln_z_trajectory; // starting score, then after each flip
};

// Single-flip ascent until no flip improves the score. Ties go to the lowest
// index. Throws NumericalError past 10 N flips.
SearchResult greedy_search(SearchWorkspace& ws);

} // namespace gdoa
