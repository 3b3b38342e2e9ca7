#pragma once

// Variational line-spectral estimation under the four noise-variance models
// (MVALSE, MVHN-S, MVHN-A, MVHN).

#include <vector>

#include "gdoa/circular.hpp"
#include "gdoa/estimates.hpp"
#include "gdoa/model.hpp"
#include "gdoa/support_search.hpp"

namespace gdoa {

struct InferenceOptions {
  int max_iterations = 500;
  double tolerance = 1e-6;
  // Initial noise variance as a fraction of the mean cell energy of Y.
  double init_noise_fraction = 0.1;
  // Activation probability assumed when initializing tau.
  double init_rho = 0.5;
  // Noise floor relative to the mean cell energy of Y.
  double noise_floor_fraction = 1e-12;
};

struct InferenceState {
  NoiseCase noise_case = NoiseCase::I;
  std::vector<VonMises> freq_posteriors; // N entries
  CMatrix moments;                       // M x N, column i = E[a(omega_i)]
  SupportState support;
  std::vector<CMatrix> weight_covs;      // per snapshot, |S| x |S|
  CMatrix weight_means;                  // |S| x L, rows follow support.active_set
  HyperParams hyper;
  NoiseEstimate noise;
  double noise_floor = 0.0;
  int iteration = 0;

  int M() const { return static_cast<int>(moments.rows()); }
  int N() const { return static_cast<int>(moments.cols()); }
  int L() const { return static_cast<int>(weight_means.cols()); }
  // N x L weight matrix with zero rows for inactive components.
  CMatrix padded_weights() const;
};

// Clamps rho into [1/N, 1 - 1/N] (0.5 when N < 2).
double clamp_rho(double rho, int N);

InferenceState init_state(const SnapshotMatrix& Y, int N, NoiseCase noise_case,
                          const InferenceOptions& options = {});

// Natural parameter eta_i = sum_l eta_{i,l} of the frequency posterior of
// component i given the current weights, moments and noise.
CVector frequency_eta(const InferenceState& state, const SnapshotMatrix& Y, int i);

// Refreshes q(omega_i) and its moments for every active component, in
// ascending index order, each using the already-updated moments of the
// components before it.
void update_frequencies(InferenceState& state, const SnapshotMatrix& Y);

// Recomputes J and H, runs the greedy search from the current support and
// stores the resulting weight posteriors.
void update_weights_support(InferenceState& state, const SnapshotMatrix& Y);

// rho = |S|/N (clamped); tau = (||X_S||_F^2 + sum_l tr C_l) / (L |S|).
// tau is unchanged for an empty support.
void update_hyperparams(InferenceState& state);

// Per-cell expected squared residual under the current posteriors.
RMatrix noise_cell_estimates(const InferenceState& state, const SnapshotMatrix& Y);

// Reduces the per-cell quantity by the state's noise case and applies the floor.
void update_noise(InferenceState& state, const SnapshotMatrix& Y);

struct EstimationResult {
  NoiseCase noise_case = NoiseCase::I;
  int K_hat = 0;
  std::vector<int> components;          // active component indices
  std::vector<VonMises> posteriors;     // one per estimate
  std::vector<double> omegas;           // posterior mean directions
  CMatrix weights;                      // K_hat x L
  CMatrix moments;                      // M x K_hat
  CMatrix signal;                       // M x L, moments * weights
  NoiseEstimate noise;
  HyperParams hyper;
  int iterations = 0;
  bool converged = false;
};

EstimationResult assemble_result(const InferenceState& state, bool converged);

// Full coordinate ascent: weights/support, then rho/tau/noise, then
// frequencies, until the relative change of the zero-padded weight matrix
// drops below options.tolerance or max_iterations is exceeded.
EstimationResult run(const SnapshotMatrix& Y, int N, NoiseCase noise_case,
                     const InferenceOptions& options = {});

} // namespace gdoa
