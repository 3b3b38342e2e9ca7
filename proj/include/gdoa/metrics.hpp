#pragma once

// Trial-level evaluation metrics.

#include <optional>
#include <vector>

#include "gdoa/types.hpp"

namespace gdoa {

// Returned in place of -infinity dB for exact reconstructions.
inline constexpr double kExactDb = -300.0;

// 10 log10(||Z_hat - Z||_F^2 / ||Z||_F^2). Throws DomainError for a zero Z.
double nmse_signal(const CMatrix& Z_hat, const CMatrix& Z_true);

// |a - b| reduced modulo 2 pi into [0, pi].
double wrapped_distance(double a, double b);

// Minimum-cost assignment on a square cost matrix (Hungarian method).
// Returns assignment[row] = column.
std::vector<int> min_cost_assignment(const RMatrix& cost);

struct GatedFrequencyError {
  double sq_error = 0.0;  // sum_k wrapped(omega_hat - omega_true)^2
  double mse_db = 0.0;    // 10 log10(sq_error), kExactDb when zero
  std::vector<int> perm;  // perm[k] = estimate matched to truth k
};

// Present only when K_hat = K and every matched wrapped error is <= pi/N.
std::optional<GatedFrequencyError> gated_freq_mse(const std::vector<double>& omega_hat,
                                                  const std::vector<double>& omega_true,
                                                  int N);

struct TrialOutcome {
  double nmse_db = 0.0;
  double nmse_linear = 0.0;
  bool order_correct = false;
  std::optional<double> freq_mse_db;
  std::optional<double> freq_sq_error;
  std::vector<int> matched_perm;
};

TrialOutcome evaluate_trial(const CMatrix& Z_hat, const CMatrix& Z_true,
                            const std::vector<double>& omega_hat,
                            const std::vector<double>& omega_true, int N);

// Fraction of outcomes with the correct model order. Throws on empty input.
double model_order_prob(const std::vector<TrialOutcome>& outcomes);

} // namespace gdoa
