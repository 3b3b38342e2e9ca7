#pragma once

// Circular statistics: Bessel-function ratios, von Mises moments and the
// von Mises approximation of a cosine-series log-density.

#include <optional>

#include "gdoa/types.hpp"

namespace gdoa {

struct VonMises {
  double mu = 0.0;    // mean direction, [-pi, pi)
  double kappa = 0.0; // concentration, >= 0
};

// I_m(kappa) / I_0(kappa). Throws DomainError for kappa < 0 or m < 0.
double bessel_ratio(double kappa, int m);

// Ratios I_m(kappa) / I_0(kappa) for m = 0..count-1 in one pass.
RVector bessel_ratios(double kappa, int count);

// E[exp(j m omega)] under the von Mises density, m = 0..M-1.
CVector moment_vector(const VonMises& vm, int M);

struct PosteriorApproximation {
  VonMises vm;
  // Set when the log-density is flat (zero eta, uniform prior).
  bool degenerate = false;
};

// Log-density  Re{eta^H a(omega)} + kappa_p cos(omega - mu_p)  (up to a
// constant). A missing prior means the uniform density on the circle.
double cosine_series_log_density(const CVector& eta,
                                 const std::optional<VonMises>& prior,
                                 double omega);

/// Approximates q(omega) ∝ p(omega) exp(Re{eta^H a(omega)}) by a von Mises
/// density.
///
/// The mode is located on a uniform grid of next_pow2(16 M) points built with
/// one zero-padded FFT of conj(eta), then polished with safeguarded Newton
/// steps on the analytic derivatives. The concentration is the negative
/// curvature of the log-density at the mode, clamped at zero.
PosteriorApproximation
approximate_posterior(const CVector& eta,
                      const std::optional<VonMises>& prior = std::nullopt);

} // namespace gdoa
