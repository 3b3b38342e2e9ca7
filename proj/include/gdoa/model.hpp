#pragma once

// Uniform linear array signal model and synthetic scene generation.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "gdoa/rng.hpp"
#include "gdoa/types.hpp"

namespace gdoa {

// Noise variance structure. The tag also selects the estimator variant.
enum class NoiseCase {
  I,   // constant (MVALSE)
  II,  // per snapshot (MVHN-S)
  III, // per antenna (MVHN-A)
  IV,  // per antenna and snapshot (MVHN)
};

std::string_view to_string(NoiseCase c);
// Accepts "I".."IV" or the estimator names "MVALSE", "MVHN-S", "MVHN-A", "MVHN".
NoiseCase parse_noise_case(std::string_view s);
std::string_view algorithm_name(NoiseCase c);

struct AmplitudeLaw {
  double magnitude_mean = 1.0;
  double magnitude_std = 0.2;
};

struct ScenarioConfig {
  int M = 20;
  int L = 10;
  std::vector<double> true_omegas; // K entries, radians in [-pi, pi]
  // +infinity means noiseless measurements.
  double snr_db = 20.0;
  double delta_nu_db = 0.0;
  NoiseCase noise_case = NoiseCase::I;
  AmplitudeLaw amplitude_law{};
  std::uint64_t seed = 0;

  int K() const { return static_cast<int>(true_omegas.size()); }
  // Throws ConfigError when an invariant is broken.
  void validate() const;
};

struct SyntheticScene {
  std::vector<double> omegas;
  CMatrix weights;         // K x L
  CMatrix clean_signal;    // M x L, A(omegas) * weights
  RMatrix noise_variances; // M x L
};

struct SnapshotMatrix {
  CMatrix data; // M x L

  int M() const { return static_cast<int>(data.rows()); }
  int L() const { return static_cast<int>(data.cols()); }
};

// a(omega)_m = exp(j m omega), m = 0..M-1.
CVector steering_vector(double omega, int M);
// M x K matrix of steering vectors.
CMatrix steering_matrix(const std::vector<double>& omegas, int M);

// omega = pi sin(theta), theta in degrees.
double theta_to_omega(double theta_deg);
double omega_to_theta(double omega);

// Complex weights with Normal(mean, std) magnitudes (redrawn while <= 0)
// and U(-pi, pi) phases.
CMatrix draw_weights(int K, int L, const AmplitudeLaw& law, Rng& rng);

// Nominal noise variance for the given clean signal and SNR:
// SNR = 10 log10(||Z||_F^2 / (nu0 M L)). An all-zero signal uses unit
// reference power per cell; snr_db = +inf yields 0.
double nominal_noise_variance(const CMatrix& clean_signal, double snr_db);

// Case I: constant nu0. Cases II-IV: 10 log10(nu) ~ U(nu0_dB, nu0_dB + delta)
// per snapshot / antenna / cell, replicated along the tied dimension.
RMatrix synthesize_noise_variances(const ScenarioConfig& config, double nu0,
                                   Rng& rng);
// Overload deriving nu0 from the clean signal of a scene.
RMatrix synthesize_noise_variances(const ScenarioConfig& config,
                                   const CMatrix& clean_signal, Rng& rng);

// Noise realization for fixed omegas and weights.
struct Measurement {
  RMatrix noise_variances;
  SnapshotMatrix snapshots;
};
Measurement synthesize_measurement(const ScenarioConfig& config,
                                   const CMatrix& clean_signal, Rng& rng);

struct SceneAndSnapshots {
  SyntheticScene scene;
  SnapshotMatrix snapshots;
};

// Weights, noise variances and noise all drawn from rng in that order.
SceneAndSnapshots synthesize_scene(const ScenarioConfig& config, Rng& rng);

// Scene with caller-supplied weights (K x L); only the noise is random.
SceneAndSnapshots synthesize_scene(const ScenarioConfig& config,
                                   const CMatrix& weights, Rng& rng);

} // namespace gdoa
