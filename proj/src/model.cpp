#include "gdoa/model.hpp"

#include <cmath>
#include <limits>

#include "gdoa/errors.hpp"

namespace gdoa {

std::string_view to_string(NoiseCase c) {
  switch (c) {
  case NoiseCase::I: return "I";
  case NoiseCase::II: return "II";
  case NoiseCase::III: return "III";
  case NoiseCase::IV: return "IV";
  }
  return "?";
}

std::string_view algorithm_name(NoiseCase c) {
  switch (c) {
  case NoiseCase::I: return "MVALSE";
  case NoiseCase::II: return "MVHN-S";
  case NoiseCase::III: return "MVHN-A";
  case NoiseCase::IV: return "MVHN";
  }
  return "?";
}

NoiseCase parse_noise_case(std::string_view s) {
  if (s == "I" || s == "1" || s == "MVALSE") return NoiseCase::I;
  if (s == "II" || s == "2" || s == "MVHN-S") return NoiseCase::II;
  if (s == "III" || s == "3" || s == "MVHN-A") return NoiseCase::III;
  if (s == "IV" || s == "4" || s == "MVHN") return NoiseCase::IV;
  throw ConfigError("unknown noise case '" + std::string(s) + "'");
}

void ScenarioConfig::validate() const {
  if (M < 1) throw ConfigError("M must be positive");
  if (L < 1) throw ConfigError("L must be positive");
  if (K() > M) throw ConfigError("K must not exceed M");
  if (delta_nu_db < 0.0) throw ConfigError("delta_nu_db must be >= 0");
  if (noise_case == NoiseCase::I && delta_nu_db != 0.0)
    throw ConfigError("delta_nu_db must be 0 for noise case I");
  if (std::isnan(snr_db)) throw ConfigError("snr_db is NaN");
  if (!(amplitude_law.magnitude_std >= 0.0) ||
      !std::isfinite(amplitude_law.magnitude_mean))
    throw ConfigError("invalid amplitude law");
  for (std::size_t i = 0; i < true_omegas.size(); ++i) {
    const double w = true_omegas[i];
    if (!(w >= -kPi && w <= kPi))
      throw ConfigError("true_omegas must lie in [-pi, pi]");
    for (std::size_t j = 0; j < i; ++j)
      if (true_omegas[j] == w)
        throw ConfigError("true_omegas must be pairwise distinct");
  }
}

CVector steering_vector(double omega, int M) {
  if (M < 1) throw DimensionError("steering_vector: M must be >= 1");
  if (!std::isfinite(omega)) throw DomainError("steering_vector: omega not finite");
  CVector a(M);
  for (int m = 0; m < M; ++m) a(m) = std::polar(1.0, m * omega);
  return a;
}

CMatrix steering_matrix(const std::vector<double>& omegas, int M) {
  CMatrix A(M, static_cast<Eigen::Index>(omegas.size()));
  for (std::size_t k = 0; k < omegas.size(); ++k)
    A.col(static_cast<Eigen::Index>(k)) = steering_vector(omegas[k], M);
  return A;
}

double theta_to_omega(double theta_deg) {
  if (!(theta_deg >= -90.0 && theta_deg <= 90.0))
    throw DomainError("theta must lie in [-90, 90] degrees");
  return kPi * std::sin(theta_deg * kPi / 180.0);
}

double omega_to_theta(double omega) {
  if (!(omega >= -kPi && omega <= kPi))
    throw DomainError("omega must lie in [-pi, pi]");
  return std::asin(omega / kPi) * 180.0 / kPi;
}

CMatrix draw_weights(int K, int L, const AmplitudeLaw& law, Rng& rng) {
  CMatrix X(K, L);
  // Column-major draw order: snapshot by snapshot.
  for (int l = 0; l < L; ++l) {
    for (int k = 0; k < K; ++k) {
      double g = rng.normal(law.magnitude_mean, law.magnitude_std);
      while (g <= 0.0) g = rng.normal(law.magnitude_mean, law.magnitude_std);
      const double phi = rng.uniform(-kPi, kPi);
      X(k, l) = std::polar(g, phi);
    }
  }
  return X;
}

double nominal_noise_variance(const CMatrix& clean_signal, double snr_db) {
  if (snr_db == std::numeric_limits<double>::infinity()) return 0.0;
  const double cells = static_cast<double>(clean_signal.size());
  double power = clean_signal.squaredNorm() / cells;
  if (power == 0.0) power = 1.0;
  return power * std::pow(10.0, -snr_db / 10.0);
}

RMatrix synthesize_noise_variances(const ScenarioConfig& config, double nu0,
                                   Rng& rng) {
  config.validate();
  const int M = config.M, L = config.L;
  RMatrix nu(M, L);
  if (nu0 == 0.0 || config.noise_case == NoiseCase::I) {
    nu.setConstant(nu0);
    return nu;
  }
  const double lo = 10.0 * std::log10(nu0);
  const double hi = lo + config.delta_nu_db;
  auto draw = [&] { return std::pow(10.0, rng.uniform(lo, hi) / 10.0); };
  switch (config.noise_case) {
  case NoiseCase::II:
    for (int l = 0; l < L; ++l) nu.col(l).setConstant(draw());
    break;
  case NoiseCase::III:
    for (int m = 0; m < M; ++m) nu.row(m).setConstant(draw());
    break;
  case NoiseCase::IV:
    for (int l = 0; l < L; ++l)
      for (int m = 0; m < M; ++m) nu(m, l) = draw();
    break;
  case NoiseCase::I:
    break;
  }
  return nu;
}

RMatrix synthesize_noise_variances(const ScenarioConfig& config,
                                   const CMatrix& clean_signal, Rng& rng) {
  if (clean_signal.rows() != config.M || clean_signal.cols() != config.L)
    throw DimensionError("clean signal dimensions do not match config");
  return synthesize_noise_variances(
      config, nominal_noise_variance(clean_signal, config.snr_db), rng);
}

Measurement synthesize_measurement(const ScenarioConfig& config,
                                   const CMatrix& clean_signal, Rng& rng) {
  Measurement out;
  out.noise_variances = synthesize_noise_variances(config, clean_signal, rng);
  out.snapshots.data = clean_signal;
  for (int l = 0; l < config.L; ++l)
    for (int m = 0; m < config.M; ++m) {
      const double v = out.noise_variances(m, l);
      if (v > 0.0) out.snapshots.data(m, l) += rng.complex_normal(v);
    }
  return out;
}

SceneAndSnapshots synthesize_scene(const ScenarioConfig& config,
                                   const CMatrix& weights, Rng& rng) {
  config.validate();
  if (weights.rows() != config.K() || weights.cols() != config.L)
    throw DimensionError("weights must be K x L");
  SceneAndSnapshots out;
  out.scene.omegas = config.true_omegas;
  out.scene.weights = weights;
  out.scene.clean_signal = steering_matrix(config.true_omegas, config.M) * weights;
  if (config.K() == 0) out.scene.clean_signal = CMatrix::Zero(config.M, config.L);
  auto meas = synthesize_measurement(config, out.scene.clean_signal, rng);
  out.scene.noise_variances = std::move(meas.noise_variances);
  out.snapshots = std::move(meas.snapshots);
  return out;
}

SceneAndSnapshots synthesize_scene(const ScenarioConfig& config, Rng& rng) {
  config.validate();
  const CMatrix X = draw_weights(config.K(), config.L, config.amplitude_law, rng);
  return synthesize_scene(config, X, rng);
}

} // namespace gdoa
