#include "gdoa/inference.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "gdoa/errors.hpp"

namespace gdoa {
namespace {

double mean_cell_energy(const CMatrix& Y) {
  return Y.squaredNorm() / static_cast<double>(Y.size());
}

Eigen::Index position_of(const std::vector<int>& active, int k) {
  const auto it = std::lower_bound(active.begin(), active.end(), k);
  if (it == active.end() || *it != k) return -1;
  return it - active.begin();
}

CMatrix active_columns(const CMatrix& A, const std::vector<int>& active) {
  CMatrix out(A.rows(), static_cast<Eigen::Index>(active.size()));
  for (std::size_t a = 0; a < active.size(); ++a) out.col(a) = A.col(active[a]);
  return out;
}

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

RMatrix inverse_variances(const NoiseEstimate& noise) {
  RMatrix w(noise.M(), noise.L());
  for (int l = 0; l < noise.L(); ++l)
    for (int m = 0; m < noise.M(); ++m) w(m, l) = 1.0 / noise.at(m, l);
  return w;
}

// Argmax over omega of sum_l |a(omega)^H v_l|^2 on an FFT grid.
double weighted_periodogram_peak(const CMatrix& V) {
  const Eigen::Index M = V.rows();
  const std::size_t G = next_pow2(static_cast<std::size_t>(16 * M));
  thread_local Eigen::FFT<double> fft;
  std::vector<double> power(G, 0.0);
  std::vector<cplx> padded(G), spectrum;
  for (Eigen::Index l = 0; l < V.cols(); ++l) {
    std::fill(padded.begin(), padded.end(), cplx{});
    for (Eigen::Index m = 0; m < M; ++m) padded[static_cast<std::size_t>(m)] = V(m, l);
    // Forward transform: sum_m v_m exp(-j m omega_g) = a(omega_g)^H v.
    fft.fwd(spectrum, padded);
    for (std::size_t g = 0; g < G; ++g) power[g] += std::norm(spectrum[g]);
  }
  const auto best = std::max_element(power.begin(), power.end()) - power.begin();
  return wrap_angle(kTwoPi * static_cast<double>(best) / static_cast<double>(G));
}

} // namespace

CMatrix InferenceState::padded_weights() const {
  CMatrix X = CMatrix::Zero(N(), L());
  for (std::size_t a = 0; a < support.active_set.size(); ++a)
    X.row(support.active_set[a]) = weight_means.row(static_cast<Eigen::Index>(a));
  return X;
}

double clamp_rho(double rho, int N) {
  if (N < 2) return 0.5;
  const double lo = 1.0 / N;
  return std::clamp(rho, lo, 1.0 - lo);
}

InferenceState init_state(const SnapshotMatrix& Y, int N, NoiseCase noise_case,
                          const InferenceOptions& options) {
  const int M = Y.M();
  const int L = Y.L();
  if (M < 1 || L < 1) throw DimensionError("init_state: empty snapshot matrix");
  if (N < 1 || N > M) throw ConfigError("init_state: component budget must satisfy 1 <= N <= M");
  if (!Y.data.allFinite()) throw InputError("init_state: snapshot matrix has non-finite entries");

  InferenceState state;
  state.noise_case = noise_case;
  const double energy = mean_cell_energy(Y.data);
  state.noise_floor = options.noise_floor_fraction * (energy > 0.0 ? energy : 1.0);
  const double nu0 = std::max(options.init_noise_fraction * energy, state.noise_floor);
  state.noise = NoiseEstimate::constant(noise_case, M, L, nu0);
  state.hyper.rho = clamp_rho(options.init_rho, N);
  state.hyper.tau = energy > 0.0 ? energy / (options.init_rho * N) : 1.0;
  state.support = SupportState::from_active(N, {});
  state.weight_covs.assign(static_cast<std::size_t>(L), CMatrix(0, 0));
  state.weight_means.resize(0, L);
  state.freq_posteriors.assign(static_cast<std::size_t>(N), VonMises{});
  state.moments.resize(M, N);

  // Sequential seeding: peak of the noise-weighted periodogram of the
  // residual, von Mises fit of the single-component posterior, cancellation.
  const RMatrix w = inverse_variances(state.noise);
  CMatrix residual = Y.data;
  for (int i = 0; i < N; ++i) {
    const CMatrix V = residual.cwiseProduct(w.cast<cplx>());
    const double omega0 = weighted_periodogram_peak(V);
    const CVector a0 = steering_vector(omega0, M);
    CVector eta = CVector::Zero(M);
    for (int l = 0; l < L; ++l) {
      const cplx x = a0.dot(V.col(l)) / w.col(l).sum();
      eta += 2.0 * V.col(l) * std::conj(x);
    }
    const VonMises vm = approximate_posterior(eta).vm;
    const CVector a_hat = moment_vector(vm, M);
    state.freq_posteriors[i] = vm;
    state.moments.col(i) = a_hat;
    for (int l = 0; l < L; ++l) {
      const double gain = (a_hat.cwiseAbs2().array() * w.col(l).array()).sum();
      if (!(gain > 0.0)) continue;
      const cplx x = a_hat.dot(V.col(l)) / gain;
      residual.col(l) -= a_hat * x;
    }
  }
  return state;
}

CVector frequency_eta(const InferenceState& state, const SnapshotMatrix& Y, int i) {
  const int M = state.M();
  const auto& active = state.support.active_set;
  const Eigen::Index p = position_of(active, i);
  CVector eta = CVector::Zero(M);
  if (p < 0) return eta;
  const CMatrix A = active_columns(state.moments, active);
  const CMatrix& X = state.weight_means;
  for (int l = 0; l < state.L(); ++l) {
    CVector fit = A * X.col(l);
    fit -= A.col(p) * X(p, l);
    CVector term = (Y.data.col(l) - fit) * std::conj(X(p, l));
    const CMatrix& C = state.weight_covs[l];
    for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(active.size()); ++j) {
      if (j == p) continue;
      term -= C(j, p) * A.col(j);
    }
    for (int m = 0; m < M; ++m) term(m) *= 2.0 / state.noise.at(m, l);
    eta += term;
  }
  return eta;
}

void update_frequencies(InferenceState& state, const SnapshotMatrix& Y) {
  for (int i : state.support.active_set) {
    const PosteriorApproximation post = approximate_posterior(frequency_eta(state, Y, i));
    if (post.degenerate) continue;
    state.freq_posteriors[i] = post.vm;
    state.moments.col(i) = moment_vector(post.vm, state.M());
  }
}

void update_weights_support(InferenceState& state, const SnapshotMatrix& Y) {
  SearchWorkspace ws = make_workspace(compute_JH(state.moments, state.noise, Y.data),
                                      state.hyper, state.support.active_set);
  SearchResult found = greedy_search(ws);
  state.support = std::move(found.support);
  state.weight_covs = std::move(ws.cov);
  state.weight_means = std::move(ws.means);
}

void update_hyperparams(InferenceState& state) {
  const int n = state.support.order();
  state.hyper.rho = clamp_rho(static_cast<double>(n) / state.N(), state.N());
  if (n == 0) return;
  double total = state.weight_means.squaredNorm();
  for (const auto& C : state.weight_covs) total += C.trace().real();
  state.hyper.tau = total / (static_cast<double>(state.L()) * n);
}

RMatrix noise_cell_estimates(const InferenceState& state, const SnapshotMatrix& Y) {
  const int M = state.M();
  const int L = state.L();
  const CMatrix A = active_columns(state.moments, state.support.active_set);
  const CMatrix& X = state.weight_means;
  const RMatrix A_abs2 = A.cwiseAbs2();
  RMatrix nu(M, L);
  for (int l = 0; l < L; ++l) {
    const CVector fit = A * X.col(l);
    const CMatrix AC = A * state.weight_covs[l];
    const RVector x_abs2 = X.col(l).cwiseAbs2();
    for (int m = 0; m < M; ++m) {
      const double residual = std::norm(Y.data(m, l) - fit(m));
      const double weight_term = A.row(m).dot(AC.row(m)).real();
      double freq_term = 0.0;
      for (Eigen::Index a = 0; a < A.cols(); ++a)
        freq_term += x_abs2(a) * (1.0 - A_abs2(m, a));
      nu(m, l) = residual + weight_term + freq_term;
    }
  }
  return nu;
}

void update_noise(InferenceState& state, const SnapshotMatrix& Y) {
  RVector v = NoiseEstimate::reduce_values(state.noise_case, noise_cell_estimates(state, Y));
  v = v.cwiseMax(state.noise_floor);
  state.noise = NoiseEstimate(state.noise_case, state.M(), state.L(), std::move(v));
}

EstimationResult assemble_result(const InferenceState& state, bool converged) {
  EstimationResult r;
  r.noise_case = state.noise_case;
  r.components = state.support.active_set;
  r.K_hat = static_cast<int>(r.components.size());
  for (int i : r.components) {
    r.posteriors.push_back(state.freq_posteriors[i]);
    r.omegas.push_back(state.freq_posteriors[i].mu);
  }
  r.weights = state.weight_means;
  r.moments = active_columns(state.moments, r.components);
  r.signal = r.moments * r.weights;
  r.noise = state.noise;
  r.hyper = state.hyper;
  r.iterations = state.iteration;
  r.converged = converged;
  return r;
}

EstimationResult run(const SnapshotMatrix& Y, int N, NoiseCase noise_case,
                     const InferenceOptions& options) {
  if (!Y.data.allFinite()) throw InputError("run: snapshot matrix has non-finite entries");
  InferenceState state = init_state(Y, N, noise_case, options);
  bool converged = false;
  CMatrix previous = state.padded_weights();
  for (int t = 1; t <= options.max_iterations; ++t) {
    update_weights_support(state, Y);
    update_hyperparams(state);
    update_noise(state, Y);
    update_frequencies(state, Y);
    state.iteration = t;
    const CMatrix current = state.padded_weights();
    const double base = previous.norm();
    const double change = (previous - current).norm();
    previous = current;
    if (base > 0.0 ? change / base < options.tolerance : change == 0.0) {
      converged = true;
      break;
    }
  }
  return assemble_result(state, converged);
}

} // namespace gdoa
