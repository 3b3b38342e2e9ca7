#include "gdoa/metrics.hpp"

#include <cmath>
#include <limits>

#include "gdoa/errors.hpp"

namespace gdoa {

double nmse_signal(const CMatrix& Z_hat, const CMatrix& Z_true) {
  if (Z_hat.rows() != Z_true.rows() || Z_hat.cols() != Z_true.cols())
    throw DimensionError("nmse_signal: dimension mismatch");
  const double ref = Z_true.squaredNorm();
  if (!(ref > 0.0)) throw DomainError("nmse_signal: true signal is zero");
  const double err = (Z_hat - Z_true).squaredNorm();
  if (err == 0.0) return kExactDb;
  return 10.0 * std::log10(err / ref);
}

double wrapped_distance(double a, double b) {
  return std::abs(wrap_angle(a - b));
}

// Potential-based Hungarian method, O(n^3).
std::vector<int> min_cost_assignment(const RMatrix& cost) {
  const int n = static_cast<int>(cost.rows());
  if (cost.cols() != n) throw DimensionError("min_cost_assignment: cost must be square");
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> assignment(static_cast<std::size_t>(n), -1);
  for (int j = 1; j <= n; ++j)
    if (p[j] > 0) assignment[p[j] - 1] = j - 1;
  return assignment;
}

std::optional<GatedFrequencyError> gated_freq_mse(const std::vector<double>& omega_hat,
                                                  const std::vector<double>& omega_true,
                                                  int N) {
  if (omega_hat.size() != omega_true.size()) return std::nullopt;
  const int K = static_cast<int>(omega_true.size());
  RMatrix cost(K, K);
  for (int k = 0; k < K; ++k)
    for (int j = 0; j < K; ++j) cost(k, j) = wrapped_distance(omega_hat[j], omega_true[k]);
  GatedFrequencyError out;
  out.perm = min_cost_assignment(cost);
  const double gate = kPi / N;
  for (int k = 0; k < K; ++k) {
    const double d = cost(k, out.perm[k]);
    if (d > gate) return std::nullopt;
    out.sq_error += d * d;
  }
  out.mse_db = out.sq_error > 0.0 ? 10.0 * std::log10(out.sq_error) : kExactDb;
  return out;
}

TrialOutcome evaluate_trial(const CMatrix& Z_hat, const CMatrix& Z_true,
                            const std::vector<double>& omega_hat,
                            const std::vector<double>& omega_true, int N) {
  TrialOutcome t;
  t.nmse_db = nmse_signal(Z_hat, Z_true);
  t.nmse_linear = (Z_hat - Z_true).squaredNorm() / Z_true.squaredNorm();
  t.order_correct = omega_hat.size() == omega_true.size();
  if (auto g = gated_freq_mse(omega_hat, omega_true, N)) {
    t.freq_mse_db = g->mse_db;
    t.freq_sq_error = g->sq_error;
    t.matched_perm = std::move(g->perm);
  }
  return t;
}

double model_order_prob(const std::vector<TrialOutcome>& outcomes) {
  if (outcomes.empty()) throw DomainError("model_order_prob: no outcomes");
  int correct = 0;
  for (const auto& o : outcomes) correct += o.order_correct ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(outcomes.size());
}

} // namespace gdoa
