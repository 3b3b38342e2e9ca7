#include "gdoa/circular.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "gdoa/errors.hpp"

namespace gdoa {
namespace {

// Orders at or below this many squared-order units of kappa go through the
// continued fraction; above it the large-argument expansion is exact to
// rounding (its terms shrink by at least 4x from the start).
double hankel_threshold(int order) {
  return std::max(50.0, 2.0 * order * static_cast<double>(order));
}

// e^{-x} sqrt(2 pi x) I_nu(x) for large x (Hankel expansion), summed until
// the terms stop shrinking or fall below rounding.
double scaled_bessel_i_large(int nu, double x) {
  const double mu = 4.0 * nu * static_cast<double>(nu);
  double term = 1.0;
  double sum = 1.0;
  double prev = std::numeric_limits<double>::infinity();
  for (int k = 1; k < 200; ++k) {
    const double odd = 2.0 * k - 1.0;
    term *= -(mu - odd * odd) / (8.0 * k * x);
    const double mag = std::abs(term);
    if (mag >= prev) break;
    sum += term;
    if (mag <= 1e-17 * std::abs(sum)) break;
    prev = mag;
  }
  return sum;
}

// I_nu(x) / I_{nu-1}(x) by the Gauss continued fraction, modified Lentz.
double bessel_ratio_cf(int nu, double x) {
  constexpr double tiny = 1e-300;
  const double inv_x = 1.0 / x;
  double f = 2.0 * nu * inv_x;
  if (f == 0.0) f = tiny;
  double c = f;
  double d = 0.0;
  const int max_iter = 100000 + 2 * static_cast<int>(x);
  for (int j = 1; j < max_iter; ++j) {
    const double b = 2.0 * (nu + j) * inv_x;
    d = b + d;
    if (d == 0.0) d = tiny;
    c = b + 1.0 / c;
    if (c == 0.0) c = tiny;
    d = 1.0 / d;
    const double delta = c * d;
    f *= delta;
    if (std::abs(delta - 1.0) < 1e-16) return 1.0 / f;
  }
  throw NumericalError("bessel ratio continued fraction did not converge");
}

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

struct Derivatives {
  double value, first, second;
};

Derivatives log_density_derivatives(const CVector& eta,
                                    const std::optional<VonMises>& prior,
                                    double omega) {
  Derivatives d{0.0, 0.0, 0.0};
  const cplx step = std::polar(1.0, omega);
  cplx phase{1.0, 0.0};
  for (Eigen::Index m = 0; m < eta.size(); ++m) {
    const cplx t = std::conj(eta(m)) * phase;
    const double md = static_cast<double>(m);
    d.value += t.real();
    d.first -= md * t.imag();
    d.second -= md * md * t.real();
    phase *= step;
  }
  if (prior && prior->kappa > 0.0) {
    const double c = std::cos(omega - prior->mu);
    const double s = std::sin(omega - prior->mu);
    d.value += prior->kappa * c;
    d.first -= prior->kappa * s;
    d.second -= prior->kappa * c;
  }
  return d;
}

} // namespace

RVector bessel_ratios(double kappa, int count) {
  if (!(kappa >= 0.0)) throw DomainError("bessel_ratio: kappa must be >= 0");
  if (count < 0) throw DomainError("bessel_ratio: negative order count");
  RVector r = RVector::Zero(count);
  if (count == 0) return r;
  r(0) = 1.0;
  if (count == 1 || kappa == 0.0) return r;

  const int top = count - 1;
  // rho(nu) = I_nu / I_{nu-1}, nu = 1..top.
  std::vector<double> rho(static_cast<std::size_t>(top) + 1, 0.0);
  if (kappa >= hankel_threshold(top)) {
    rho[top] = scaled_bessel_i_large(top, kappa) /
               scaled_bessel_i_large(top - 1, kappa);
  } else {
    rho[top] = bessel_ratio_cf(top, kappa);
  }
  // Downward recurrence I_{nu-2} = (2(nu-1)/x) I_{nu-1} + I_nu is the stable
  // direction for I.
  for (int nu = top; nu >= 2; --nu)
    rho[nu - 1] = 1.0 / (2.0 * (nu - 1) / kappa + rho[nu]);

  double prod = 1.0;
  for (int m = 1; m <= top; ++m) {
    prod *= rho[m];
    r(m) = prod;
  }
  return r;
}

double bessel_ratio(double kappa, int m) {
  if (m < 0) throw DomainError("bessel_ratio: negative order");
  return bessel_ratios(kappa, m + 1)(m);
}

CVector moment_vector(const VonMises& vm, int M) {
  if (M < 1) throw DimensionError("moment_vector: M must be >= 1");
  const RVector r = bessel_ratios(vm.kappa, M);
  CVector a(M);
  for (int m = 0; m < M; ++m) a(m) = std::polar(r(m), m * vm.mu);
  return a;
}

double cosine_series_log_density(const CVector& eta,
                                 const std::optional<VonMises>& prior,
                                 double omega) {
  return log_density_derivatives(eta, prior, omega).value;
}

PosteriorApproximation approximate_posterior(const CVector& eta,
                                             const std::optional<VonMises>& prior) {
  const Eigen::Index M = eta.size();
  if (M < 2) throw DimensionError("approximate_posterior: eta length must be >= 2");
  if (!eta.allFinite()) throw DomainError("approximate_posterior: eta not finite");

  const bool prior_flat = !prior || prior->kappa == 0.0;
  if (prior_flat && eta.tail(M - 1).cwiseAbs().maxCoeff() == 0.0)
    return {VonMises{0.0, 0.0}, true};

  // Grid evaluation of sum_m conj(eta_m) exp(j m omega_g), omega_g = 2 pi g / G.
  const std::size_t G = next_pow2(static_cast<std::size_t>(16 * M));
  std::vector<cplx> coeffs(G, cplx{0.0, 0.0});
  for (Eigen::Index m = 0; m < M; ++m) coeffs[static_cast<std::size_t>(m)] = std::conj(eta(m));
  std::vector<cplx> grid;
  thread_local Eigen::FFT<double> fft;
  fft.inv(grid, coeffs);

  const double spacing = kTwoPi / static_cast<double>(G);
  std::vector<double> vals(G);
  double best_val = -std::numeric_limits<double>::infinity();
  for (std::size_t g = 0; g < G; ++g) {
    const double omega = spacing * static_cast<double>(g);
    double v = grid[g].real() * static_cast<double>(G);
    if (prior && prior->kappa > 0.0) v += prior->kappa * std::cos(omega - prior->mu);
    vals[g] = v;
    best_val = std::max(best_val, v);
  }

  // A lobe whose grid sample trails the best by less than the worst-case
  // sampling loss could still hold the true maximum.
  double curv = prior ? prior->kappa : 0.0;
  for (Eigen::Index m = 1; m < M; ++m) curv += static_cast<double>(m * m) * std::abs(eta(m));
  const double slack = 0.125 * curv * spacing * spacing;

  // Safeguarded Newton on f'(omega) = 0 inside the neighbouring grid cells.
  auto refine = [&](double centre) {
    double lo = centre - spacing;
    double hi = centre + spacing;
    const bool bracketed = log_density_derivatives(eta, prior, lo).first > 0.0 &&
                           log_density_derivatives(eta, prior, hi).first < 0.0;
    double omega = centre;
    Derivatives d = log_density_derivatives(eta, prior, omega);
    for (int iter = 0; iter < 60; ++iter) {
      if (d.first == 0.0) break;
      double next = omega;
      if (d.second < 0.0) next = omega - d.first / d.second;
      if (bracketed) {
        if (d.first > 0.0) lo = omega; else hi = omega;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      } else if (d.second >= 0.0 || std::abs(next - omega) > spacing) {
        next = omega + (d.first > 0.0 ? 0.5 : -0.5) * spacing;
      }
      if (next == omega) break;
      const Derivatives dn = log_density_derivatives(eta, prior, next);
      if (!bracketed && dn.value < d.value) break;
      omega = next;
      d = dn;
      if (bracketed && hi - lo < 1e-15) break;
    }
    return std::pair{omega, d};
  };

  double omega = 0.0;
  Derivatives d{-std::numeric_limits<double>::infinity(), 0.0, 0.0};
  for (std::size_t g = 0; g < G; ++g) {
    const double v = vals[g];
    if (v < best_val - slack || v < vals[(g + G - 1) % G] || v < vals[(g + 1) % G]) continue;
    const auto [w, dw] = refine(spacing * static_cast<double>(g));
    if (dw.value > d.value) {
      omega = w;
      d = dw;
    }
  }

  return {VonMises{wrap_angle(omega), std::max(0.0, -d.second)}, false};
}

} // namespace gdoa
