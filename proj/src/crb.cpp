#include "gdoa/crb.hpp"

#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "gdoa/errors.hpp"

namespace gdoa {
namespace {

constexpr double kMaxCondition = 1e12;

void check_indices(const CrbParameterization& p, int m, int l) {
  if (m < 0 || l < 0 || l >= p.L())
    throw DimensionError("signal_partials: index out of range");
}

// Accumulates the (m, l) contribution into I using only the 3K nonzero
// gradient entries.
void accumulate_cell(const CrbParameterization& p, int m, int l, double weight,
                     RMatrix& I) {
  const int K = p.K();
  std::vector<int> idx(3 * static_cast<std::size_t>(K));
  RVector gre(3 * K), gim(3 * K);
  for (int k = 0; k < K; ++k) {
    const double g = p.magnitudes(k, l);
    const double arg = m * p.omegas[k] + p.phases(k, l);
    const double c = std::cos(arg), s = std::sin(arg);
    idx[k] = k;
    idx[K + k] = p.magnitude_index(k, l);
    idx[2 * K + k] = p.phase_index(k, l);
    gre(k) = -m * g * s;
    gim(k) = m * g * c;
    gre(K + k) = c;
    gim(K + k) = s;
    gre(2 * K + k) = -g * s;
    gim(2 * K + k) = g * c;
  }
  for (int a = 0; a < 3 * K; ++a)
    for (int b = 0; b < 3 * K; ++b)
      I(idx[a], idx[b]) += weight * (gre(a) * gre(b) + gim(a) * gim(b));
}

template <typename VarianceAt>
RMatrix fim_impl(const CrbParameterization& p, int M, int L, VarianceAt&& variance) {
  if (p.L() != L || p.phases.rows() != p.K() || p.phases.cols() != L ||
      p.magnitudes.rows() != p.K())
    throw DimensionError("fim: parameter and variance dimensions disagree");
  RMatrix I = RMatrix::Zero(p.size(), p.size());
  for (int l = 0; l < L; ++l)
    for (int m = 0; m < M; ++m) {
      const double nu = variance(m, l);
      if (!(nu > 0.0)) throw DomainError("fim: variances must be positive");
      accumulate_cell(p, m, l, 2.0 / nu, I);
    }
  return I;
}

RMatrix invert_leading_block(const CrbParameterization& p, const RMatrix& I) {
  for (int l = 0; l < p.L(); ++l)
    for (int k = 0; k < p.K(); ++k)
      if (!(p.magnitudes(k, l) > 0.0))
        throw RankError("crb: zero amplitude for source " + std::to_string(k) +
                        " in snapshot " + std::to_string(l) + " makes the FIM singular");
  const RVector d = I.diagonal().cwiseSqrt().cwiseInverse();
  const RMatrix scaled = d.asDiagonal() * I * d.asDiagonal();
  const Eigen::SelfAdjointEigenSolver<RMatrix> eig(scaled, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi / lo > kMaxCondition)
    throw RankError("crb: Fisher information is singular or ill-conditioned (condition " +
                    std::to_string(lo > 0.0 ? hi / lo : INFINITY) +
                    "); duplicate frequencies?");
  const Eigen::LLT<RMatrix> llt(scaled);
  if (llt.info() != Eigen::Success) throw RankError("crb: Fisher information not positive definite");
  const RMatrix inv_scaled = llt.solve(RMatrix::Identity(I.rows(), I.cols()));
  const RMatrix inv = d.asDiagonal() * inv_scaled * d.asDiagonal();
  return inv.topLeftCorner(p.K(), p.K());
}

} // namespace

CrbParameterization CrbParameterization::from_weights(std::vector<double> omegas,
                                                      const CMatrix& weights) {
  if (static_cast<Eigen::Index>(omegas.size()) != weights.rows())
    throw DimensionError("crb: weight rows must match the number of frequencies");
  CrbParameterization p;
  p.omegas = std::move(omegas);
  p.magnitudes = weights.cwiseAbs();
  p.phases = weights.unaryExpr([](const cplx& x) { return std::arg(x); }).real();
  return p;
}

RVector CrbParameterization::stacked() const {
  RVector v(size());
  for (int k = 0; k < K(); ++k) v(k) = omegas[k];
  for (int l = 0; l < L(); ++l)
    for (int k = 0; k < K(); ++k) {
      v(magnitude_index(k, l)) = magnitudes(k, l);
      v(phase_index(k, l)) = phases(k, l);
    }
  return v;
}

CrbParameterization CrbParameterization::unstack(const RVector& v, int K, int L) {
  if (v.size() != K + 2 * K * L) throw DimensionError("crb: stacked vector has wrong length");
  CrbParameterization p;
  p.omegas.assign(v.data(), v.data() + K);
  p.magnitudes.resize(K, L);
  p.phases.resize(K, L);
  for (int l = 0; l < L; ++l)
    for (int k = 0; k < K; ++k) {
      p.magnitudes(k, l) = v(p.magnitude_index(k, l));
      p.phases(k, l) = v(p.phase_index(k, l));
    }
  return p;
}

cplx signal_entry(const CrbParameterization& params, int m, int l) {
  check_indices(params, m, l);
  cplx z{};
  for (int k = 0; k < params.K(); ++k)
    z += std::polar(params.magnitudes(k, l), m * params.omegas[k] + params.phases(k, l));
  return z;
}

SignalPartials signal_partials(const CrbParameterization& params, int m, int l) {
  check_indices(params, m, l);
  SignalPartials out{RVector::Zero(params.size()), RVector::Zero(params.size())};
  for (int k = 0; k < params.K(); ++k) {
    const double g = params.magnitudes(k, l);
    const double arg = m * params.omegas[k] + params.phases(k, l);
    const double c = std::cos(arg), s = std::sin(arg);
    out.re(k) = -m * g * s;
    out.im(k) = m * g * c;
    out.re(params.magnitude_index(k, l)) = c;
    out.im(params.magnitude_index(k, l)) = s;
    out.re(params.phase_index(k, l)) = -g * s;
    out.im(params.phase_index(k, l)) = g * c;
  }
  return out;
}

RMatrix fim(const CrbParameterization& params, const RMatrix& variances) {
  return fim_impl(params, static_cast<int>(variances.rows()),
                  static_cast<int>(variances.cols()),
                  [&](int m, int l) { return variances(m, l); });
}

RMatrix fim(const CrbParameterization& params, const NoiseEstimate& noise) {
  return fim_impl(params, noise.M(), noise.L(),
                  [&](int m, int l) { return noise.at(m, l); });
}

RMatrix crb_frequencies(const CrbParameterization& params, const RMatrix& variances) {
  return invert_leading_block(params, fim(params, variances));
}

RMatrix crb_frequencies(const CrbParameterization& params, const NoiseEstimate& noise) {
  return invert_leading_block(params, fim(params, noise));
}

double crb_trace_db(const RMatrix& crb) { return 10.0 * std::log10(crb.trace()); }

} // namespace gdoa
