#include "gdoa/estimates.hpp"

#include <cmath>

#include "gdoa/errors.hpp"

namespace gdoa {
namespace {

Eigen::Index compact_size(NoiseCase c, int M, int L) {
  switch (c) {
  case NoiseCase::I: return 1;
  case NoiseCase::II: return L;
  case NoiseCase::III: return M;
  case NoiseCase::IV: break;
  }
  return static_cast<Eigen::Index>(M) * L;
}

} // namespace

NoiseEstimate::NoiseEstimate(NoiseCase c, int M, int L, RVector values)
    : case_(c), M_(M), L_(L), values_(std::move(values)) {
  if (M < 1 || L < 1) throw DimensionError("NoiseEstimate: M and L must be positive");
  if (values_.size() != compact_size(c, M, L))
    throw DimensionError("NoiseEstimate: value count does not match case structure");
  for (Eigen::Index i = 0; i < values_.size(); ++i)
    if (!(values_(i) > 0.0) || !std::isfinite(values_(i)))
      throw DomainError("NoiseEstimate: variances must be positive and finite");
}

NoiseEstimate NoiseEstimate::constant(NoiseCase c, int M, int L, double value) {
  return {c, M, L, RVector::Constant(compact_size(c, M, L), value)};
}

RVector NoiseEstimate::reduce_values(NoiseCase c, const RMatrix& grid) {
  switch (c) {
  case NoiseCase::I:
    return RVector::Constant(1, grid.mean());
  case NoiseCase::II:
    return grid.colwise().mean().transpose();
  case NoiseCase::III:
    return grid.rowwise().mean();
  case NoiseCase::IV:
    break;
  }
  return grid.reshaped();
}

NoiseEstimate NoiseEstimate::reduce(NoiseCase c, const RMatrix& grid) {
  return {c, static_cast<int>(grid.rows()), static_cast<int>(grid.cols()),
          reduce_values(c, grid)};
}

RMatrix NoiseEstimate::grid() const {
  RMatrix g(M_, L_);
  for (int l = 0; l < L_; ++l)
    for (int m = 0; m < M_; ++m) g(m, l) = at(m, l);
  return g;
}

} // namespace gdoa
