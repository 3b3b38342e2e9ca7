#pragma once

#include "gdoa/model.hpp"
#include "gdoa/types.hpp"

namespace gdoa {

// Noise variance estimate in the compact shape of its case:
// I -> 1 value, II -> L values (per snapshot), III -> M values (per antenna),
// IV -> M*L values (column-major, antenna index fastest).
class NoiseEstimate {
public:
  NoiseEstimate() : NoiseEstimate(NoiseCase::I, 1, 1, RVector::Ones(1)) {}
  NoiseEstimate(NoiseCase c, int M, int L, RVector values);

  // Every cell equal to `value`, stored in the compact shape of `c`.
  static NoiseEstimate constant(NoiseCase c, int M, int L, double value);
  // Averages a full M x L grid down to the shape of `c`.
  static NoiseEstimate reduce(NoiseCase c, const RMatrix& grid);
  // The averaged compact values without the positivity check.
  static RVector reduce_values(NoiseCase c, const RMatrix& grid);

  NoiseCase noise_case() const { return case_; }
  int M() const { return M_; }
  int L() const { return L_; }
  const RVector& values() const { return values_; }

  double at(int m, int l) const {
    switch (case_) {
    case NoiseCase::I: return values_(0);
    case NoiseCase::II: return values_(l);
    case NoiseCase::III: return values_(m);
    case NoiseCase::IV: break;
    }
    return values_(static_cast<Eigen::Index>(l) * M_ + m);
  }

  // M x L grid with the compact values replicated.
  RMatrix grid() const;

private:
  NoiseCase case_;
  int M_;
  int L_;
  RVector values_;
};

struct HyperParams {
  double rho = 0.5; // activation probability
  double tau = 1.0; // prior weight variance
};

} // namespace gdoa
