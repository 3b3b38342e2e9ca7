#pragma once

// Conventional (delay-and-sum) beamforming.

#include <vector>

#include "gdoa/model.hpp"
#include "gdoa/types.hpp"

namespace gdoa {

struct AngularGrid {
  std::vector<double> thetas; // degrees, strictly increasing, uniform

  // `count` points spanning [lo, hi] degrees; default 0.5 degree spacing.
  static AngularGrid uniform(int count = 361, double lo = -90.0, double hi = 90.0);
};

// P(theta) = (1 / (L M^2)) sum_l |a(pi sin theta)^H y_l|^2. With
// `normalize`, returns 10 log10(P / max P) (0 dB peak).
RVector cbf_spectrum(const SnapshotMatrix& Y, const AngularGrid& grid,
                     bool normalize = false);

// Indices of strict interior local maxima, sorted by decreasing value.
std::vector<int> find_peaks(const RVector& spectrum);

// Angles (degrees) of the `count` strongest CBF peaks, ascending.
std::vector<double> cbf_doa_estimates(const SnapshotMatrix& Y, const AngularGrid& grid,
                                      int count);

} // namespace gdoa
