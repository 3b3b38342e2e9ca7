#include "gdoa/baselines.hpp"

#include <algorithm>
#include <cmath>

#include "gdoa/errors.hpp"

namespace gdoa {

AngularGrid AngularGrid::uniform(int count, double lo, double hi) {
  if (count < 1) throw ConfigError("angular grid must have at least one point");
  if (count > 1 && !(hi > lo)) throw ConfigError("angular grid bounds must increase");
  AngularGrid g;
  g.thetas.resize(static_cast<std::size_t>(count));
  const double step = count > 1 ? (hi - lo) / (count - 1) : 0.0;
  for (int i = 0; i < count; ++i) g.thetas[i] = lo + step * i;
  return g;
}

RVector cbf_spectrum(const SnapshotMatrix& Y, const AngularGrid& grid, bool normalize) {
  if (grid.thetas.empty()) throw ConfigError("cbf_spectrum: empty angular grid");
  const int M = Y.M();
  const int L = Y.L();
  const double scale = 1.0 / (static_cast<double>(L) * M * M);
  RVector P(static_cast<Eigen::Index>(grid.thetas.size()));
  for (std::size_t g = 0; g < grid.thetas.size(); ++g) {
    const CVector a = steering_vector(theta_to_omega(grid.thetas[g]), M);
    P(static_cast<Eigen::Index>(g)) = scale * (a.adjoint() * Y.data).squaredNorm();
  }
  if (normalize) {
    const double peak = P.maxCoeff();
    P = (P / peak).array().log10() * 10.0;
  }
  return P;
}

std::vector<int> find_peaks(const RVector& spectrum) {
  std::vector<int> peaks;
  for (Eigen::Index i = 1; i + 1 < spectrum.size(); ++i)
    if (spectrum(i) > spectrum(i - 1) && spectrum(i) >= spectrum(i + 1))
      peaks.push_back(static_cast<int>(i));
  std::stable_sort(peaks.begin(), peaks.end(),
                   [&](int a, int b) { return spectrum(a) > spectrum(b); });
  return peaks;
}

std::vector<double> cbf_doa_estimates(const SnapshotMatrix& Y, const AngularGrid& grid,
                                      int count) {
  const RVector P = cbf_spectrum(Y, grid);
  std::vector<int> peaks = find_peaks(P);
  if (static_cast<int>(peaks.size()) > count) peaks.resize(static_cast<std::size_t>(count));
  std::vector<double> out;
  for (int i : peaks) out.push_back(grid.thetas[i]);
  std::sort(out.begin(), out.end());
  return out;
}

} // namespace gdoa
