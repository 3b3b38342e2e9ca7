#pragma once

// Fisher information and Cramér-Rao bound for the line-spectral model with
// per-cell noise variances.

#include <vector>

#include "gdoa/estimates.hpp"
#include "gdoa/types.hpp"

namespace gdoa {

// Deterministic parameter vector [omega; vec(G); vec(Phi)], length K + 2KL,
// where vec stacks columns (snapshot by snapshot).
struct CrbParameterization {
  std::vector<double> omegas; // K
  RMatrix magnitudes;         // K x L, g_{k,l} = |x_{k,l}|
  RMatrix phases;             // K x L, phi_{k,l} = arg x_{k,l}

  static CrbParameterization from_weights(std::vector<double> omegas,
                                          const CMatrix& weights);

  int K() const { return static_cast<int>(omegas.size()); }
  int L() const { return static_cast<int>(magnitudes.cols()); }
  int size() const { return K() + 2 * K() * L(); }
  int magnitude_index(int k, int l) const { return K() + l * K() + k; }
  int phase_index(int k, int l) const { return K() + K() * L() + l * K() + k; }

  RVector stacked() const;
  static CrbParameterization unstack(const RVector& v, int K, int L);
};

// Z_{m,l} = sum_k g_{k,l} exp(j (m omega_k + phi_{k,l})), m 0-based.
cplx signal_entry(const CrbParameterization& params, int m, int l);

struct SignalPartials {
  RVector re; // d Re Z_{m,l} / d params
  RVector im; // d Im Z_{m,l} / d params
};

// Dense gradients; nonzeros only in the omega block and the (g_l, phi_l)
// blocks of snapshot l.
SignalPartials signal_partials(const CrbParameterization& params, int m, int l);

// I = sum_{m,l} (2/nu_{m,l}) (grad Re Z grad Re Z^T + grad Im Z grad Im Z^T).
// `variances` is M x L.
RMatrix fim(const CrbParameterization& params, const RMatrix& variances);
// Same sum with nu_{m,l} looked up in a case-structured estimate.
RMatrix fim(const CrbParameterization& params, const NoiseEstimate& noise);

// Leading K x K block of the inverse FIM. Throws RankError for zero
// magnitudes, and when the Jacobi-equilibrated FIM has condition number
// above 1e12 or is not positive definite.
RMatrix crb_frequencies(const CrbParameterization& params, const RMatrix& variances);
RMatrix crb_frequencies(const CrbParameterization& params, const NoiseEstimate& noise);

// 10 log10(trace(crb)).
double crb_trace_db(const RMatrix& crb);

} // namespace gdoa
