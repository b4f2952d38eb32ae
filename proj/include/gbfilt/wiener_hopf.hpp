#pragma once

#include <cstddef>
#include <vector>

#include "gbfilt/signal.hpp"

namespace gbf {

/// Least-squares FIR estimation problem: find b (m + 1 taps) minimizing
///
///   (1/N) sum_n (t(n) - sum_j b_j z(n - j))^2 + ridge * |b|^2
///
/// over the full record, with z(n) = 0 for n < 0.
struct WienerHopfProblem {
  Signal z;            ///< filter input
  Signal t;            ///< desired output, same length as z
  std::size_t order{};  ///< m; the filter has m + 1 taps
  double ridge{0.0};   ///< absolute ridge strength, >= 0

  /// Throws PreconditionError unless len(z) == len(t) > m and ridge >= 0.
  void validate() const;
};

/// Sample (1/N) correlation statistics of a problem.
struct CorrelationStats {
  std::vector<double> autocorr;   ///< (1/N) sum_n z(n) z(n - d), d = 0..m
  std::vector<double> crosscorr;  ///< (1/N) sum_n t(n) z(n - j), j = 0..m
};

/// Lag sums by direct summation, O(N m).
CorrelationStats correlation_stats_direct(const WienerHopfProblem& prob);
/// Lag sums through zero-padded FFTs, O(N log N).
CorrelationStats correlation_stats_fft(const WienerHopfProblem& prob);

/// Solves the normal equations built from `stats`. The matrix is the Toeplitz
/// matrix of the autocorrelation minus the end-of-record correction that zero
/// pre-history introduces, so the result is the exact least-squares filter.
FirFilter solve_normal_equations(const WienerHopfProblem& prob, const CorrelationStats& stats);

FirFilter solve_time_domain(const WienerHopfProblem& prob);
FirFilter solve_frequency_domain(const WienerHopfProblem& prob);

/// Picks the cheaper of the two routes for the problem size.
FirFilter solve_wiener_hopf(const WienerHopfProblem& prob);

/// max_j |sum_n r(n) z(n - j)| / (|r| |z|) for r = t - b * z. Zero when either
/// norm vanishes.
double residual_orthogonality(const WienerHopfProblem& prob, const FirFilter& b);

}  // namespace gbf
