#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace gbf::fft {

/// Smallest power of two >= n (n = 0 gives 1).
std::size_t next_pow2(std::size_t n);

/// First `out_len` samples of the linear convolution a * b. Both inputs are
/// zero-padded to a power of two >= len(a) + len(b) - 1 before transforming.
std::vector<double> convolve(std::span<const double> a, std::span<const double> b,
                             std::size_t out_len);

/// c[k] = sum_n a(n) b(n - k) for k = 0..max_lag, with b(n) = 0 outside [0, len(b)).
std::vector<double> correlate(std::span<const double> a, std::span<const double> b,
                              std::size_t max_lag);

}  // namespace gbf::fft
