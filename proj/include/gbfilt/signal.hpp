#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace gbf {

/// Uniformly sampled real-valued sequence. Every sample is finite.
class Signal {
 public:
  Signal() = default;
  explicit Signal(std::vector<double> samples, std::optional<double> sample_rate = std::nullopt);

  /// Builds a signal of `n` zeros.
  static Signal zeros(std::size_t n);

  std::size_t size() const noexcept { return samples_.size(); }
  bool empty() const noexcept { return samples_.empty(); }
  double operator[](std::size_t i) const noexcept { return samples_[i]; }
  std::span<const double> samples() const noexcept { return samples_; }
  const std::vector<double>& vec() const noexcept { return samples_; }
  std::optional<double> sample_rate() const noexcept { return sample_rate_; }

  auto begin() const noexcept { return samples_.begin(); }
  auto end() const noexcept { return samples_.end(); }

  friend bool operator==(const Signal& a, const Signal& b) { return a.samples_ == b.samples_; }

 private:
  std::vector<double> samples_;
  std::optional<double> sample_rate_;
};

/// Static nonlinearity a_0 + a_1 x + ... + a_p x^p.
class Polynomial {
 public:
  explicit Polynomial(std::vector<double> coeffs);

  /// a = [0, 1, 0, ..., 0] of the given order (order 0 gives the constant 1).
  static Polynomial identity(std::size_t order);

  std::size_t order() const noexcept { return coeffs_.size() - 1; }
  std::span<const double> coeffs() const noexcept { return coeffs_; }
  double operator[](std::size_t k) const noexcept { return coeffs_[k]; }

  /// Horner evaluation at a single point.
  double operator()(double x) const noexcept;

  friend bool operator==(const Polynomial&, const Polynomial&) = default;

 private:
  std::vector<double> coeffs_;
};

/// Causal FIR filter; tap j multiplies the input delayed by j samples.
class FirFilter {
 public:
  explicit FirFilter(std::vector<double> taps);

  static FirFilter zeros(std::size_t length);
  static FirFilter delta(std::size_t length);

  std::size_t size() const noexcept { return taps_.size(); }
  /// Highest delay, m = size() - 1.
  std::size_t order() const noexcept { return taps_.size() - 1; }
  std::span<const double> taps() const noexcept { return taps_; }
  double operator[](std::size_t j) const noexcept { return taps_[j]; }

  friend bool operator==(const FirFilter&, const FirFilter&) = default;

 private:
  std::vector<double> taps_;
};

/// z(n) = sum_k a_k x(n)^k, evaluated with Horner's scheme.
/// Throws NumericOverflowError naming the first sample that overflowed.
Signal poly_transform(const Signal& x, const Polynomial& a);

/// y(n) = sum_{j <= min(m, n)} b_j z(n - j). Zero history before n = 0,
/// output truncated to len(z).
Signal fir_convolve(const FirFilter& b, const Signal& z);

/// Same contract as fir_convolve, computed through zero-padded FFTs.
Signal fir_convolve_fft(const FirFilter& b, const Signal& z);

/// Direct for short filters, FFT otherwise.
Signal fir_apply(const FirFilter& b, const Signal& z);

/// Throws NumericOverflowError if any value is non-finite.
void check_finite(std::span<const double> values, const char* where);

}  // namespace gbf
