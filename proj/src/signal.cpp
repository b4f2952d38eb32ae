#include "gbfilt/signal.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gbfilt/error.hpp"
#include "gbfilt/fft.hpp"

namespace gbf {
namespace {

void require_finite_coeffs(std::span<const double> c, const char* what) {
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (!std::isfinite(c[i])) {
      throw PreconditionError(std::string(what) + " coefficient " + std::to_string(i) +
                              " is not finite");
    }
  }
}

}  // namespace

void check_finite(std::span<const double> values, const char* where) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) throw NumericOverflowError(where, i);
  }
}

Signal::Signal(std::vector<double> samples, std::optional<double> sample_rate)
    : samples_(std::move(samples)), sample_rate_(sample_rate) {
  check_finite(samples_, "signal");
  if (sample_rate_ && !(*sample_rate_ > 0.0 && std::isfinite(*sample_rate_))) {
    throw PreconditionError("sample rate must be positive");
  }
}

Signal Signal::zeros(std::size_t n) { return Signal(std::vector<double>(n, 0.0)); }

Polynomial::Polynomial(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) {
  if (coeffs_.empty()) throw PreconditionError("polynomial needs at least one coefficient");
  require_finite_coeffs(coeffs_, "polynomial");
}

Polynomial Polynomial::identity(std::size_t order) {
  std::vector<double> c(order + 1, 0.0);
  c[order == 0 ? 0 : 1] = 1.0;
  return Polynomial(std::move(c));
}

double Polynomial::operator()(double x) const noexcept {
  double acc = coeffs_.back();
  for (std::size_t k = coeffs_.size() - 1; k-- > 0;) acc = acc * x + coeffs_[k];
  return acc;
}

FirFilter::FirFilter(std::vector<double> taps) : taps_(std::move(taps)) {
  if (taps_.empty()) throw PreconditionError("FIR filter needs at least one tap");
  require_finite_coeffs(taps_, "FIR");
}

FirFilter FirFilter::zeros(std::size_t length) {
  return FirFilter(std::vector<double>(length, 0.0));
}

FirFilter FirFilter::delta(std::size_t length) {
  std::vector<double> t(length, 0.0);
  t.at(0) = 1.0;
  return FirFilter(std::move(t));
}

Signal poly_transform(const Signal& x, const Polynomial& a) {
  if (x.empty()) throw PreconditionError("poly_transform: empty input signal");
  std::vector<double> z(x.size());
  std::transform(x.begin(), x.end(), z.begin(), [&a](double v) { return a(v); });
  check_finite(z, "poly_transform");
  return Signal(std::move(z), x.sample_rate());
}

Signal fir_convolve(const FirFilter& b, const Signal& z) {
  if (z.empty()) throw PreconditionError("fir_convolve: empty input signal");
  const auto taps = b.taps();
  const auto in = z.samples();
  std::vector<double> y(in.size(), 0.0);
  for (std::size_t n = 0; n < in.size(); ++n) {
    const std::size_t jmax = std::min(taps.size() - 1, n);
    double acc = 0.0;
    for (std::size_t j = 0; j <= jmax; ++j) acc += taps[j] * in[n - j];
    y[n] = acc;
  }
  check_finite(y, "fir_convolve");
  return Signal(std::move(y), z.sample_rate());
}

Signal fir_convolve_fft(const FirFilter& b, const Signal& z) {
  if (z.empty()) throw PreconditionError("fir_convolve_fft: empty input signal");
  auto y = fft::convolve(b.taps(), z.samples(), z.size());
  check_finite(y, "fir_convolve_fft");
  return Signal(std::move(y), z.sample_rate());
}

Signal fir_apply(const FirFilter& b, const Signal& z) {
  constexpr std::size_t kDirectTaps = 48;
  return b.size() <= kDirectTaps ? fir_convolve(b, z) : fir_convolve_fft(b, z);
}

}  // namespace gbf
