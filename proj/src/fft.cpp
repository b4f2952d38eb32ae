#include "gbfilt/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <complex>
#include <memory>
#include <mutex>

namespace gbf::fft {
namespace {

// FFTW's planner is not re-entrant; execution on distinct buffers is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(void* p) const noexcept { fftw_free(p); }
};

template <typename T>
using FftwBuffer = std::unique_ptr<T[], FftwFree>;

template <typename T>
FftwBuffer<T> alloc(std::size_t n) {
  return FftwBuffer<T>(static_cast<T*>(fftw_malloc(sizeof(T) * n)));
}

class Plan {
 public:
  explicit Plan(fftw_plan p) : plan_(p) {}
  Plan(const Plan&) = delete;
  Plan& operator=(const Plan&) = delete;
  ~Plan() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan_);
  }
  void execute() const { fftw_execute(plan_); }

 private:
  fftw_plan plan_;
};

/// Real buffer of length n and its half spectrum, with forward and inverse plans.
class RealTransform {
 public:
  explicit RealTransform(std::size_t n)
      : n_(n), real_(alloc<double>(n)), spec_(alloc<fftw_complex>(n / 2 + 1)),
        forward_(make_forward()), inverse_(make_inverse()) {}

  std::size_t size() const noexcept { return n_; }
  std::size_t bins() const noexcept { return n_ / 2 + 1; }

  void load(std::span<const double> x) {
    std::fill_n(real_.get(), n_, 0.0);
    std::copy(x.begin(), x.end(), real_.get());
  }

  std::vector<std::complex<double>> forward(std::span<const double> x) {
    load(x);
    forward_.execute();
    std::vector<std::complex<double>> out(bins());
    for (std::size_t k = 0; k < bins(); ++k) out[k] = {spec_[k][0], spec_[k][1]};
    return out;
  }

  /// Unnormalized inverse is divided by n here.
  std::vector<double> inverse(const std::vector<std::complex<double>>& spectrum,
                              std::size_t out_len) {
    for (std::size_t k = 0; k < bins(); ++k) {
      spec_[k][0] = spectrum[k].real();
      spec_[k][1] = spectrum[k].imag();
    }
    inverse_.execute();
    const double scale = 1.0 / static_cast<double>(n_);
    std::vector<double> out(out_len);
    for (std::size_t i = 0; i < out_len; ++i) out[i] = real_[i] * scale;
    return out;
  }

 private:
  fftw_plan make_forward() {
    std::lock_guard lock(planner_mutex());
    return fftw_plan_dft_r2c_1d(static_cast<int>(n_), real_.get(), spec_.get(), FFTW_ESTIMATE);
  }
  fftw_plan make_inverse() {
    std::lock_guard lock(planner_mutex());
    return fftw_plan_dft_c2r_1d(static_cast<int>(n_), spec_.get(), real_.get(), FFTW_ESTIMATE);
  }

  std::size_t n_;
  FftwBuffer<double> real_;
  FftwBuffer<fftw_complex> spec_;
  Plan forward_;
  Plan inverse_;
};

}  // namespace

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

std::vector<double> convolve(std::span<const double> a, std::span<const double> b,
                             std::size_t out_len) {
  if (a.empty() || b.empty() || out_len == 0) return std::vector<double>(out_len, 0.0);
  RealTransform tr(next_pow2(a.size() + b.size() - 1));
  auto fa = tr.forward(a);
  const auto fb = tr.forward(b);
  for (std::size_t k = 0; k < fa.size(); ++k) fa[k] *= fb[k];
  const std::size_t keep = std::min(out_len, tr.size());
  auto out = tr.inverse(fa, keep);
  out.resize(out_len, 0.0);
  return out;
}

std::vector<double> correlate(std::span<const double> a, std::span<const double> b,
                              std::size_t max_lag) {
  if (a.empty() || b.empty()) return std::vector<double>(max_lag + 1, 0.0);
  // n - k reaches down to -max_lag; padding to len(b) + max_lag keeps those
  // indices from wrapping back into the support of b.
  RealTransform tr(next_pow2(std::max(a.size(), b.size() + max_lag)));
  auto fa = tr.forward(a);
  const auto fb = tr.forward(b);
  for (std::size_t k = 0; k < fa.size(); ++k) fa[k] *= std::conj(fb[k]);
  const std::size_t keep = std::min(max_lag + 1, tr.size());
  auto out = tr.inverse(fa, keep);
  out.resize(max_lag + 1, 0.0);
  return out;
}

}  // namespace gbf::fft
