#include "gbfilt/wiener_hopf.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "gbfilt/error.hpp"
#include "gbfilt/fft.hpp"

namespace gbf {
namespace {

// Below this reciprocal condition estimate the Cholesky factor is not trusted.
constexpr double kMinRcond = 1e-14;

double norm2(std::span<const double> v) { return std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0)); }

[[noreturn]] void throw_singular(const WienerHopfProblem& prob) {
  if (prob.ridge == 0.0) {
    throw SingularSystemError(
        "Wiener-Hopf normal matrix is singular or ill-conditioned (m = " +
        std::to_string(prob.order) + "); use a positive ridge");
  }
  throw SingularSystemError("Wiener-Hopf normal matrix is singular even with ridge " +
                            std::to_string(prob.ridge));
}

}  // namespace

void WienerHopfProblem::validate() const {
  if (z.size() != t.size()) {
    throw PreconditionError("Wiener-Hopf input has " + std::to_string(z.size()) +
                            " samples but target has " + std::to_string(t.size()));
  }
  if (z.size() <= order) {
    throw PreconditionError("Wiener-Hopf needs more samples (" + std::to_string(z.size()) +
                            ") than filter taps (" + std::to_string(order + 1) + ")");
  }
  if (!(ridge >= 0.0) || !std::isfinite(ridge)) {
    throw PreconditionError("ridge must be finite and non-negative");
  }
}

CorrelationStats correlation_stats_direct(const WienerHopfProblem& prob) {
  prob.validate();
  const auto z = prob.z.samples();
  const auto t = prob.t.samples();
  const std::size_t n = z.size();
  const double inv_n = 1.0 / static_cast<double>(n);
  CorrelationStats s{std::vector<double>(prob.order + 1), std::vector<double>(prob.order + 1)};
  for (std::size_t d = 0; d <= prob.order; ++d) {
    double acf = 0.0;
    double xcf = 0.0;
    for (std::size_t i = d; i < n; ++i) {
      acf += z[i] * z[i - d];
      xcf += t[i] * z[i - d];
    }
    s.autocorr[d] = acf * inv_n;
    s.crosscorr[d] = xcf * inv_n;
  }
  return s;
}

CorrelationStats correlation_stats_fft(const WienerHopfProblem& prob) {
  prob.validate();
  const double inv_n = 1.0 / static_cast<double>(prob.z.size());
  CorrelationStats s{fft::correlate(prob.z.samples(), prob.z.samples(), prob.order),
                     fft::correlate(prob.t.samples(), prob.z.samples(), prob.order)};
  for (auto& v : s.autocorr) v *= inv_n;
  for (auto& v : s.crosscorr) v *= inv_n;
  return s;
}

FirFilter solve_normal_equations(const WienerHopfProblem& prob, const CorrelationStats& stats) {
  const auto taps = static_cast<Eigen::Index>(prob.order + 1);
  const auto z = prob.z.samples();
  const std::size_t n = z.size();
  const double inv_n = 1.0 / static_cast<double>(n);

  // R(j, l) = (1/N) sum_{i >= l} z(i - j) z(i - l). Row 0 is the autocorrelation;
  // each step down the diagonal drops one more product from the end of the record.
  Eigen::MatrixXd r(taps, taps);
  for (Eigen::Index d = 0; d < taps; ++d) {
    double v = stats.autocorr[static_cast<std::size_t>(d)];
    for (Eigen::Index j = 0; j + d < taps; ++j) {
      if (j > 0) {
        const std::size_t s = static_cast<std::size_t>(j - 1);
        v -= z[n - 1 - s] * z[n - 1 - s - static_cast<std::size_t>(d)] * inv_n;
      }
      r(j, j + d) = v;
      r(j + d, j) = v;
    }
  }
  r.diagonal().array() += prob.ridge;
  const Eigen::Map<const Eigen::VectorXd> p(stats.crosscorr.data(), taps);

  Eigen::VectorXd b;
  Eigen::LLT<Eigen::MatrixXd> llt(r);
  if (llt.info() == Eigen::Success && llt.rcond() > kMinRcond) {
    b = llt.solve(p);
  } else {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(r);
    qr.setThreshold(1e-13);
    if (!qr.isInvertible()) throw_singular(prob);
    b = qr.solve(p);
  }
  if (!b.allFinite()) throw_singular(prob);
  return FirFilter(std::vector<double>(b.data(), b.data() + b.size()));
}

FirFilter solve_time_domain(const WienerHopfProblem& prob) {
  return solve_normal_equations(prob, correlation_stats_direct(prob));
}

FirFilter solve_frequency_domain(const WienerHopfProblem& prob) {
  return solve_normal_equations(prob, correlation_stats_fft(prob));
}

FirFilter solve_wiener_hopf(const WienerHopfProblem& prob) {
  // Direct lag sums cost N (m + 1); the FFT route costs a few N log N.
  const double direct = static_cast<double>(prob.z.size()) * static_cast<double>(prob.order + 1);
  const double via_fft = 12.0 * static_cast<double>(fft::next_pow2(prob.z.size() + prob.order)) *
                         std::log2(static_cast<double>(fft::next_pow2(prob.z.size() + prob.order)));
  return direct <= via_fft ? solve_time_domain(prob) : solve_frequency_domain(prob);
}

double residual_orthogonality(const WienerHopfProblem& prob, const FirFilter& b) {
  prob.validate();
  if (b.size() != prob.order + 1) {
    throw PreconditionError("filter has " + std::to_string(b.size()) + " taps, problem expects " +
                            std::to_string(prob.order + 1));
  }
  const Signal y = fir_apply(b, prob.z);
  std::vector<double> r(prob.t.size());
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = prob.t[i] - y[i];
  const double rn = norm2(r);
  const double zn = norm2(prob.z.samples());
  if (rn == 0.0 || zn == 0.0) return 0.0;
  const auto c = fft::correlate(r, prob.z.samples(), prob.order);
  double worst = 0.0;
  for (double v : c) worst = std::max(worst, std::abs(v));
  return worst / (rn * zn);
}

}  // namespace gbf
