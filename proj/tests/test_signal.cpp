#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "gbfilt/error.hpp"
#include "gbfilt/signal.hpp"
#include "oracles.hpp"

namespace gbf {
namespace {

using testing::max_abs_diff;
using testing::naive_convolve;
using testing::random_vector;

TEST(PolyTransform, IdentityPolynomial) {
  const auto z = poly_transform(Signal({1, 2, 3}), Polynomial({0, 1}));
  EXPECT_EQ(z.vec(), (std::vector<double>{1, 2, 3}));
}

TEST(PolyTransform, ConstantPolynomial) {
  const auto z = poly_transform(Signal({5, -5}), Polynomial({1, 0}));
  EXPECT_EQ(z.vec(), (std::vector<double>{1, 1}));
}

TEST(PolyTransform, QuadraticByHand) {
  // 2 + 0.1 * 4
  const auto z = poly_transform(Signal({2}), Polynomial({0, 1, 0.1}));
  EXPECT_NEAR(z[0], 2.4, 1e-15);
}

TEST(PolyTransform, SingleMonomialIsExactPower) {
  std::mt19937_64 rng(3);
  const auto x = random_vector(64, rng, -3.0, 3.0);
  for (std::size_t k = 0; k <= 3; ++k) {
    std::vector<double> a(k + 1, 0.0);
    a[k] = 1.0;
    const auto z = poly_transform(Signal(x), Polynomial(a));
    for (std::size_t n = 0; n < x.size(); ++n) {
      double expect = 1.0;
      for (std::size_t i = 0; i < k; ++i) expect *= x[n];
      EXPECT_EQ(z[n], expect) << "k=" << k << " n=" << n;
    }
  }
}

TEST(PolyTransform, OverflowNamesSampleIndex) {
  try {
    poly_transform(Signal({1.0, 2.0, 1e200}), Polynomial({0, 0, 0, 1}));
    FAIL() << "expected overflow";
  } catch (const NumericOverflowError& e) {
    EXPECT_EQ(e.index(), 2u);
    EXPECT_NE(std::string(e.what()).find("sample 2"), std::string::npos);
  }
}

TEST(PolyTransform, RejectsEmptyInput) {
  EXPECT_THROW(poly_transform(Signal(), Polynomial({1})), PreconditionError);
}

TEST(Signal, RejectsNonFiniteSamples) {
  EXPECT_THROW(Signal({1.0, std::numeric_limits<double>::quiet_NaN()}), NumericOverflowError);
  EXPECT_THROW(Polynomial({1.0, std::numeric_limits<double>::infinity()}), PreconditionError);
  EXPECT_THROW(FirFilter({}), PreconditionError);
}

TEST(FirConvolve, IdentityFilter) {
  EXPECT_EQ(fir_convolve(FirFilter({1}), Signal({3, 1, 4})).vec(), (std::vector<double>{3, 1, 4}));
}

TEST(FirConvolve, UnitDelayWithZeroHistory) {
  EXPECT_EQ(fir_convolve(FirFilter({0, 1}), Signal({1, 2, 3})).vec(), (std::vector<double>{0, 1, 2}));
}

TEST(FirConvolve, ImpulseResponseReadout) {
  EXPECT_EQ(fir_convolve(FirFilter({0.5, 0.25}), Signal({1, 0, 0})).vec(),
            (std::vector<double>{0.5, 0.25, 0}));
}

TEST(FirConvolve, FilterLongerThanSignal) {
  EXPECT_EQ(fir_convolve(FirFilter({1, 2, 3, 4}), Signal({1, 1})).vec(), (std::vector<double>{1, 3}));
}

TEST(FirConvolveFft, MatchesDirectOnShortSignals) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<std::size_t> len(1, 64);
  for (int trial = 0; trial < 200; ++trial) {
    const auto z = random_vector(len(rng), rng);
    const auto b = random_vector(len(rng), rng);
    const auto direct = naive_convolve(b, z);
    EXPECT_LE(max_abs_diff(fir_convolve_fft(FirFilter(b), Signal(z)).vec(), direct), 1e-10);
    EXPECT_LE(max_abs_diff(fir_convolve(FirFilter(b), Signal(z)).vec(), direct), 1e-12);
  }
}

TEST(FirConvolveFft, IdentityAndZeroFilters) {
  std::mt19937_64 rng(5);
  const auto z = random_vector(300, rng, -5.0, 5.0);
  EXPECT_LE(max_abs_diff(fir_convolve_fft(FirFilter({1}), Signal(z)).vec(), z), 1e-12);
  const auto zero = fir_convolve_fft(FirFilter::zeros(17), Signal(z));
  for (double v : zero) EXPECT_EQ(v, 0.0);
}

TEST(FirConvolveFft, EquivalentToDirectUpTo4096) {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<std::size_t> len(1, 4096);
  for (int trial = 0; trial < 40; ++trial) {
    const auto z = random_vector(len(rng), rng);
    const auto b = random_vector(std::min<std::size_t>(len(rng), 512), rng);
    const auto fast = fir_convolve_fft(FirFilter(b), Signal(z));
    const auto direct = fir_convolve(FirFilter(b), Signal(z));
    ASSERT_LE(max_abs_diff(fast.vec(), direct.vec()), 1e-9) << "trial " << trial;
  }
}

TEST(FirConvolve, Linearity) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const auto b = random_vector(9, rng);
    const auto z1 = random_vector(200, rng);
    const auto z2 = random_vector(200, rng);
    const double alpha = 1.7, beta = -0.4;
    std::vector<double> mix(200);
    for (std::size_t i = 0; i < mix.size(); ++i) mix[i] = alpha * z1[i] + beta * z2[i];
    for (auto conv : {&fir_convolve, &fir_convolve_fft}) {
      const auto lhs = conv(FirFilter(b), Signal(mix));
      const auto y1 = conv(FirFilter(b), Signal(z1));
      const auto y2 = conv(FirFilter(b), Signal(z2));
      std::vector<double> rhs(200);
      for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] = alpha * y1[i] + beta * y2[i];
      EXPECT_LE(testing::max_rel_diff(lhs.vec(), rhs), 1e-10);
    }
  }
}

TEST(FirConvolve, CausalityIsBitExact) {
  std::mt19937_64 rng(9);
  const auto b = random_vector(12, rng);
  auto z = random_vector(128, rng);
  const std::size_t n0 = 70;
  const auto before_direct = fir_convolve(FirFilter(b), Signal(z));
  const auto before_fft = fir_convolve_fft(FirFilter(b), Signal(z));
  z[n0] += 5.0;
  const auto after_direct = fir_convolve(FirFilter(b), Signal(z));
  for (std::size_t n = 0; n < n0; ++n) EXPECT_EQ(before_direct[n], after_direct[n]);
  // Transform round-off is global, so the FFT path is only checked to tolerance.
  const auto after_fft = fir_convolve_fft(FirFilter(b), Signal(z));
  for (std::size_t n = 0; n < n0; ++n) EXPECT_NEAR(before_fft[n], after_fft[n], 1e-12);
}

TEST(FirConvolve, ShiftCovarianceWithZeroHistory) {
  std::mt19937_64 rng(10);
  const auto b = random_vector(6, rng);
  const auto z = random_vector(50, rng);
  const std::size_t k = 13;
  std::vector<double> padded(k, 0.0);
  padded.insert(padded.end(), z.begin(), z.end());
  const auto y = fir_convolve(FirFilter(b), Signal(z));
  const auto yp = fir_convolve(FirFilter(b), Signal(padded));
  for (std::size_t n = 0; n < k; ++n) EXPECT_EQ(yp[n], 0.0);
  for (std::size_t n = 0; n < z.size(); ++n) EXPECT_EQ(yp[n + k], y[n]);
}

}  // namespace
}  // namespace gbf
