#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "gbfilt/error.hpp"
#include "gbfilt/wiener_hopf.hpp"
#include "oracles.hpp"

namespace gbf {
namespace {

using testing::brute_force_ls;
using testing::max_rel_diff;
using testing::naive_convolve;
using testing::random_vector;
using testing::sum_sq_residual;

std::vector<double> vec(const FirFilter& b) { return {b.taps().begin(), b.taps().end()}; }

double norm(const FirFilter& b) {
  return std::sqrt(std::inner_product(b.taps().begin(), b.taps().end(), b.taps().begin(), 0.0));
}

WienerHopfProblem random_problem(std::mt19937_64& rng, std::size_t n, std::size_t m, double ridge) {
  return {Signal(random_vector(n, rng)), Signal(random_vector(n, rng)), m, ridge};
}

/// Target correlated with the input: a random FIR of the input plus noise.
WienerHopfProblem correlated_problem(std::mt19937_64& rng, std::size_t n, std::size_t m,
                                     double ridge) {
  const auto z = random_vector(n, rng);
  auto t = naive_convolve(random_vector(m + 1, rng), z);
  std::normal_distribution<double> noise(0.0, 0.1);
  for (auto& v : t) v += noise(rng);
  return {Signal(z), Signal(t), m, ridge};
}

TEST(WienerHopf, RecoversKnownFilter) {
  std::mt19937_64 rng(1);
  const auto z = random_vector(500, rng);
  const std::vector<double> truth{0.7, -0.2, 0.1};
  const auto t = naive_convolve(truth, z);
  for (auto solve : {&solve_time_domain, &solve_frequency_domain}) {
    const auto b = solve({Signal(z), Signal(t), 2, 0.0});
    ASSERT_EQ(b.size(), 3u);
    for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(b[j], truth[j], 1e-8);
  }
}

TEST(WienerHopf, IdentityTargetGivesDelta) {
  std::mt19937_64 rng(2);
  const auto z = random_vector(300, rng);
  for (auto solve : {&solve_time_domain, &solve_frequency_domain}) {
    const auto b = solve({Signal(z), Signal(z), 5, 0.0});
    EXPECT_NEAR(b[0], 1.0, 1e-8);
    for (std::size_t j = 1; j < b.size(); ++j) EXPECT_NEAR(b[j], 0.0, 1e-8);
  }
}

TEST(WienerHopf, HugeRidgeShrinksToZero) {
  std::mt19937_64 rng(3);
  auto prob = correlated_problem(rng, 400, 7, 0.0);
  const double energy = std::inner_product(prob.z.begin(), prob.z.end(), prob.z.begin(), 0.0);
  prob.ridge = 1e12 * energy;
  EXPECT_LT(norm(solve_time_domain(prob)), 1e-12);
  EXPECT_LT(norm(solve_frequency_domain(prob)), 1e-12);
}

TEST(WienerHopf, MatchesBruteForceLeastSquares) {
  std::mt19937_64 rng(4);
  for (double ridge : {0.0, 1e-3, 0.5}) {
    const auto prob = correlated_problem(rng, 120, 9, ridge);
    const auto expect = brute_force_ls(prob.z.vec(), prob.t.vec(), prob.order, ridge);
    EXPECT_LE(max_rel_diff(vec(solve_time_domain(prob)), expect), 1e-9) << "ridge " << ridge;
    EXPECT_LE(max_rel_diff(vec(solve_frequency_domain(prob)), expect), 1e-9) << "ridge " << ridge;
  }
}

TEST(WienerHopf, ScalarCaseClosedForm) {
  std::mt19937_64 rng(5);
  for (double ridge : {0.0, 0.25}) {
    const auto prob = random_problem(rng, 64, 0, ridge);
    double tz = 0.0, zz = 0.0;
    for (std::size_t i = 0; i < prob.z.size(); ++i) {
      tz += prob.t[i] * prob.z[i];
      zz += prob.z[i] * prob.z[i];
    }
    const double expect = tz / (zz + ridge * static_cast<double>(prob.z.size()));
    EXPECT_NEAR(solve_frequency_domain(prob)[0], expect, 1e-12 * std::abs(expect) + 1e-15);
    EXPECT_NEAR(solve_time_domain(prob)[0], expect, 1e-12 * std::abs(expect) + 1e-15);
  }
}

TEST(WienerHopf, ImpulseInputReadsOffTarget) {
  std::mt19937_64 rng(6);
  std::vector<double> z(40, 0.0);
  z[0] = 1.0;
  const auto t = random_vector(40, rng);
  const auto b = solve_frequency_domain({Signal(z), Signal(t), 7, 0.0});
  for (std::size_t j = 0; j < 8; ++j) EXPECT_NEAR(b[j], t[j], 1e-10);
}

TEST(WienerHopf, FrequencyAndTimeDomainAgree) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<std::size_t> order(0, 64);
  std::uniform_int_distribution<std::size_t> length(100, 4096);
  for (int trial = 0; trial < 30; ++trial) {
    const auto prob = correlated_problem(rng, length(rng), order(rng), 0.0);
    EXPECT_LE(max_rel_diff(vec(solve_frequency_domain(prob)), vec(solve_time_domain(prob))), 1e-7)
        << "trial " << trial;
  }
}

TEST(ResidualOrthogonality, LeastSquaresSolutionIsOrthogonal) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    const auto prob = correlated_problem(rng, 1000, 16, 0.0);
    EXPECT_LE(residual_orthogonality(prob, solve_time_domain(prob)), 1e-8);
    EXPECT_LE(residual_orthogonality(prob, solve_frequency_domain(prob)), 1e-8);
  }
}

TEST(ResidualOrthogonality, ZeroFilterIsNotOrthogonal) {
  std::mt19937_64 rng(9);
  const auto prob = correlated_problem(rng, 1000, 4, 0.0);
  EXPECT_GT(residual_orthogonality(prob, FirFilter::zeros(5)), 1e-3);
}

TEST(ResidualOrthogonality, RidgeBreaksOrthogonality) {
  // With a ridge the residual correlation at lag j is N * ridge * b_j instead of zero.
  std::mt19937_64 rng(10);
  const auto prob = correlated_problem(rng, 1000, 4, 1.0);
  const auto b = brute_force_ls(prob.z.vec(), prob.t.vec(), prob.order, prob.ridge);
  const auto y = naive_convolve(b, prob.z.vec());
  double rr = 0.0, zz = 0.0, worst = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    rr += (prob.t[i] - y[i]) * (prob.t[i] - y[i]);
    zz += prob.z[i] * prob.z[i];
  }
  for (double v : b) worst = std::max(worst, std::abs(v));
  const double expect = static_cast<double>(prob.z.size()) * prob.ridge * worst / std::sqrt(rr * zz);
  const double value = residual_orthogonality(prob, solve_time_domain(prob));
  EXPECT_GT(value, 1e-3);
  EXPECT_NEAR(value, expect, 1e-9 * expect);
}

TEST(ResidualOrthogonality, ZeroNormsGiveZero) {
  const WienerHopfProblem prob{Signal({0, 0, 0, 0}), Signal({1, 2, 3, 4}), 1, 0.0};
  EXPECT_EQ(residual_orthogonality(prob, FirFilter({1, 1})), 0.0);
  const WienerHopfProblem exact{Signal({1, 2, 3, 4}), Signal({1, 2, 3, 4}), 1, 0.0};
  EXPECT_EQ(residual_orthogonality(exact, FirFilter({1, 0})), 0.0);
}

TEST(WienerHopf, PerturbingAnyCoefficientDoesNotHelp) {
  std::mt19937_64 rng(11);
  const auto prob = correlated_problem(rng, 800, 10, 0.0);
  const auto b = vec(solve_time_domain(prob));
  const double best = sum_sq_residual(prob.z.vec(), prob.t.vec(), b);
  for (std::size_t j = 0; j < b.size(); ++j) {
    for (double delta : {-1e-3, 1e-3}) {
      auto probe = b;
      probe[j] += delta;
      EXPECT_GE(sum_sq_residual(prob.z.vec(), prob.t.vec(), probe), best) << "tap " << j;
    }
  }
}

TEST(WienerHopf, RidgeIsMonotone) {
  std::mt19937_64 rng(12);
  auto prob = correlated_problem(rng, 600, 12, 0.0);
  double previous = std::numeric_limits<double>::infinity();
  for (double ridge : {0.0, 1e-4, 1e-2, 1e-1, 1.0, 10.0}) {
    prob.ridge = ridge;
    const double n = norm(solve_time_domain(prob));
    EXPECT_LE(n, previous) << "ridge " << ridge;
    previous = n;
  }
}

TEST(WienerHopf, ScaleEquivariance) {
  std::mt19937_64 rng(13);
  const auto prob = correlated_problem(rng, 700, 8, 0.0);
  const auto base = vec(solve_time_domain(prob));
  for (double c : {-3.0, 0.01, 250.0}) {
    std::vector<double> scaled(prob.z.vec());
    for (auto& v : scaled) v *= c;
    const auto b = vec(solve_time_domain({Signal(scaled), prob.t, prob.order, 0.0}));
    for (std::size_t j = 0; j < b.size(); ++j) {
      EXPECT_NEAR(b[j] * c, base[j], 1e-9 * std::abs(base[j]) + 1e-14) << "c " << c;
    }
  }
}

TEST(WienerHopf, SingularSystemRecommendsRidge) {
  const WienerHopfProblem prob{Signal::zeros(50), Signal(std::vector<double>(50, 1.0)), 3, 0.0};
  try {
    solve_time_domain(prob);
    FAIL() << "expected a singular-system error";
  } catch (const SingularSystemError& e) {
    EXPECT_NE(std::string(e.what()).find("ridge"), std::string::npos);
  }
  // With a ridge the same problem is well posed and the answer is zero.
  const auto b = solve_frequency_domain({prob.z, prob.t, 3, 1e-6});
  EXPECT_EQ(norm(b), 0.0);
}

TEST(WienerHopf, Preconditions) {
  EXPECT_THROW(solve_time_domain({Signal({1, 2, 3}), Signal({1, 2}), 1, 0.0}), PreconditionError);
  EXPECT_THROW(solve_time_domain({Signal({1, 2, 3}), Signal({1, 2, 3}), 3, 0.0}), PreconditionError);
  EXPECT_THROW(solve_frequency_domain({Signal({1, 2, 3}), Signal({1, 2, 3}), 0, -1.0}),
               PreconditionError);
  EXPECT_THROW(residual_orthogonality({Signal({1, 2, 3}), Signal({1, 2, 3}), 1, 0.0}, FirFilter({1})),
               PreconditionError);
}

}  // namespace
}  // namespace gbf
