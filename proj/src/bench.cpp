#include "gbfilt/bench.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "gbfilt/error.hpp"

namespace gbf::bench {
namespace {

std::mt19937_64 stream(std::uint64_t seed, std::uint32_t tag) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), tag};
  return std::mt19937_64(seq);
}

// Stream tags keep the generators independent of each other and of call order.
enum : std::uint32_t { kTrain = 1, kVal = 2, kTest = 3, kNoise = 4, kRir = 5, kUniform = 6 };

Signal uniform_from(std::mt19937_64& rng, std::size_t n, Interval range) {
  if (!(range.lo <= range.hi) || !std::isfinite(range.lo) || !std::isfinite(range.hi)) {
    throw PreconditionError("interval bounds must be finite with lo <= hi");
  }
  std::vector<double> u(n, range.lo);
  if (range.hi > range.lo) {
    std::uniform_real_distribution<double> dist(range.lo, range.hi);
    for (auto& v : u) v = dist(rng);
  }
  return Signal(std::move(u));
}

Dataset example1_split(std::uint64_t seed, std::uint32_t tag, std::size_t n, Interval range) {
  auto rng = stream(seed, tag);
  Signal u = uniform_from(rng, n, range);
  Signal t = simulate_example1(u);
  return {std::move(u), std::move(t)};
}

}  // namespace

Signal simulate_example1(const Signal& u) {
  if (u.empty()) throw PreconditionError("simulate_example1: empty input");
  std::vector<double> t(u.size());
  double state = 0.0;
  for (std::size_t n = 0; n < u.size(); ++n) {
    t[n] = state;
    state = 0.5 * state + u[n] + 0.1 * u[n] * u[n];
  }
  return Signal(std::move(t));
}

Example1Datasets make_example1_datasets(std::uint64_t seed, const Example1Options& opts) {
  return {example1_split(seed, kTrain, opts.n_train, opts.train_range),
          example1_split(seed, kVal, opts.n_val, opts.val_range),
          example1_split(seed, kTest, opts.n_test, opts.test_range)};
}

Signal uniform_signal(std::size_t n, Interval range, std::uint64_t seed) {
  auto rng = stream(seed, kUniform);
  return uniform_from(rng, n, range);
}

Signal generate_hammerstein(const SyntheticHammerstein& sys, const Signal& x, std::uint64_t seed) {
  if (sys.stages.empty()) throw PreconditionError("synthetic system has no stages");
  if (!(sys.noise_stddev >= 0.0)) throw PreconditionError("noise level must be non-negative");
  std::vector<double> y = model_forward(GbfModel(sys.stages), x).vec();
  if (sys.noise_stddev > 0.0) {
    auto rng = stream(seed, kNoise);
    std::normal_distribution<double> noise(0.0, sys.noise_stddev);
    for (auto& v : y) v += noise(rng);
  }
  return Signal(std::move(y), x.sample_rate());
}

SyntheticHammerstein default_two_stage_system() {
  // 0.5 * P3(x) = 0.5 * (5x^3 - 3x) / 2 is orthogonal to 1, x, x^2 under U[-1, 1].
  return {{{Polynomial({0.0, 1.0, 0.3}), FirFilter({1.0, 0.5, 0.25})},
           {Polynomial({0.0, -0.75, 0.0, 1.25}), FirFilter({0.3, -0.2})}},
          0.0};
}

ChirpScene make_chirp_scene(std::uint64_t seed, const ChirpSceneParams& p) {
  if (p.chirp_count == 0 || p.chirp_samples == 0) throw PreconditionError("empty chirp scene");
  if (!(p.sample_rate > 0.0)) throw PreconditionError("sample rate must be positive");
  if (p.rir_length == 0 || p.direct_delay >= p.rir_length) {
    throw PreconditionError("room response must be longer than the direct-path delay");
  }

  const std::size_t segment = p.chirp_samples + p.gap_samples;
  const std::size_t total = segment * p.chirp_count;
  const double duration = static_cast<double>(p.chirp_samples) / p.sample_rate;
  const double sweep = (p.f_end - p.f_start) / duration;

  std::vector<double> ref(total, 0.0);
  for (std::size_t c = 0; c < p.chirp_count; ++c) {
    for (std::size_t i = 0; i < p.chirp_samples; ++i) {
      const double t = static_cast<double>(i) / p.sample_rate;
      const double phase = 2.0 * std::numbers::pi * (p.f_start * t + 0.5 * sweep * t * t);
      ref[c * segment + i] = p.amplitude * std::sin(phase);
    }
  }

  std::vector<double> h(p.identity_rir ? 1 : p.rir_length, 0.0);
  if (p.identity_rir) {
    h[0] = 1.0;
  } else {
    auto rng = stream(seed, kRir);
    std::normal_distribution<double> gauss(0.0, 1.0);
    h[p.direct_delay] = 1.0;
    for (std::size_t n = p.direct_delay + 1; n < h.size(); ++n) {
      const double age = static_cast<double>(n - p.direct_delay);
      h[n] = p.tail_gain * gauss(rng) * std::exp(-age / p.tail_decay);
    }
  }

  Signal reference(std::move(ref), p.sample_rate);
  std::vector<double> driven(reference.vec());
  if (p.clipping) {
    for (auto& v : driven) v = std::tanh(p.drive * v) / p.drive;
  }
  FirFilter rir(std::move(h));
  Signal clean = fir_apply(rir, Signal(std::move(driven), p.sample_rate));

  std::vector<double> rec(clean.vec());
  if (p.noise_stddev > 0.0) {
    auto rng = stream(seed, kNoise);
    std::normal_distribution<double> noise(0.0, p.noise_stddev);
    for (auto& v : rec) v += noise(rng);
  }
  return {std::move(reference), Signal(std::move(rec), p.sample_rate), std::move(clean),
          std::move(rir), segment};
}

ChirpSplit split_chirp_scene(const ChirpScene& scene) {
  if (scene.segment_samples == 0 || scene.reference.size() < 2 * scene.segment_samples) {
    throw PreconditionError("chirp scene needs at least two segments to split");
  }
  const std::size_t cut = scene.reference.size() - scene.segment_samples;
  auto slice = [](const Signal& s, std::size_t from, std::size_t to) {
    return Signal(std::vector<double>(s.begin() + static_cast<std::ptrdiff_t>(from),
                                      s.begin() + static_cast<std::ptrdiff_t>(to)),
                  s.sample_rate());
  };
  const std::size_t n = scene.reference.size();
  return {{slice(scene.reference, 0, cut), slice(scene.recorded, 0, cut)},
          {slice(scene.reference, cut, n), slice(scene.recorded, cut, n)}};
}

}  // namespace gbf::bench
