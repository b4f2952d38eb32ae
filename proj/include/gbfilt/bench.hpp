#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "gbfilt/model.hpp"
#include "gbfilt/signal.hpp"

namespace gbf::bench {

/// Input/output pair of equal length.
struct Dataset {
  Signal input;
  Signal target;
};

/// x(n + 1) = 0.5 x(n) + u(n) + 0.1 u(n)^2, t(n) = x(n), x(0) = 0.
Signal simulate_example1(const Signal& u);

struct Interval {
  double lo = -1.0;
  double hi = 1.0;
};

struct Example1Options {
  std::size_t n_train = 200;
  std::size_t n_val = 200;
  std::size_t n_test = 200;
  Interval train_range{-1.0, 1.0};
  Interval val_range{-2.0, 2.0};
  Interval test_range{-4.0, 4.0};
};

struct Example1Datasets {
  Dataset train;
  Dataset val;
  Dataset test;
};

/// i.i.d. uniform inputs on each split's interval, pushed through simulate_example1.
/// Each split draws from its own seeded stream.
Example1Datasets make_example1_datasets(std::uint64_t seed, const Example1Options& opts = {});

/// Ground-truth sum of Hammerstein stages with optional white Gaussian noise.
struct SyntheticHammerstein {
  std::vector<HammersteinStage> stages;
  double noise_stddev = 0.0;
};

Signal generate_hammerstein(const SyntheticHammerstein& sys, const Signal& x, std::uint64_t seed);

/// Two-stage noiseless oracle used by the identification tests and `synth hammerstein`:
/// stage 1 is (p, m) = (2, 2), stage 2 is (3, 1) with a Legendre-P3 nonlinearity.
SyntheticHammerstein default_two_stage_system();

/// Uniform i.i.d. samples on [lo, hi].
Signal uniform_signal(std::size_t n, Interval range, std::uint64_t seed);

/// Synthetic stand-in for a loudspeaker-in-a-room recording: a train of linear
/// chirps passed through tanh soft clipping, a random exponentially decaying room
/// response and additive white noise.
struct ChirpSceneParams {
  double sample_rate = 16000.0;
  std::size_t chirp_count = 7;
  std::size_t chirp_samples = 4000;  ///< 0.25 s at 16 kHz
  std::size_t gap_samples = 1600;    ///< silence after each chirp; covers the room tail
  double f_start = 100.0;            ///< Hz
  double f_end = 6000.0;             ///< Hz
  double amplitude = 0.8;
  bool clipping = true;
  double drive = 1.5;                ///< clip(x) = tanh(drive x) / drive
  bool identity_rir = false;
  std::size_t rir_length = 1600;
  std::size_t direct_delay = 16;     ///< samples before the direct-path tap
  double tail_gain = 0.3;            ///< diffuse tail amplitude relative to the direct path
  double tail_decay = 200.0;         ///< e-folding time of the tail, samples
  /// Absolute noise level; the default sits 40 dB below the clean recording of the
  /// default scene.
  double noise_stddev = 1.153e-2;
};

struct ChirpScene {
  Signal reference;  ///< what was played
  Signal recorded;   ///< what the microphone picked up
  Signal clean;      ///< recorded without noise
  FirFilter rir = FirFilter::delta(1);
  std::size_t segment_samples = 0;  ///< one chirp plus its gap
};

ChirpScene make_chirp_scene(std::uint64_t seed, const ChirpSceneParams& params = {});

/// The first chirp_count - 1 segments for training, the last one for validation.
struct ChirpSplit {
  Dataset train;
  Dataset val;
};
ChirpSplit split_chirp_scene(const ChirpScene& scene);

}  // namespace gbf::bench
