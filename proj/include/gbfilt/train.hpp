#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <nlohmann/json.hpp>

#include "gbfilt/adam.hpp"
#include "gbfilt/model.hpp"
#include "gbfilt/signal.hpp"

namespace gbf {

/// Polynomial order p and FIR order m (m + 1 taps) of one stage.
struct StageSpec {
  std::size_t poly_order = 1;
  std::size_t fir_order = 0;

  friend bool operator==(const StageSpec&, const StageSpec&) = default;
};

enum class Algorithm { Separate, Combined };
enum class PolyInit { Identity, IdentityPerturbed };
/// Absolute: ridge is used as-is. Relative: ridge is multiplied by the mean
/// square of the filter input, which keeps the solution scale-equivariant.
enum class RidgeMode { Absolute, Relative };
enum class LrSchedule { Constant, OneCycle };

struct TrainConfig {
  std::vector<StageSpec> stages;
  Algorithm algorithm = Algorithm::Separate;
  /// Gradient steps per stage (separate) or epochs (combined). Zero means the
  /// stages keep their initial polynomials and only the FIRs are solved.
  std::size_t max_iters = 2000;
  double tolerance = 1e-7;          ///< relative loss change that counts as converged
  std::size_t convergence_window = 10;
  AdamParams adam;
  LrSchedule schedule = LrSchedule::Constant;
  double peak_lr = 0.0;             ///< one-cycle peak; 0 uses adam.learning_rate
  double ridge = 1e-8;
  RidgeMode ridge_mode = RidgeMode::Relative;
  std::uint64_t seed = 0;
  PolyInit init = PolyInit::IdentityPerturbed;
  double init_perturbation = 1e-3;  ///< half-width of the uniform noise on a_k, k >= 2
  double init_scale = 1.0;          ///< multiplies the whole initial polynomial
  /// Combined training only: stage i's gradient also sees every downstream residual.
  bool cross_stage_gradient = false;
  double divergence_factor = 1e6;

  /// Throws PreconditionError on an unusable configuration.
  void validate() const;
};

nlohmann::json config_to_json(const TrainConfig& cfg);
/// Keys not listed in config_to_json are rejected. Missing keys keep `base` values.
/// Throws ParseError naming the offending key.
TrainConfig config_from_json(const nlohmann::json& doc, TrainConfig base = {});

struct TrainReport {
  /// Cumulative training MSE after each stage.
  std::vector<double> stage_mse;
  /// Separate: one loss trace per stage. Combined: a single trace of the summed
  /// per-stage residual MSE, one entry per epoch.
  std::vector<std::vector<double>> loss_traces;
  /// Gradient steps taken, per stage (combined repeats the epoch count).
  std::vector<std::size_t> iterations;
  std::vector<bool> converged;
  double wall_seconds = 0.0;
};

struct TrainResult {
  GbfModel model;
  TrainReport report;
};

/// d|r|^2 / d a_k = -2 <r, b * x^k> with r = target - b * poly(x); b is held fixed.
std::vector<double> poly_loss_gradient(const Signal& x, const Signal& target, const Polynomial& a,
                                       const FirFilter& b);

/// Initial polynomial for stage `index` under the config's init mode and seed.
Polynomial initial_polynomial(const TrainConfig& cfg, std::size_t index);

/// Stage-wise training: each stage alternates a Wiener-Hopf solve with an AdamW
/// step on its polynomial until converged, then hands its residual on.
TrainResult train_separate(const Signal& x, const Signal& target, const TrainConfig& cfg);

/// Joint training: every epoch runs the full cascade of Wiener-Hopf solves, then
/// takes one AdamW step on all polynomials against the summed residual energy.
TrainResult train_combined(const Signal& x, const Signal& target, const TrainConfig& cfg);

/// Dispatches on cfg.algorithm.
TrainResult train(const Signal& x, const Signal& target, const TrainConfig& cfg);

}  // namespace gbf
