#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace gbf {

struct AdamParams {
  double learning_rate = 1e-2;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 1e-4;  ///< decoupled, scaled by the learning rate
};

/// First and second moment estimates plus the step counter.
struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::uint64_t step = 0;

  explicit AdamState(std::size_t n = 0) : m(n, 0.0), v(n, 0.0) {}
};

/// One AdamW update in place:
///   m <- b1 m + (1 - b1) g,  v <- b2 v + (1 - b2) g^2
///   p <- p - lr wd p - lr m_hat / (sqrt(v_hat) + eps)
/// `learning_rate` overrides hp.learning_rate (for schedules) when positive.
/// Throws PreconditionError on shape mismatch and NumericOverflowError on a
/// non-finite gradient, naming the parameter index.
void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               const AdamParams& hp, double learning_rate = -1.0);

/// One-cycle schedule: cosine warm-up from peak/div_factor to peak over the first
/// `warmup_fraction` of `total_steps`, then cosine annealing to peak/final_div.
struct OneCycleSchedule {
  double peak_lr = 1e-2;
  std::size_t total_steps = 1000;
  double warmup_fraction = 0.3;
  double div_factor = 25.0;
  double final_div = 1e4;

  double operator()(std::size_t step) const noexcept;
};

}  // namespace gbf
