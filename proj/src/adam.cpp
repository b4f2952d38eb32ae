#include "gbfilt/adam.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "gbfilt/error.hpp"

namespace gbf {

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               const AdamParams& hp, double learning_rate) {
  if (grads.size() != params.size() || state.m.size() != params.size() ||
      state.v.size() != params.size()) {
    throw PreconditionError("adam_step: parameter, gradient and state sizes differ");
  }
  for (std::size_t i = 0; i < grads.size(); ++i) {
    if (!std::isfinite(grads[i])) throw NumericOverflowError("adam_step gradient", i);
  }
  const double lr = learning_rate > 0.0 ? learning_rate : hp.learning_rate;
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double bc1 = 1.0 - std::pow(hp.beta1, t);
  const double bc2 = 1.0 - std::pow(hp.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    state.m[i] = hp.beta1 * state.m[i] + (1.0 - hp.beta1) * g;
    state.v[i] = hp.beta2 * state.v[i] + (1.0 - hp.beta2) * g * g;
    const double m_hat = state.m[i] / bc1;
    const double v_hat = state.v[i] / bc2;
    params[i] -= lr * hp.weight_decay * params[i];
    params[i] -= lr * m_hat / (std::sqrt(v_hat) + hp.epsilon);
  }
}

double OneCycleSchedule::operator()(std::size_t step) const noexcept {
  const double start = peak_lr / div_factor;
  const double end = peak_lr / final_div;
  const double total = static_cast<double>(std::max<std::size_t>(total_steps, 1));
  const double warm = std::max(1.0, warmup_fraction * total);
  const double s = std::min(static_cast<double>(step), total);
  auto cosine = [](double from, double to, double frac) {
    return to + (from - to) * 0.5 * (1.0 + std::cos(std::numbers::pi * frac));
  };
  if (s < warm) return cosine(start, peak_lr, s / warm);
  return cosine(peak_lr, end, (s - warm) / std::max(1.0, total - warm));
}

}  // namespace gbf
