#include "gbfilt/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "gbfilt/error.hpp"
#include "gbfilt/fft.hpp"
#include "gbfilt/wiener_hopf.hpp"

namespace gbf {
namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

double mean_square(std::span<const double> v) {
  return std::inner_product(v.begin(), v.end(), v.begin(), 0.0) / static_cast<double>(v.size());
}

/// Wiener-Hopf fit of one stage for a fixed polynomial.
struct StageFit {
  FirFilter fir = FirFilter::zeros(1);
  std::vector<double> residual;
  double mse = 0.0;
};

StageFit fit_stage(const Signal& x, const Signal& target, const Polynomial& poly,
                   std::size_t fir_order, const TrainConfig& cfg) {
  Signal z = poly_transform(x, poly);
  const double ridge =
      cfg.ridge_mode == RidgeMode::Relative ? cfg.ridge * mean_square(z.samples()) : cfg.ridge;
  if (!std::isfinite(ridge)) throw NumericOverflowError("relative ridge", 0);
  StageFit fit;
  fit.fir = solve_wiener_hopf(WienerHopfProblem{z, target, fir_order, ridge});
  const Signal y = fir_apply(fit.fir, z);
  fit.residual.resize(target.size());
  for (std::size_t n = 0; n < target.size(); ++n) fit.residual[n] = target[n] - y[n];
  fit.mse = mean_square(fit.residual);
  return fit;
}

/// g_k = -2 sum_i q(i) x(i)^k where q(i) = sum_j b_j r(i + j).
std::vector<double> gradient_from_residual(const Signal& x, std::span<const double> residual,
                                           std::size_t poly_order, const FirFilter& b) {
  const std::size_t n = x.size();
  std::vector<double> q;
  if (b.size() <= 48) {
    q.assign(n, 0.0);
    const auto taps = b.taps();
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t jmax = std::min(taps.size(), n - i);
      double acc = 0.0;
      for (std::size_t j = 0; j < jmax; ++j) acc += taps[j] * residual[i + j];
      q[i] = acc;
    }
  } else {
    q = fft::correlate(residual, b.taps(), n - 1);
  }
  std::vector<double> g(poly_order + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double power = 1.0;
    for (std::size_t k = 0; k <= poly_order; ++k) {
      g[k] += q[i] * power;
      power *= x[i];
    }
  }
  for (auto& v : g) v *= -2.0;
  check_finite(g, "poly_loss_gradient");
  return g;
}

void require_training_data(const Signal& x, const Signal& target, const TrainConfig& cfg) {
  cfg.validate();
  if (x.size() != target.size()) {
    throw PreconditionError("input has " + std::to_string(x.size()) + " samples but target has " +
                            std::to_string(target.size()));
  }
  for (const auto& s : cfg.stages) {
    if (x.size() <= s.fir_order) {
      throw PreconditionError("training data (" + std::to_string(x.size()) +
                              " samples) must be longer than the FIR order " +
                              std::to_string(s.fir_order));
    }
  }
}

/// Relative change of the loss across the trailing window.
bool has_converged(const std::vector<double>& trace, const TrainConfig& cfg) {
  const std::size_t w = cfg.convergence_window;
  if (trace.size() <= w) return false;
  const double before = trace[trace.size() - 1 - w];
  const double now = trace.back();
  const double scale = std::max(std::abs(before), std::numeric_limits<double>::min());
  return std::abs(before - now) / scale < cfg.tolerance;
}

/// `initial` is floored at the target's mean square so an exact initial fit does
/// not turn round-off into a divergence.
void check_divergence(double loss, double initial, const TrainConfig& cfg) {
  if (!std::isfinite(loss) || (initial > 0.0 && loss > cfg.divergence_factor * initial)) {
    throw DivergenceError("training loss diverged (" + std::to_string(loss) + " vs initial " +
                          std::to_string(initial) + "); lower the learning rate");
  }
}

double learning_rate(const TrainConfig& cfg, std::size_t step) {
  if (cfg.schedule == LrSchedule::OneCycle) {
    OneCycleSchedule s;
    s.peak_lr = cfg.peak_lr > 0.0 ? cfg.peak_lr : cfg.adam.learning_rate;
    s.total_steps = cfg.max_iters;
    return s(step);
  }
  return cfg.adam.learning_rate;
}

/// Overflow during optimisation means the step size pushed the polynomial too far.
template <typename F>
auto guard_divergence(F&& f) {
  try {
    return f();
  } catch (const NumericOverflowError& e) {
    throw DivergenceError(std::string(e.what()) + " during training; lower the learning rate");
  }
}

json algorithm_name(Algorithm a) { return a == Algorithm::Separate ? "separate" : "combined"; }

template <typename Enum>
Enum parse_enum(const json& v, const std::string& key,
                std::initializer_list<std::pair<const char*, Enum>> options) {
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    for (const auto& [name, value] : options) {
      if (s == name) return value;
    }
  }
  std::string allowed;
  for (const auto& [name, value] : options) allowed += std::string(allowed.empty() ? "" : ", ") + name;
  throw ParseError(key, "expected one of: " + allowed);
}

double get_number(const json& v, const std::string& key) {
  if (!v.is_number()) throw ParseError(key, "expected a number");
  return v.get<double>();
}

std::size_t get_count(const json& v, const std::string& key) {
  if (!v.is_number_unsigned()) throw ParseError(key, "expected a non-negative integer");
  return v.get<std::size_t>();
}

}  // namespace

void TrainConfig::validate() const {
  if (stages.empty()) throw PreconditionError("at least one stage is required");
  if (!(adam.learning_rate > 0.0)) throw PreconditionError("learning rate must be positive");
  if (!(tolerance > 0.0)) throw PreconditionError("tolerance must be positive");
  if (convergence_window == 0) throw PreconditionError("convergence window must be positive");
  if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0) || !(adam.beta2 >= 0.0 && adam.beta2 < 1.0)) {
    throw PreconditionError("Adam betas must lie in [0, 1)");
  }
  if (!(adam.epsilon > 0.0)) throw PreconditionError("Adam epsilon must be positive");
  if (!(adam.weight_decay >= 0.0)) throw PreconditionError("weight decay must be non-negative");
  if (!(ridge >= 0.0) || !std::isfinite(ridge)) throw PreconditionError("ridge must be non-negative");
  if (!(peak_lr >= 0.0)) throw PreconditionError("peak learning rate must be non-negative");
  if (!(init_perturbation >= 0.0)) throw PreconditionError("init perturbation must be non-negative");
  if (!(init_scale != 0.0) || !std::isfinite(init_scale)) {
    throw PreconditionError("init scale must be finite and non-zero");
  }
  if (!(divergence_factor > 1.0)) throw PreconditionError("divergence factor must exceed 1");
}

json config_to_json(const TrainConfig& cfg) {
  json stages = json::array();
  for (const auto& s : cfg.stages) stages.push_back({{"p", s.poly_order}, {"m", s.fir_order}});
  return {{"stages", stages},
          {"algorithm", algorithm_name(cfg.algorithm)},
          {"max_iters", cfg.max_iters},
          {"tolerance", cfg.tolerance},
          {"convergence_window", cfg.convergence_window},
          {"learning_rate", cfg.adam.learning_rate},
          {"beta1", cfg.adam.beta1},
          {"beta2", cfg.adam.beta2},
          {"epsilon", cfg.adam.epsilon},
          {"weight_decay", cfg.adam.weight_decay},
          {"schedule", cfg.schedule == LrSchedule::Constant ? "constant" : "one-cycle"},
          {"peak_lr", cfg.peak_lr},
          {"ridge", cfg.ridge},
          {"ridge_mode", cfg.ridge_mode == RidgeMode::Relative ? "relative" : "absolute"},
          {"seed", cfg.seed},
          {"init", cfg.init == PolyInit::Identity ? "identity" : "identity-perturbed"},
          {"init_perturbation", cfg.init_perturbation},
          {"init_scale", cfg.init_scale},
          {"cross_stage_gradient", cfg.cross_stage_gradient},
          {"divergence_factor", cfg.divergence_factor}};
}

TrainConfig config_from_json(const json& doc, TrainConfig cfg) {
  if (!doc.is_object()) throw ParseError("", "config must be a JSON object");
  for (const auto& [key, v] : doc.items()) {
    if (key == "stages") {
      if (!v.is_array()) throw ParseError(key, "expected an array");
      cfg.stages.clear();
      for (std::size_t i = 0; i < v.size(); ++i) {
        const std::string path = "stages[" + std::to_string(i) + "]";
        const json& s = v[i];
        if (s.is_array() && s.size() == 2) {
          cfg.stages.push_back({get_count(s[0], path + "[0]"), get_count(s[1], path + "[1]")});
        } else if (s.is_object() && s.contains("p") && s.contains("m")) {
          cfg.stages.push_back({get_count(s["p"], path + ".p"), get_count(s["m"], path + ".m")});
        } else {
          throw ParseError(path, "expected {\"p\": .., \"m\": ..} or [p, m]");
        }
      }
    } else if (key == "algorithm") {
      cfg.algorithm = parse_enum<Algorithm>(
          v, key, {{"separate", Algorithm::Separate}, {"combined", Algorithm::Combined}});
    } else if (key == "max_iters") {
      cfg.max_iters = get_count(v, key);
    } else if (key == "tolerance") {
      cfg.tolerance = get_number(v, key);
    } else if (key == "convergence_window") {
      cfg.convergence_window = get_count(v, key);
    } else if (key == "learning_rate") {
      cfg.adam.learning_rate = get_number(v, key);
    } else if (key == "beta1") {
      cfg.adam.beta1 = get_number(v, key);
    } else if (key == "beta2") {
      cfg.adam.beta2 = get_number(v, key);
    } else if (key == "epsilon") {
      cfg.adam.epsilon = get_number(v, key);
    } else if (key == "weight_decay") {
      cfg.adam.weight_decay = get_number(v, key);
    } else if (key == "schedule") {
      cfg.schedule = parse_enum<LrSchedule>(
          v, key, {{"constant", LrSchedule::Constant}, {"one-cycle", LrSchedule::OneCycle}});
    } else if (key == "peak_lr") {
      cfg.peak_lr = get_number(v, key);
    } else if (key == "ridge") {
      cfg.ridge = get_number(v, key);
    } else if (key == "ridge_mode") {
      cfg.ridge_mode = parse_enum<RidgeMode>(
          v, key, {{"relative", RidgeMode::Relative}, {"absolute", RidgeMode::Absolute}});
    } else if (key == "seed") {
      if (!v.is_number_unsigned()) throw ParseError(key, "expected a non-negative integer");
      cfg.seed = v.get<std::uint64_t>();
    } else if (key == "init") {
      cfg.init = parse_enum<PolyInit>(
          v, key, {{"identity", PolyInit::Identity}, {"identity-perturbed", PolyInit::IdentityPerturbed}});
    } else if (key == "init_perturbation") {
      cfg.init_perturbation = get_number(v, key);
    } else if (key == "init_scale") {
      cfg.init_scale = get_number(v, key);
    } else if (key == "cross_stage_gradient") {
      if (!v.is_boolean()) throw ParseError(key, "expected true or false");
      cfg.cross_stage_gradient = v.get<bool>();
    } else if (key == "divergence_factor") {
      cfg.divergence_factor = get_number(v, key);
    } else {
      throw ParseError(key, "unknown config key");
    }
  }
  return cfg;
}

std::vector<double> poly_loss_gradient(const Signal& x, const Signal& target, const Polynomial& a,
                                       const FirFilter& b) {
  if (x.empty()) throw PreconditionError("poly_loss_gradient: empty input");
  if (x.size() != target.size()) {
    throw PreconditionError("poly_loss_gradient: input has " + std::to_string(x.size()) +
                            " samples but target has " + std::to_string(target.size()));
  }
  const Signal y = fir_apply(b, poly_transform(x, a));
  std::vector<double> r(x.size());
  for (std::size_t n = 0; n < r.size(); ++n) r[n] = target[n] - y[n];
  return gradient_from_residual(x, r, a.order(), b);
}

Polynomial initial_polynomial(const TrainConfig& cfg, std::size_t index) {
  const std::size_t order = cfg.stages.at(index).poly_order;
  std::vector<double> c(order + 1, 0.0);
  c[order == 0 ? 0 : 1] = 1.0;
  if (cfg.init == PolyInit::IdentityPerturbed && order >= 2) {
    std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32),
                      static_cast<std::uint32_t>(index)};
    std::mt19937_64 rng(seq);
    std::uniform_real_distribution<double> u(-cfg.init_perturbation, cfg.init_perturbation);
    for (std::size_t k = 2; k <= order; ++k) c[k] = u(rng);
  }
  for (auto& v : c) v *= cfg.init_scale;
  return Polynomial(std::move(c));
}

TrainResult train_separate(const Signal& x, const Signal& target, const TrainConfig& cfg) {
  require_training_data(x, target, cfg);
  const auto started = Clock::now();

  std::vector<HammersteinStage> stages;
  TrainReport report;
  Signal stage_target = target;

  for (std::size_t i = 0; i < cfg.stages.size(); ++i) {
    const std::size_t m = cfg.stages[i].fir_order;
    Polynomial poly = initial_polynomial(cfg, i);
    std::vector<double> coeffs(poly.coeffs().begin(), poly.coeffs().end());
    AdamState adam(coeffs.size());

    StageFit fit = fit_stage(x, stage_target, poly, m, cfg);
    const double initial = std::max(fit.mse, mean_square(stage_target.samples()));
    std::vector<double> trace{fit.mse};
    HammersteinStage best{poly, fit.fir};
    StageFit best_fit = fit;
    bool converged = false;
    std::size_t steps = 0;

    while (steps < cfg.max_iters) {
      guard_divergence([&] {
        const auto grad = gradient_from_residual(x, fit.residual, poly.order(), fit.fir);
        adam_step(coeffs, grad, adam, cfg.adam, learning_rate(cfg, steps));
      });
      ++steps;
      poly = guard_divergence([&] { return Polynomial(coeffs); });
      fit = guard_divergence([&] { return fit_stage(x, stage_target, poly, m, cfg); });
      check_divergence(fit.mse, initial, cfg);
      trace.push_back(fit.mse);
      if (fit.mse < best_fit.mse) {
        best = {poly, fit.fir};
        best_fit = fit;
      }
      if (has_converged(trace, cfg)) {
        converged = true;
        break;
      }
    }

    stages.push_back(std::move(best));
    report.stage_mse.push_back(best_fit.mse);
    report.loss_traces.push_back(std::move(trace));
    report.iterations.push_back(steps);
    report.converged.push_back(converged);
    stage_target = Signal(std::move(best_fit.residual), target.sample_rate());
  }

  report.wall_seconds = std::chrono::duration<double>(Clock::now() - started).count();
  ModelMetadata meta{config_to_json(cfg), report.stage_mse};
  return {GbfModel(std::move(stages), std::move(meta)), std::move(report)};
}

TrainResult train_combined(const Signal& x, const Signal& target, const TrainConfig& cfg) {
  require_training_data(x, target, cfg);
  const auto started = Clock::now();
  const std::size_t count = cfg.stages.size();

  // All polynomial coefficients live in one vector so a single Adam state
  // covers the joint step; offsets[i] marks where stage i begins.
  std::vector<double> params;
  std::vector<std::size_t> offsets;
  for (std::size_t i = 0; i < count; ++i) {
    offsets.push_back(params.size());
    const auto init = initial_polynomial(cfg, i);
    params.insert(params.end(), init.coeffs().begin(), init.coeffs().end());
  }
  offsets.push_back(params.size());
  auto poly_of = [&](const std::vector<double>& p, std::size_t i) {
    return Polynomial(std::vector<double>(p.begin() + static_cast<std::ptrdiff_t>(offsets[i]),
                                          p.begin() + static_cast<std::ptrdiff_t>(offsets[i + 1])));
  };
  auto cascade = [&](const std::vector<double>& p) {
    std::vector<StageFit> fits;
    Signal t = target;
    for (std::size_t i = 0; i < count; ++i) {
      fits.push_back(fit_stage(x, t, poly_of(p, i), cfg.stages[i].fir_order, cfg));
      t = Signal(fits.back().residual, target.sample_rate());
    }
    return fits;
  };
  auto objective = [](const std::vector<StageFit>& fits) {
    double s = 0.0;
    for (const auto& f : fits) s += f.mse;
    return s;
  };

  std::vector<StageFit> fits = cascade(params);
  const double initial = objective(fits);
  std::vector<double> trace{initial};
  std::vector<double> best_params = params;
  double best_loss = initial;
  bool converged = false;
  std::size_t epochs = 0;
  AdamState adam(params.size());

  while (epochs < cfg.max_iters) {
    std::vector<double> grad;
    grad.reserve(params.size());
    std::vector<double> downstream(x.size(), 0.0);
    std::vector<std::vector<double>> stage_grads(count);
    // Walk backwards so `downstream` holds sum_{j >= i} r_j when reaching stage i.
    for (std::size_t i = count; i-- > 0;) {
      const auto& r = fits[i].residual;
      if (cfg.cross_stage_gradient) {
        for (std::size_t n = 0; n < r.size(); ++n) downstream[n] += r[n];
      }
      stage_grads[i] = guard_divergence([&] {
        return gradient_from_residual(x, cfg.cross_stage_gradient ? downstream : r,
                                      cfg.stages[i].poly_order, fits[i].fir);
      });
    }
    for (const auto& g : stage_grads) grad.insert(grad.end(), g.begin(), g.end());

    guard_divergence([&] { adam_step(params, grad, adam, cfg.adam, learning_rate(cfg, epochs)); });
    ++epochs;
    fits = guard_divergence([&] { return cascade(params); });
    const double loss = objective(fits);
    check_divergence(loss, std::max(initial, mean_square(target.samples())), cfg);
    trace.push_back(loss);
    if (loss < best_loss) {
      best_loss = loss;
      best_params = params;
    }
    if (has_converged(trace, cfg)) {
      converged = true;
      break;
    }
  }

  fits = cascade(best_params);
  std::vector<HammersteinStage> stages;
  TrainReport report;
  for (std::size_t i = 0; i < count; ++i) {
    stages.push_back({poly_of(best_params, i), fits[i].fir});
    report.stage_mse.push_back(fits[i].mse);
    report.iterations.push_back(epochs);
    report.converged.push_back(converged);
  }
  report.loss_traces.push_back(std::move(trace));
  report.wall_seconds = std::chrono::duration<double>(Clock::now() - started).count();
  ModelMetadata meta{config_to_json(cfg), report.stage_mse};
  return {GbfModel(std::move(stages), std::move(meta)), std::move(report)};
}

TrainResult train(const Signal& x, const Signal& target, const TrainConfig& cfg) {
  return cfg.algorithm == Algorithm::Separate ? train_separate(x, target, cfg)
                                              : train_combined(x, target, cfg);
}

}  // namespace gbf
