#include "cli.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "gbfilt/bench.hpp"
#include "gbfilt/error.hpp"
#include "gbfilt/io.hpp"
#include "gbfilt/metrics.hpp"
#include "gbfilt/model.hpp"
#include "gbfilt/train.hpp"

namespace gbf::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

/// Failure with a chosen exit code and a message for the error stream.
struct Failure {
  int code;
  std::string message;
};

std::vector<StageSpec> parse_stage_list(const std::string& text) {
  std::vector<StageSpec> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto colon = item.find(':');
    StageSpec spec;
    auto parse = [&](std::string_view s, std::size_t& v) {
      const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      return ec == std::errc() && p == s.data() + s.size() && !s.empty();
    };
    const std::string_view sv(item);
    if (colon == std::string::npos || !parse(sv.substr(0, colon), spec.poly_order) ||
        !parse(sv.substr(colon + 1), spec.fir_order)) {
      throw ParseError("--stages", "expected p:m pairs like 1:24,2:16, got '" + item + "'");
    }
    out.push_back(spec);
  }
  if (out.empty()) throw ParseError("--stages", "no stages given");
  return out;
}

io::SignalFile read_signal_or_fail(const std::string& path) {
  try {
    return io::read_signal(path);
  } catch (const Error& e) {
    throw Failure{kBadData, e.what()};
  }
}

GbfModel load_model_or_fail(const std::string& path) {
  try {
    return load_model(path);
  } catch (const Error& e) {
    throw Failure{kBadConfig, "model '" + path + "': " + e.what()};
  }
}

std::string format_report(const GbfModel& model, const TrainReport& report) {
  std::string csv = "stage,p,m,mse,iterations,converged\n";
  for (std::size_t i = 0; i < model.size(); ++i) {
    csv += std::to_string(i + 1) + "," + std::to_string(model.stage(i).poly_order()) + "," +
           std::to_string(model.stage(i).fir_order()) + "," + io::format_double(report.stage_mse[i]) +
           "," + std::to_string(report.iterations[i]) + "," +
           (report.converged[i] ? "true" : "false") + "\n";
  }
  return csv;
}

std::string format_traces(const TrainReport& report) {
  std::string csv = "trace,iteration,loss\n";
  for (std::size_t s = 0; s < report.loss_traces.size(); ++s) {
    for (std::size_t i = 0; i < report.loss_traces[s].size(); ++i) {
      csv += std::to_string(s + 1) + "," + std::to_string(i) + "," +
             io::format_double(report.loss_traces[s][i]) + "\n";
    }
  }
  return csv;
}

// ---------------------------------------------------------------------------
// train

struct TrainOptions {
  std::string input, target, config, out, report, trace;
  std::string stages, algorithm, schedule, ridge_mode, init;
  std::size_t max_iters = 0, window = 0;
  double tol = 0, lr = 0, beta1 = 0, beta2 = 0, adam_eps = 0, weight_decay = 0, peak_lr = 0;
  double ridge = 0, init_scale = 0, init_perturbation = 0;
  std::uint64_t seed = 0;
  bool cross_stage = false;
};

void add_train(CLI::App& app, TrainOptions& o) {
  app.add_option("--input,-x", o.input, "Input signal (CSV or WAV)")->required();
  app.add_option("--target,-t", o.target, "Target signal (CSV or WAV)")->required();
  app.add_option("--out,-o", o.out, "Model file to write")->required();
  app.add_option("--config", o.config, "JSON training config; flags override it");
  app.add_option("--report", o.report, "Per-stage MSE report (CSV); default <out>.report.csv");
  app.add_option("--trace", o.trace, "Per-iteration loss traces (CSV)");
  app.add_option("--stages", o.stages, "Stage orders as p:m pairs, e.g. 1:24,2:16,2:8");
  app.add_option("--algorithm", o.algorithm, "separate | combined")
      ->check(CLI::IsMember({"separate", "combined"}));
  app.add_option("--max-iters", o.max_iters, "Gradient steps per stage (separate) or epochs (combined)");
  app.add_option("--tol", o.tol, "Relative loss change treated as converged");
  app.add_option("--window", o.window, "Iterations spanned by the convergence test");
  app.add_option("--lr", o.lr, "AdamW learning rate");
  app.add_option("--beta1", o.beta1, "AdamW beta1");
  app.add_option("--beta2", o.beta2, "AdamW beta2");
  app.add_option("--adam-eps", o.adam_eps, "AdamW epsilon");
  app.add_option("--weight-decay", o.weight_decay, "Decoupled weight decay on polynomial coefficients");
  app.add_option("--schedule", o.schedule, "constant | one-cycle")
      ->check(CLI::IsMember({"constant", "one-cycle"}));
  app.add_option("--peak-lr", o.peak_lr, "Peak learning rate of the one-cycle schedule");
  app.add_option("--ridge", o.ridge, "Wiener-Hopf ridge strength");
  app.add_option("--ridge-mode", o.ridge_mode, "relative | absolute")
      ->check(CLI::IsMember({"relative", "absolute"}));
  app.add_option("--seed", o.seed, "Seed for polynomial initialisation");
  app.add_option("--init", o.init, "identity | identity-perturbed")
      ->check(CLI::IsMember({"identity", "identity-perturbed"}));
  app.add_option("--init-scale", o.init_scale, "Scale applied to the initial polynomials");
  app.add_option("--init-perturbation", o.init_perturbation, "Half-width of the init noise on a_k, k >= 2");
  app.add_flag("--cross-stage-grad", o.cross_stage, "Combined training: include downstream residuals");
}

TrainConfig build_config(const CLI::App& app, const TrainOptions& o) {
  TrainConfig cfg;
  cfg.stages = {{1, 24}, {2, 16}, {2, 8}};
  if (!o.config.empty()) {
    std::ifstream in(o.config);
    if (!in) throw ParseError("--config", "cannot open '" + o.config + "'");
    json doc;
    try {
      doc = json::parse(in);
    } catch (const json::parse_error& e) {
      throw ParseError("--config", std::string("malformed JSON: ") + e.what());
    }
    cfg = config_from_json(doc, cfg);
  }
  auto given = [&](const char* name) { return app.get_option(name)->count() > 0; };
  json overrides = json::object();
  if (given("--algorithm")) overrides["algorithm"] = o.algorithm;
  if (given("--schedule")) overrides["schedule"] = o.schedule;
  if (given("--ridge-mode")) overrides["ridge_mode"] = o.ridge_mode;
  if (given("--init")) overrides["init"] = o.init;
  cfg = config_from_json(overrides, cfg);
  if (given("--stages")) cfg.stages = parse_stage_list(o.stages);
  if (given("--max-iters")) cfg.max_iters = o.max_iters;
  if (given("--tol")) cfg.tolerance = o.tol;
  if (given("--window")) cfg.convergence_window = o.window;
  if (given("--lr")) cfg.adam.learning_rate = o.lr;
  if (given("--beta1")) cfg.adam.beta1 = o.beta1;
  if (given("--beta2")) cfg.adam.beta2 = o.beta2;
  if (given("--adam-eps")) cfg.adam.epsilon = o.adam_eps;
  if (given("--weight-decay")) cfg.adam.weight_decay = o.weight_decay;
  if (given("--peak-lr")) cfg.peak_lr = o.peak_lr;
  if (given("--ridge")) cfg.ridge = o.ridge;
  if (given("--seed")) cfg.seed = o.seed;
  if (given("--init-scale")) cfg.init_scale = o.init_scale;
  if (given("--init-perturbation")) cfg.init_perturbation = o.init_perturbation;
  if (o.cross_stage) cfg.cross_stage_gradient = true;
  cfg.validate();
  return cfg;
}

int cmd_train(const CLI::App& app, const TrainOptions& o, std::ostream& out) {
  TrainConfig cfg;
  try {
    cfg = build_config(app, o);
  } catch (const Error& e) {
    throw Failure{kBadConfig, std::string("config: ") + e.what()};
  }
  const auto x = read_signal_or_fail(o.input);
  const auto t = read_signal_or_fail(o.target);
  if (x.signal.size() != t.signal.size()) {
    throw Failure{kBadData, "input has " + std::to_string(x.signal.size()) +
                                " samples but target has " + std::to_string(t.signal.size())};
  }

  TrainResult result;
  try {
    result = train(x.signal, t.signal, cfg);
  } catch (const PreconditionError& e) {
    throw Failure{kBadData, e.what()};
  } catch (const Error& e) {
    throw Failure{kTrainFailed, std::string("training failed: ") + e.what()};
  }

  std::ostringstream model_text;
  save_model(result.model, model_text);
  const std::string report_path = o.report.empty() ? o.out + ".report.csv" : o.report;
  io::write_file_atomic(o.out, model_text.str());
  io::write_file_atomic(report_path, format_report(result.model, result.report));
  if (!o.trace.empty()) io::write_file_atomic(o.trace, format_traces(result.report));

  for (std::size_t i = 0; i < result.report.stage_mse.size(); ++i) {
    out << "stage " << (i + 1) << ": mse " << io::format_double(result.report.stage_mse[i])
        << " after " << result.report.iterations[i] << " iterations"
        << (result.report.converged[i] ? " (converged)" : "") << '\n';
  }
  out << "wrote " << o.out << " and " << report_path << " in " << result.report.wall_seconds
      << " s\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// predict / eval

struct PredictOptions {
  std::string model, input, out;
};

int cmd_predict(const PredictOptions& o, std::ostream& out) {
  const auto model = load_model_or_fail(o.model);
  auto file = read_signal_or_fail(o.input);
  Signal y;
  try {
    y = model_forward(model, file.signal);
  } catch (const Error& e) {
    throw Failure{kBadData, e.what()};
  }
  file.signal = std::move(y);
  io::write_signal(o.out, file);
  out << "wrote " << file.signal.size() << " samples to " << o.out << '\n';
  return kOk;
}

struct EvalOptions {
  std::string model, input, target;
};

int cmd_eval(const EvalOptions& o, std::ostream& out) {
  const auto model = load_model_or_fail(o.model);
  const auto x = read_signal_or_fail(o.input);
  const auto t = read_signal_or_fail(o.target);
  if (x.signal.size() != t.signal.size()) {
    throw Failure{kBadData, "input has " + std::to_string(x.signal.size()) +
                                " samples but target has " + std::to_string(t.signal.size())};
  }
  json report;
  try {
    const auto cumulative = model_forward_cumulative(model, x.signal);
    std::vector<double> stage_mse;
    for (const auto& y : cumulative) stage_mse.push_back(mse(y, t.signal));
    report = {{"samples", x.signal.size()},
              {"mse", mse(cumulative.back(), t.signal)},
              {"nmse", nmse(cumulative.back(), t.signal)},
              {"stage_cumulative_mse", stage_mse}};
  } catch (const Error& e) {
    throw Failure{kBadData, e.what()};
  }
  out << report.dump(2) << '\n';
  return kOk;
}

// ---------------------------------------------------------------------------
// synth

struct SynthOptions {
  std::string which;
  std::uint64_t seed = 0;
  std::string out_dir = ".";
  std::string format = "csv";
  std::size_t n_train = 200, n_val = 200, n_test = 200;
  std::size_t length = 4000;
  double noise = 0.0;
  std::vector<double> input_range{-1.0, 1.0};
  std::string system;
};

std::string ext_for(const std::string& format) { return format == "csv" ? ".csv" : ".wav"; }

io::SignalFormat format_for(const std::string& format) {
  if (format == "wav16") return io::SignalFormat::WavPcm16;
  if (format == "wav32") return io::SignalFormat::WavFloat32;
  return io::SignalFormat::Csv;
}

int cmd_synth(const SynthOptions& o, std::ostream& out) {
  std::vector<std::pair<std::string, io::SignalFile>> files;
  const auto fmt = format_for(o.format);
  const std::string ext = ext_for(o.format);
  auto add = [&](const std::string& name, const Signal& s) {
    const auto rate = s.sample_rate().value_or(16000.0);
    files.push_back({name + ext, io::SignalFile{s, fmt, static_cast<std::uint32_t>(rate)}});
  };

  if (o.which == "example1") {
    bench::Example1Options opts;
    opts.n_train = o.n_train;
    opts.n_val = o.n_val;
    opts.n_test = o.n_test;
    if (o.n_train == 0 || o.n_val == 0 || o.n_test == 0) {
      throw Failure{kBadConfig, "split sizes must be positive"};
    }
    const auto d = bench::make_example1_datasets(o.seed, opts);
    add("example1_train_input", d.train.input);
    add("example1_train_target", d.train.target);
    add("example1_val_input", d.val.input);
    add("example1_val_target", d.val.target);
    add("example1_test_input", d.test.input);
    add("example1_test_target", d.test.target);
  } else if (o.which == "hammerstein") {
    if (o.length == 0 || o.input_range.size() != 2 || !(o.input_range[0] <= o.input_range[1])) {
      throw Failure{kBadConfig, "need a positive --length and --input-range lo,hi with lo <= hi"};
    }
    auto sys = bench::default_two_stage_system();
    if (!o.system.empty()) sys.stages = load_model_or_fail(o.system).stages();
    sys.noise_stddev = o.noise;
    if (!(o.noise >= 0.0)) throw Failure{kBadConfig, "--noise must be non-negative"};
    const auto x = bench::uniform_signal(o.length, {o.input_range[0], o.input_range[1]}, o.seed);
    add("hammerstein_input", x);
    add("hammerstein_target", bench::generate_hammerstein(sys, x, o.seed));
  } else if (o.which == "chirp") {
    const auto scene = bench::make_chirp_scene(o.seed);
    const auto split = bench::split_chirp_scene(scene);
    add("chirp_reference", scene.reference);
    add("chirp_recorded", scene.recorded);
    add("chirp_train_reference", split.train.input);
    add("chirp_train_recorded", split.train.target);
    add("chirp_val_reference", split.val.input);
    add("chirp_val_recorded", split.val.target);
  } else {
    throw Failure{kBadConfig, "unknown generator '" + o.which + "'"};
  }

  fs::create_directories(o.out_dir);
  for (const auto& [name, file] : files) {
    const auto path = (fs::path(o.out_dir) / name).string();
    io::write_signal(path, file);
    out << "wrote " << path << '\n';
  }
  return kOk;
}

// ---------------------------------------------------------------------------
// export-transforms

struct ExportOptions {
  std::string model, out;
  std::vector<double> range{-1.0, 1.0};
  std::size_t points = 101;
};

int cmd_export(const ExportOptions& o, std::ostream& out) {
  if (o.range.size() != 2 || !std::isfinite(o.range[0]) || !std::isfinite(o.range[1]) ||
      !(o.range[0] < o.range[1]) || o.points < 2) {
    throw Failure{kBadConfig, "need a finite --range lo,hi with lo < hi and --points >= 2"};
  }
  const auto model = load_model_or_fail(o.model);
  std::string csv = "x";
  for (std::size_t i = 0; i < model.size(); ++i) csv += ",stage" + std::to_string(i + 1);
  csv += '\n';
  const double lo = o.range[0];
  const double step = (o.range[1] - o.range[0]) / static_cast<double>(o.points - 1);
  for (std::size_t n = 0; n < o.points; ++n) {
    const double x = n + 1 == o.points ? o.range[1] : lo + step * static_cast<double>(n);
    csv += io::format_double(x);
    for (const auto& stage : model.stages()) csv += "," + io::format_double(stage.poly(x));
    csv += '\n';
  }
  io::write_file_atomic(o.out, csv);
  out << "wrote " << o.points << " points for " << model.size() << " stages to " << o.out << '\n';
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Gradient boosted filters: Hammerstein-cascade system identification", "gbfilt"};
  app.require_subcommand(1);

  TrainOptions train_opts;
  auto* train_cmd = app.add_subcommand("train", "Fit a model to an input/target signal pair");
  add_train(*train_cmd, train_opts);

  PredictOptions predict_opts;
  auto* predict_cmd = app.add_subcommand("predict", "Run a model over an input signal");
  predict_cmd->add_option("--model,-m", predict_opts.model, "Model file")->required();
  predict_cmd->add_option("--input,-x", predict_opts.input, "Input signal")->required();
  predict_cmd->add_option("--out,-o", predict_opts.out, "Output signal, same format as input")->required();

  EvalOptions eval_opts;
  auto* eval_cmd = app.add_subcommand("eval", "Print MSE, NMSE and per-stage cumulative MSE");
  eval_cmd->add_option("--model,-m", eval_opts.model, "Model file")->required();
  eval_cmd->add_option("--input,-x", eval_opts.input, "Input signal")->required();
  eval_cmd->add_option("--target,-t", eval_opts.target, "Target signal")->required();

  SynthOptions synth_opts;
  auto* synth_cmd = app.add_subcommand("synth", "Write benchmark datasets");
  synth_cmd->add_option("which", synth_opts.which, "example1 | hammerstein | chirp")->required();
  synth_cmd->add_option("--seed", synth_opts.seed, "Generator seed");
  synth_cmd->add_option("--out-dir", synth_opts.out_dir, "Directory for the generated files");
  synth_cmd->add_option("--format", synth_opts.format, "csv | wav16 | wav32")
      ->check(CLI::IsMember({"csv", "wav16", "wav32"}));
  synth_cmd->add_option("--n-train", synth_opts.n_train, "example1: training samples");
  synth_cmd->add_option("--n-val", synth_opts.n_val, "example1: validation samples");
  synth_cmd->add_option("--n-test", synth_opts.n_test, "example1: test samples");
  synth_cmd->add_option("--length", synth_opts.length, "hammerstein: samples");
  synth_cmd->add_option("--noise", synth_opts.noise, "hammerstein: noise standard deviation");
  synth_cmd->add_option("--input-range", synth_opts.input_range, "hammerstein: lo,hi")->delimiter(',');
  synth_cmd->add_option("--system", synth_opts.system, "hammerstein: model file used as ground truth");

  ExportOptions export_opts;
  auto* export_cmd =
      app.add_subcommand("export-transforms", "Sample each stage's polynomial over a range (CSV)");
  export_cmd->add_option("--model,-m", export_opts.model, "Model file")->required();
  export_cmd->add_option("--range", export_opts.range, "lo,hi")->delimiter(',');
  export_cmd->add_option("--points", export_opts.points, "Grid points, at least 2");
  export_cmd->add_option("--out,-o", export_opts.out, "CSV file to write")->required();

  std::vector<std::string> argv_store{"gbfilt"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kBadConfig;
  }

  try {
    if (*train_cmd) return cmd_train(*train_cmd, train_opts, out);
    if (*predict_cmd) return cmd_predict(predict_opts, out);
    if (*eval_cmd) return cmd_eval(eval_opts, out);
    if (*synth_cmd) return cmd_synth(synth_opts, out);
    if (*export_cmd) return cmd_export(export_opts, out);
  } catch (const Failure& f) {
    err << "gbfilt: " << f.message << '\n';
    return f.code;
  } catch (const std::exception& e) {
    err << "gbfilt: " << e.what() << '\n';
    return kBadData;
  }
  return kBadConfig;
}

}  // namespace gbf::cli
