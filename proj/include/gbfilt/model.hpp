#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gbfilt/signal.hpp"

namespace gbf {

/// Polynomial nonlinearity followed by a causal FIR filter.
struct HammersteinStage {
  Polynomial poly;
  FirFilter fir;

  std::size_t poly_order() const noexcept { return poly.order(); }
  std::size_t fir_order() const noexcept { return fir.order(); }

  friend bool operator==(const HammersteinStage&, const HammersteinStage&) = default;
};

/// Training provenance carried alongside the stages. `train_config` is an opaque
/// snapshot written by the trainer.
struct ModelMetadata {
  nlohmann::json train_config = nlohmann::json::object();
  std::vector<double> stage_mse;  ///< cumulative training MSE after each stage

  friend bool operator==(const ModelMetadata&, const ModelMetadata&) = default;
};

/// A gradient boosted filter: the prediction is the sum of all stage outputs.
class GbfModel {
 public:
  static constexpr const char* kFormatName = "gbfilt-model";
  static constexpr const char* kFormatVersion = "1";

  GbfModel() = default;
  explicit GbfModel(std::vector<HammersteinStage> stages, ModelMetadata meta = {});

  std::size_t size() const noexcept { return stages_.size(); }
  bool empty() const noexcept { return stages_.empty(); }
  const std::vector<HammersteinStage>& stages() const noexcept { return stages_; }
  const HammersteinStage& stage(std::size_t i) const { return stages_.at(i); }
  const ModelMetadata& metadata() const noexcept { return meta_; }

  friend bool operator==(const GbfModel&, const GbfModel&) = default;

 private:
  std::vector<HammersteinStage> stages_;
  ModelMetadata meta_;
};

/// y_i(n) = sum_j b_j z(n - j) with z = poly(x).
Signal stage_forward(const HammersteinStage& stage, const Signal& x);

/// Sum of every stage's output.
Signal model_forward(const GbfModel& model, const Signal& x);

/// Running sum after each stage: element i is the prediction of stages 0..i.
std::vector<Signal> model_forward_cumulative(const GbfModel& model, const Signal& x);

nlohmann::json model_to_json(const GbfModel& model);
/// Throws ParseError with a path to the offending field.
GbfModel model_from_json(const nlohmann::json& doc);

/// Writes the model as JSON. Throws PreconditionError if the model is empty or its
/// stage MSE trace increases by more than 1e-12 between stages.
void save_model(const GbfModel& model, std::ostream& out);
void save_model(const GbfModel& model, const std::string& path);

GbfModel load_model(std::istream& in);
GbfModel load_model(const std::string& path);

}  // namespace gbf
