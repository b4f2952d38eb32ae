#include "gbfilt/model.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <iterator>
#include <ostream>
#include <sstream>
#include <string_view>

#include "gbfilt/error.hpp"
#include "gbfilt/io.hpp"

namespace gbf {
namespace {

using nlohmann::json;

constexpr double kMseSlack = 1e-12;

// Coefficients are normally JSON numbers; strings are accepted so that hex-float
// text ("0x1.8p+1") and explicit "nan"/"inf" markers can be read and rejected.
double read_coeff(const json& v, const std::string& path) {
  double out = 0.0;
  if (v.is_number()) {
    out = v.get<double>();
  } else if (v.is_string()) {
    const auto s = v.get<std::string>();
    char* end = nullptr;
    out = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size()) throw ParseError(path, "not a number: '" + s + "'");
  } else if (v.is_null()) {
    throw ParseError(path, "non-finite coefficient (null)");
  } else {
    throw ParseError(path, "expected a number");
  }
  if (!std::isfinite(out)) throw ParseError(path, "non-finite coefficient");
  return out;
}

std::vector<double> read_coeffs(const json& obj, const char* key, const std::string& path) {
  const std::string here = path + "." + key;
  const auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(here, "missing field");
  if (!it->is_array() || it->empty()) throw ParseError(here, "expected a non-empty array");
  std::vector<double> out;
  out.reserve(it->size());
  for (std::size_t i = 0; i < it->size(); ++i) {
    out.push_back(read_coeff((*it)[i], here + "[" + std::to_string(i) + "]"));
  }
  return out;
}

std::size_t read_order(const json& obj, const char* key, const std::string& path) {
  const std::string here = path + "." + key;
  const auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(here, "missing field");
  if (!it->is_number_unsigned()) throw ParseError(here, "expected a non-negative integer");
  return it->get<std::size_t>();
}

std::string read_version(const json& doc) {
  const auto it = doc.find("version");
  if (it == doc.end()) throw ParseError("version", "missing field");
  if (it->is_string()) return it->get<std::string>();
  if (it->is_number_integer()) return std::to_string(it->get<long long>());
  throw ParseError("version", "expected a string");
}

void check_mse_trace(const std::vector<double>& mse) {
  for (std::size_t i = 1; i < mse.size(); ++i) {
    if (mse[i] > mse[i - 1] + kMseSlack) {
      throw PreconditionError("stage MSE increases at stage " + std::to_string(i) + " (" +
                              io::format_double(mse[i - 1]) + " -> " +
                              io::format_double(mse[i]) + ")");
    }
  }
}

// JSON has no NaN/Infinity literals, but Python's json module writes them. Quote
// bare occurrences so they reach read_coeff and fail with a field path.
std::string quote_nonfinite_literals(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  bool in_string = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_string) {
      out += c;
      if (c == '\\' && i + 1 < text.size()) {
        out += text[++i];
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
      out += c;
      continue;
    }
    bool replaced = false;
    for (const char* token : {"-Infinity", "Infinity", "NaN"}) {
      const std::string_view tok(token);
      if (text.compare(i, tok.size(), tok) == 0) {
        out += '"';
        out += tok;
        out += '"';
        i += tok.size() - 1;
        replaced = true;
        break;
      }
    }
    if (!replaced) out += c;
  }
  return out;
}

}  // namespace

GbfModel::GbfModel(std::vector<HammersteinStage> stages, ModelMetadata meta)
    : stages_(std::move(stages)), meta_(std::move(meta)) {}

Signal stage_forward(const HammersteinStage& stage, const Signal& x) {
  return fir_apply(stage.fir, poly_transform(x, stage.poly));
}

std::vector<Signal> model_forward_cumulative(const GbfModel& model, const Signal& x) {
  if (model.empty()) throw PreconditionError("model has no stages");
  std::vector<Signal> out;
  out.reserve(model.size());
  std::vector<double> acc(x.size(), 0.0);
  for (const auto& stage : model.stages()) {
    const Signal y = stage_forward(stage, x);
    for (std::size_t n = 0; n < acc.size(); ++n) acc[n] += y[n];
    check_finite(acc, "model_forward");
    out.emplace_back(acc, x.sample_rate());
  }
  return out;
}

Signal model_forward(const GbfModel& model, const Signal& x) {
  if (model.empty()) throw PreconditionError("model has no stages");
  std::vector<double> acc(x.size(), 0.0);
  for (const auto& stage : model.stages()) {
    const Signal y = stage_forward(stage, x);
    for (std::size_t n = 0; n < acc.size(); ++n) acc[n] += y[n];
  }
  check_finite(acc, "model_forward");
  return Signal(std::move(acc), x.sample_rate());
}

nlohmann::json model_to_json(const GbfModel& model) {
  json stages = json::array();
  for (const auto& s : model.stages()) {
    stages.push_back({{"p", s.poly_order()},
                      {"m", s.fir_order()},
                      {"poly", std::vector<double>(s.poly.coeffs().begin(), s.poly.coeffs().end())},
                      {"fir", std::vector<double>(s.fir.taps().begin(), s.fir.taps().end())}});
  }
  return {{"format", GbfModel::kFormatName},
          {"version", GbfModel::kFormatVersion},
          {"stages", std::move(stages)},
          {"metadata",
           {{"stage_mse", model.metadata().stage_mse},
            {"train_config", model.metadata().train_config}}}};
}

GbfModel model_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ParseError("", "model document must be a JSON object");
  if (const auto it = doc.find("format"); it != doc.end() && *it != GbfModel::kFormatName) {
    throw ParseError("format", "not a gbfilt model");
  }
  const std::string version = read_version(doc);
  if (version != GbfModel::kFormatVersion) {
    throw ParseError("version", "unknown model format version \"" + version + "\"");
  }
  const auto st = doc.find("stages");
  if (st == doc.end()) throw ParseError("stages", "missing field");
  if (!st->is_array() || st->empty()) throw ParseError("stages", "expected a non-empty array");

  std::vector<HammersteinStage> stages;
  for (std::size_t i = 0; i < st->size(); ++i) {
    const std::string path = "stages[" + std::to_string(i) + "]";
    const json& s = (*st)[i];
    if (!s.is_object()) throw ParseError(path, "expected an object");
    auto poly = read_coeffs(s, "poly", path);
    auto fir = read_coeffs(s, "fir", path);
    if (read_order(s, "p", path) + 1 != poly.size()) {
      throw ParseError(path + ".p", "does not match poly length " + std::to_string(poly.size()));
    }
    if (read_order(s, "m", path) + 1 != fir.size()) {
      throw ParseError(path + ".m", "does not match fir length " + std::to_string(fir.size()));
    }
    stages.push_back({Polynomial(std::move(poly)), FirFilter(std::move(fir))});
  }

  ModelMetadata meta;
  if (const auto m = doc.find("metadata"); m != doc.end()) {
    if (!m->is_object()) throw ParseError("metadata", "expected an object");
    if (const auto mse = m->find("stage_mse"); mse != m->end()) {
      if (!mse->is_array()) throw ParseError("metadata.stage_mse", "expected an array");
      for (std::size_t i = 0; i < mse->size(); ++i) {
        meta.stage_mse.push_back(
            read_coeff((*mse)[i], "metadata.stage_mse[" + std::to_string(i) + "]"));
      }
    }
    if (const auto cfg = m->find("train_config"); cfg != m->end()) meta.train_config = *cfg;
  }
  return GbfModel(std::move(stages), std::move(meta));
}

void save_model(const GbfModel& model, std::ostream& out) {
  if (model.empty()) throw PreconditionError("refusing to save a model with no stages");
  check_mse_trace(model.metadata().stage_mse);
  out << model_to_json(model).dump(2) << '\n';
}

void save_model(const GbfModel& model, const std::string& path) {
  std::ostringstream buf;
  save_model(model, buf);
  io::write_file_atomic(path, buf.str());
}

GbfModel load_model(std::istream& in) {
  const std::string text(std::istreambuf_iterator<char>(in), {});
  json doc;
  try {
    doc = json::parse(quote_nonfinite_literals(text));
  } catch (const json::parse_error& e) {
    throw ParseError("", std::string("malformed JSON: ") + e.what());
  }
  return model_from_json(doc);
}

GbfModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("", "cannot open model file '" + path + "'");
  return load_model(in);
}

}  // namespace gbf
