#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "gbfilt/bench.hpp"
#include "gbfilt/error.hpp"
#include "gbfilt/metrics.hpp"
#include "gbfilt/model.hpp"
#include "gbfilt/train.hpp"
#include "gbfilt/wiener_hopf.hpp"

namespace py = pybind11;
using namespace gbf;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::vector<double> to_vec(const Array& a) {
  if (a.ndim() != 1) throw PreconditionError("expected a 1-D array");
  return {a.data(), a.data() + a.size()};
}

Signal to_signal(const Array& a) { return Signal(to_vec(a)); }

Array to_array(std::span<const double> v) {
  Array out(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

Array to_array(const Signal& s) { return to_array(s.samples()); }

py::tuple dataset(const bench::Dataset& d) { return py::make_tuple(to_array(d.input), to_array(d.target)); }

GbfModel model_from_string(const std::string& text) {
  std::istringstream in(text);
  return load_model(in);
}

std::string model_to_string(const GbfModel& m) {
  std::ostringstream out;
  save_model(m, out);
  return out.str();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Gradient boosted Hammerstein filters";

  auto base = py::register_exception<Error>(m, "GbfError", PyExc_RuntimeError);
  py::register_exception<PreconditionError>(m, "PreconditionError", base.ptr());
  py::register_exception<SingularSystemError>(m, "SingularSystemError", base.ptr());
  py::register_exception<DivergenceError>(m, "DivergenceError", base.ptr());
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<NumericOverflowError>(m, "NumericOverflowError", base.ptr());
  py::register_exception<SignalFormatError>(m, "SignalFormatError", base.ptr());

  py::class_<GbfModel>(m, "Model")
      .def(py::init([](const std::vector<std::pair<Array, Array>>& stages) {
             std::vector<HammersteinStage> s;
             for (const auto& [a, b] : stages) s.push_back({Polynomial(to_vec(a)), FirFilter(to_vec(b))});
             return GbfModel(std::move(s));
           }),
           py::arg("stages"), "Build from a list of (poly, fir) coefficient pairs.")
      .def_static("from_json", &model_from_string, py::arg("text"))
      .def_static("load", [](const std::string& path) { return load_model(path); }, py::arg("path"))
      .def("to_json", &model_to_string)
      .def("save", [](const GbfModel& self, const std::string& path) { save_model(self, path); },
           py::arg("path"))
      .def("predict", [](const GbfModel& self, const Array& x) { return to_array(model_forward(self, to_signal(x))); },
           py::arg("x"))
      .def("predict_cumulative",
           [](const GbfModel& self, const Array& x) {
             std::vector<Array> out;
             for (const auto& y : model_forward_cumulative(self, to_signal(x))) out.push_back(to_array(y));
             return out;
           },
           py::arg("x"))
      .def_property_readonly("stages",
                             [](const GbfModel& self) {
                               py::list out;
                               for (const auto& s : self.stages()) {
                                 out.append(py::make_tuple(to_array(s.poly.coeffs()), to_array(s.fir.taps())));
                               }
                               return out;
                             })
      .def_property_readonly("stage_mse", [](const GbfModel& self) { return self.metadata().stage_mse; })
      .def("__len__", &GbfModel::size)
      .def("__eq__", [](const GbfModel& a, const GbfModel& b) { return a == b; });

  m.def(
      "stage_forward",
      [](const Array& poly, const Array& fir, const Array& x) {
        return to_array(stage_forward({Polynomial(to_vec(poly)), FirFilter(to_vec(fir))}, to_signal(x)));
      },
      py::arg("poly"), py::arg("fir"), py::arg("x"), "FIR filter applied to poly(x), zero history.");

  m.def(
      "solve_wiener_hopf",
      [](const Array& z, const Array& t, std::size_t order, double ridge, const std::string& method) {
        const WienerHopfProblem prob{to_signal(z), to_signal(t), order, ridge};
        FirFilter b = method == "time"        ? solve_time_domain(prob)
                      : method == "frequency" ? solve_frequency_domain(prob)
                      : method == "auto"      ? solve_wiener_hopf(prob)
                                              : throw PreconditionError("method must be auto, time or frequency");
        return to_array(b.taps());
      },
      py::arg("z"), py::arg("t"), py::arg("order"), py::arg("ridge") = 0.0, py::arg("method") = "auto",
      "Least-squares FIR of the given order mapping z to t.");

  m.def(
      "residual_orthogonality",
      [](const Array& z, const Array& t, const Array& b) {
        const auto taps = to_vec(b);
        return residual_orthogonality({to_signal(z), to_signal(t), taps.size() - 1, 0.0}, FirFilter(taps));
      },
      py::arg("z"), py::arg("t"), py::arg("b"));

  m.def(
      "poly_loss_gradient",
      [](const Array& x, const Array& t, const Array& poly, const Array& fir) {
        return poly_loss_gradient(to_signal(x), to_signal(t), Polynomial(to_vec(poly)), FirFilter(to_vec(fir)));
      },
      py::arg("x"), py::arg("target"), py::arg("poly"), py::arg("fir"));

  m.def(
      "train",
      [](const Array& x, const Array& t, const std::string& config_json) {
        const auto cfg = config_from_json(nlohmann::json::parse(config_json));
        TrainResult r;
        {
          py::gil_scoped_release release;
          r = train(to_signal(x), to_signal(t), cfg);
        }
        py::dict report;
        report["stage_mse"] = r.report.stage_mse;
        report["loss_traces"] = r.report.loss_traces;
        report["iterations"] = r.report.iterations;
        report["converged"] = r.report.converged;
        report["wall_seconds"] = r.report.wall_seconds;
        return py::make_tuple(r.model, report);
      },
      py::arg("x"), py::arg("target"), py::arg("config_json"),
      "Train on (x, target) with a JSON config; returns (Model, report dict).");

  m.def("default_config_json", [] { return config_to_json(TrainConfig{}).dump(); });

  m.def("mse", [](const Array& y, const Array& t) { return mse(to_signal(y), to_signal(t)); });
  m.def("nmse", [](const Array& y, const Array& t) { return nmse(to_signal(y), to_signal(t)); });

  m.def("simulate_example1", [](const Array& u) { return to_array(bench::simulate_example1(to_signal(u))); },
        py::arg("u"));
  m.def(
      "make_example1_datasets",
      [](std::uint64_t seed) {
        const auto d = bench::make_example1_datasets(seed);
        py::dict out;
        out["train"] = dataset(d.train);
        out["val"] = dataset(d.val);
        out["test"] = dataset(d.test);
        return out;
      },
      py::arg("seed") = 0);
  m.def(
      "make_chirp_scene",
      [](std::uint64_t seed) {
        const auto scene = bench::make_chirp_scene(seed);
        const auto split = bench::split_chirp_scene(scene);
        py::dict out;
        out["reference"] = to_array(scene.reference);
        out["recorded"] = to_array(scene.recorded);
        out["train"] = dataset(split.train);
        out["val"] = dataset(split.val);
        return out;
      },
      py::arg("seed") = 0);
  m.def("uniform_signal",
        [](std::size_t n, double lo, double hi, std::uint64_t seed) {
          return to_array(bench::uniform_signal(n, {lo, hi}, seed));
        },
        py::arg("n"), py::arg("lo") = -1.0, py::arg("hi") = 1.0, py::arg("seed") = 0);
}
