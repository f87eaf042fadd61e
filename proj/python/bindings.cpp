#include <optional>
#include <string>
#include <vector>

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "pad/commands.hpp"
#include "pad/errors.hpp"
#include "pad/metrics.hpp"
#include "pad/model.hpp"
#include "pad/spline.hpp"

namespace py = pybind11;
using nlohmann::json;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

pad::RunConfig config_from(const std::string& text) {
  try {
    return pad::run_config_from_json(text.empty() ? json::object() : json::parse(text));
  } catch (const json::parse_error& e) {
    throw pad::ConfigError(std::string("invalid JSON config: ") + e.what());
  }
}

std::vector<double> to_vector(const Array& a) {
  if (a.ndim() != 1) throw pad::DimensionError("expected a 1-d array");
  return {a.data(), a.data() + a.size()};
}

pad::Tensor to_tensor(const Array& a) {
  if (a.ndim() != 2) throw pad::DimensionError("expected a 2-d array");
  return pad::Tensor({static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1))},
                     std::vector<double>(a.data(), a.data() + a.size()));
}

Array from_tensor(const pad::Tensor& t) {
  Array out({t.rows(), t.cols()});
  std::copy(t.data().begin(), t.data().end(), out.mutable_data());
  return out;
}

Array from_vector(const std::vector<double>& v) {
  Array out(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

py::dict sequence_dict(const pad::RawSequence& s) {
  py::dict d;
  d["times"] = from_vector(s.times);
  d["values"] = from_tensor(s.values);
  d["labels"] = std::vector<int>(s.anomaly_flags.begin(), s.anomaly_flags.end());
  d["channels"] = s.channel_names;
  return d;
}

class Spline {
 public:
  Spline(const Array& times, const Array& values) : path_(pad::fit_natural_cubic_spline(to_vector(times), to_tensor(values))) {}
  std::vector<double> eval(double t) const { return path_.eval(t); }
  std::vector<double> derivative(double t) const { return path_.eval_derivative(t); }
  std::vector<double> second_derivative(double t) const { return path_.eval_second_derivative(t); }
  std::pair<double, double> domain() const { return {path_.t_first(), path_.t_last()}; }

 private:
  pad::CubicSplinePath path_;
};

}  // namespace

PYBIND11_MODULE(_pad, m) {
  m.doc() = "Co-evolving neural CDEs for anomaly and precursor-of-anomaly detection";

  auto base = py::register_exception<pad::Error>(m, "PadError", PyExc_RuntimeError);
  py::register_exception<pad::InputError>(m, "InputError", base.ptr());
  py::register_exception<pad::DimensionError>(m, "DimensionError", base.ptr());
  py::register_exception<pad::DomainError>(m, "DomainError", base.ptr());
  py::register_exception<pad::ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<pad::DivergenceError>(m, "DivergenceError", base.ptr());

  m.def("default_config", [] { return pad::to_json(pad::RunConfig{}).dump(); });
  m.def("normalize_config", [](const std::string& text) { return pad::to_json(config_from(text)).dump(); },
        py::arg("config"));

  m.def("synth", [](const std::string& cfg, const std::filesystem::path& out) {
    return pad::cmd_synth(config_from(cfg), out).dump();
  }, py::arg("config"), py::arg("out"));
  m.def("augment", [](const std::filesystem::path& input, const std::string& cfg, const std::filesystem::path& out) {
    return pad::cmd_augment(input, config_from(cfg), out).dump();
  }, py::arg("input"), py::arg("config"), py::arg("out"));
  m.def("train", [](const std::string& cfg, const std::filesystem::path& out) {
    py::gil_scoped_release release;
    return pad::cmd_train(config_from(cfg), out).dump();
  }, py::arg("config"), py::arg("out"));
  m.def("evaluate", [](const std::string& cfg, const std::filesystem::path& checkpoint, const std::filesystem::path& out,
                       std::optional<std::filesystem::path> data, std::optional<std::vector<double>> drop,
                       std::optional<double> threshold) {
    pad::EvalOptions opt{checkpoint, data, drop, threshold};
    py::gil_scoped_release release;
    return pad::cmd_eval(config_from(cfg), opt, out).dump();
  }, py::arg("config"), py::arg("checkpoint"), py::arg("out"), py::arg("data") = py::none(),
     py::arg("drop") = py::none(), py::arg("threshold") = py::none());
  m.def("gradcheck", [](const std::string& cfg, const std::filesystem::path& out) {
    return pad::cmd_gradcheck(config_from(cfg), out).dump();
  }, py::arg("config"), py::arg("out"));
  m.def("sweep", [](const std::string& cfg, const std::filesystem::path& out) {
    py::gil_scoped_release release;
    return pad::cmd_sweep(config_from(cfg), out).dump();
  }, py::arg("config"), py::arg("out"));

  m.def("generate_synthetic", [](const std::string& cfg) {
    pad::RunConfig c = config_from(cfg);
    pad::SyntheticConfig s = c.synthetic;
    s.seed = pad::derive_seed(c.seed, 1);
    return sequence_dict(pad::generate_synthetic(s));
  }, py::arg("config"));
  m.def("load_csv", [](const std::filesystem::path& p) { return sequence_dict(pad::load_csv(p)); }, py::arg("path"));

  m.def("evaluate_scores", [](const std::vector<double>& probs, const std::vector<int>& labels, double threshold) {
    return pad::to_json(pad::evaluate(probs, labels, threshold), false).dump();
  }, py::arg("probabilities"), py::arg("labels"), py::arg("threshold") = 0.5);

  m.def("predict", [](const std::filesystem::path& checkpoint, const Array& times, const Array& values,
                      const std::string& solver_cfg) {
    const pad::Checkpoint cp = pad::load_checkpoint(checkpoint);
    pad::RawSequence seq;
    seq.times = to_vector(times);
    seq.values = to_tensor(values);
    if (cp.stats) seq = pad::apply_normalization(seq, *cp.stats);
    pad::TimeSeriesWindow w{seq.times, seq.values, {}, 0};
    // The solver settings the model was trained with, unless overridden.
    const pad::RunConfig rc = solver_cfg.empty() && !cp.config.is_null() ? pad::run_config_from_json(cp.config)
                                                                          : config_from(solver_cfg);
    py::gil_scoped_release release;
    const pad::ForwardResult r = pad::forward(w, cp.params, cp.model, rc.train.solver);
    return std::make_pair(r.p_anomaly, r.p_poa);
  }, py::arg("checkpoint"), py::arg("times"), py::arg("values"), py::arg("config") = "");

  py::class_<Spline>(m, "CubicSpline")
      .def(py::init<const Array&, const Array&>(), py::arg("times"), py::arg("values"))
      .def("__call__", &Spline::eval, py::arg("t"))
      .def("derivative", &Spline::derivative, py::arg("t"))
      .def("second_derivative", &Spline::second_derivative, py::arg("t"))
      .def_property_readonly("domain", &Spline::domain);
}
