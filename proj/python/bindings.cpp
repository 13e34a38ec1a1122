#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "lrfnet/bench.hpp"
#include "lrfnet/error.hpp"
#include "lrfnet/pipeline.hpp"

namespace py = pybind11;
using namespace lrfnet;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Array to_array(std::span<const double> v) {
  Array out(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

std::vector<double> to_vector(const Array& a) {
  if (a.ndim() != 1) throw py::value_error("expected a 1-D array");
  return {a.data(), a.data() + a.size()};
}

Matrix to_matrix(const Array& a) {
  if (a.ndim() != 2) throw py::value_error("expected a 2-D array");
  Matrix m(static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)));
  const auto v = a.unchecked<2>();
  for (py::ssize_t r = 0; r < v.shape(0); ++r) {
    for (py::ssize_t c = 0; c < v.shape(1); ++c) m(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) = v(r, c);
  }
  return m;
}

Array matrix_to_array(const Matrix& m) {
  Array out({static_cast<py::ssize_t>(m.rows()), static_cast<py::ssize_t>(m.cols())});
  std::copy(m.data().begin(), m.data().end(), out.mutable_data());
  return out;
}

py::dict result_dict(const ScenarioResult& r) {
  py::dict d;
  d["scenario"] = r.name;
  d["backend"] = r.backend;
  d["seed"] = r.seed;
  d["ok"] = r.ok();
  py::list segs;
  for (const auto& s : r.segments) segs.append(py::make_tuple(s.range.first, s.range.second, s.mae));
  d["segments"] = segs;
  d["mse_long"] = r.mse_long;
  d["mse_short"] = r.mse_short;
  d["persistence_mse_short"] = r.persistence_mse_short;
  d["max_abs_truth"] = r.max_abs_truth;
  d["long_error"] = r.long_error;
  d["short_error"] = r.short_error;
  d["wall_s"] = r.wall_s;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Stationary transform + LRF feature forecasting";

  static py::exception<Error> exc(m, "LrfnetError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object err = py::reinterpret_borrow<py::object>(exc.ptr())(e.what());
      err.attr("kind") = std::string(to_string(e.kind()));
      PyErr_SetObject(exc.ptr(), err.ptr());
    }
  });

  py::class_<Series>(m, "Series")
      .def(py::init([](const Array& xs, const Array& ys) { return Series(to_vector(xs), to_vector(ys)); }),
           py::arg("xs"), py::arg("ys"))
      .def_static("from_values", [](const Array& ys) { return Series::from_values(to_vector(ys)); })
      .def_property_readonly("xs", [](const Series& s) { return to_array(s.xs()); })
      .def_property_readonly("ys", [](const Series& s) { return to_array(s.ys()); })
      .def("slice", &Series::slice)
      .def("__len__", &Series::size)
      .def("__eq__", [](const Series& a, const Series& b) { return a == b; })
      .def("__repr__", [](const Series& s) { return "Series(n=" + std::to_string(s.size()) + ")"; });

  py::class_<NormParams>(m, "NormParams")
      .def(py::init<>())
      .def(py::init([](double lo, double hi, bool bypass) { return NormParams{lo, hi, bypass}; }), py::arg("y_min"),
           py::arg("y_max"), py::arg("bypass") = false)
      .def_readonly("y_min", &NormParams::y_min)
      .def_readonly("y_max", &NormParams::y_max)
      .def_readonly("bypass", &NormParams::bypass);

  m.def("normalize_01", [](const Series& s) {
    auto n = normalize_01(s);
    return py::make_tuple(n.series, n.params);
  });
  m.def("denormalize_01", &denormalize_01);
  m.def("diff", &diff);
  m.def("cumsum", &cumsum);
  m.def("mae", py::overload_cast<const Series&, const Series&>(&mae));
  m.def("mse", py::overload_cast<const Series&, const Series&>(&mse));

  py::enum_<StBranch>(m, "StBranch")
      .value("Identity", StBranch::Identity)
      .value("PolyDiff", StBranch::PolyDiff)
      .value("Exponential", StBranch::Exponential);

  py::class_<StationaryModel>(m, "StationaryModel")
      .def_readonly("branch", &StationaryModel::branch)
      .def_readonly("a1", &StationaryModel::a1)
      .def_readonly("b1", &StationaryModel::b1)
      .def_readonly("a2", &StationaryModel::a2)
      .def_readonly("b2", &StationaryModel::b2)
      .def_readonly("k_est", &StationaryModel::k_est)
      .def_readonly("base_est", &StationaryModel::base_est)
      .def_readonly("cum_state", &StationaryModel::cum_state)
      .def("denominator", &StationaryModel::denominator);

  m.def("estimate_poly_order", &estimate_poly_order);
  m.def("estimate_exp_base", &estimate_exp_base);
  m.def("fit_stationary", &fit_stationary);
  m.def("apply_stationary", &apply_stationary);
  m.def("invert_stationary", &invert_stationary, py::arg("model"), py::arg("s_val"), py::arg("x"));

  py::class_<LrfModel>(m, "LrfModel")
      .def_readonly("m", &LrfModel::m)
      .def_readonly("ridge_lambda", &LrfModel::ridge_lambda)
      .def_property_readonly("first_position", &LrfModel::first_position);
  m.def("fit_lrf", &fit_lrf, py::arg("series"), py::arg("m"), py::arg("ridge_lambda") = 0.0);
  m.def("encode", [](const LrfModel& model, const Series& s, std::size_t i) {
    return to_array(encode(model, s, i).values);
  });
  m.def("encode_training_set", [](const LrfModel& model, const Series& s) {
    const TrainingSet ts = encode_training_set(model, s);
    return py::make_tuple(matrix_to_array(ts.features), to_array(ts.targets), ts.positions);
  });

  py::enum_<Backend>(m, "Backend")
      .value("Linear", Backend::Linear)
      .value("Gbt", Backend::Gbt)
      .value("Mlp", Backend::Mlp);

  py::class_<GbtParams>(m, "GbtParams")
      .def(py::init<>())
      .def_readwrite("n_rounds", &GbtParams::n_rounds)
      .def_readwrite("max_depth", &GbtParams::max_depth)
      .def_readwrite("shrinkage", &GbtParams::shrinkage)
      .def_readwrite("min_leaf", &GbtParams::min_leaf);

  py::class_<MlpParams>(m, "MlpParams")
      .def(py::init<>())
      .def_readwrite("hidden_sizes", &MlpParams::hidden_sizes)
      .def_readwrite("max_epochs", &MlpParams::max_epochs)
      .def_readwrite("learning_rate", &MlpParams::learning_rate)
      .def_readwrite("tol", &MlpParams::tol);

  py::class_<Regressor>(m, "Regressor")
      .def_property_readonly("backend", &Regressor::backend)
      .def_property_readonly("n_features", &Regressor::n_features)
      .def_property_readonly("seed", &Regressor::seed)
      .def("predict", [](const Regressor& r, const Array& x) {
        if (x.ndim() == 1) return py::cast(r.predict(to_vector(x)));
        const Matrix mat = to_matrix(x);
        std::vector<double> out(mat.rows());
        for (std::size_t i = 0; i < mat.rows(); ++i) out[i] = r.predict(mat.row(i));
        return py::object(to_array(out));
      });

  m.def("fit_linear", [](const Array& x, const Array& y) { return fit_linear(to_matrix(x), to_vector(y)); });
  m.def(
      "fit_gbt",
      [](const Array& x, const Array& y, const GbtParams& p, std::uint64_t seed) {
        return fit_gbt(to_matrix(x), to_vector(y), p, seed);
      },
      py::arg("x"), py::arg("y"), py::arg("params") = GbtParams{}, py::arg("seed") = 1);
  m.def(
      "fit_mlp",
      [](const Array& x, const Array& y, const MlpParams& p, std::uint64_t seed) {
        return fit_mlp(to_matrix(x), to_vector(y), p, seed);
      },
      py::arg("x"), py::arg("y"), py::arg("params") = MlpParams{}, py::arg("seed") = 1);

  py::class_<PipelineConfig>(m, "PipelineConfig")
      .def(py::init<>())
      .def_readwrite("m", &PipelineConfig::m)
      .def_readwrite("backend", &PipelineConfig::backend)
      .def_readwrite("gbt", &PipelineConfig::gbt)
      .def_readwrite("mlp", &PipelineConfig::mlp)
      .def_readwrite("use_st", &PipelineConfig::use_st)
      .def_readwrite("seed", &PipelineConfig::seed)
      .def_readwrite("window_n", &PipelineConfig::window_n)
      .def_readwrite("ridge_lambda", &PipelineConfig::ridge_lambda);

  py::class_<FittedPipeline>(m, "FittedPipeline")
      .def_readonly("config", &FittedPipeline::config)
      .def_readonly("norm", &FittedPipeline::norm)
      .def_readonly("st", &FittedPipeline::st)
      .def_readonly("lrf", &FittedPipeline::lrf)
      .def_readonly("reg", &FittedPipeline::reg)
      .def_readonly("train_tail", &FittedPipeline::train_tail)
      .def("to_json", [](const FittedPipeline& p) { return to_json(p); })
      .def("__eq__", [](const FittedPipeline& a, const FittedPipeline& b) { return a == b; })
      .def_static("from_json", &from_json)
      .def("save", [](const FittedPipeline& p, const std::filesystem::path& path) { save_file(p, path); })
      .def_static("load", &load_file);

  m.def("train", &train, py::arg("series"), py::arg("config") = PipelineConfig{});
  m.def("generalize", &generalize, py::arg("pipeline"), py::arg("horizon"));
  m.def("fitted_values", &fitted_values);

  m.def("gen_function", [](const std::string& name, const Array& xs) { return gen_function(name, to_vector(xs)); });
  m.def(
      "load_csv",
      [](const std::filesystem::path& path, py::object column, bool header) {
        ColumnSelector sel = py::isinstance<py::int_>(column) ? ColumnSelector(column.cast<std::size_t>())
                                                              : parse_column_selector(column.cast<std::string>());
        return load_csv(path, sel, header);
      },
      py::arg("path"), py::arg("column") = 0, py::arg("header") = false);

  m.def(
      "run_math_suite",
      [](const PipelineConfig& cfg, std::string format) {
        const BenchmarkReport report = run_scenarios(math_suite(cfg));
        std::ostringstream os;
        emit_report(report, report_format_from_string(format), os);
        py::list rows;
        for (const auto& r : report.rows) rows.append(result_dict(r));
        return py::make_tuple(rows, os.str());
      },
      py::arg("config") = PipelineConfig{}, py::arg("format") = "csv");
}
