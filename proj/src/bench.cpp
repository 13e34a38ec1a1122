#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <numbers>
#include <string>

#include <json.hpp>

#include "lrfnet/bench.hpp"
#include "lrfnet/error.hpp"

namespace lrfnet {

namespace {

constexpr double kPi = std::numbers::pi;

int function_id(std::string_view name) {
  if (name.size() == 2 && name[0] == 'f' && name[1] >= '1' && name[1] <= '6') return name[1] - '0';
  return 0;
}

}  // namespace

bool is_builtin_function(std::string_view name) { return function_id(name) != 0; }

double eval_function(std::string_view name, double x) {
  switch (function_id(name)) {
    case 1: return x * x * x + 3.0 * x * x - 10.0 * x;
    case 2: return std::pow(x, 10.0);
    case 3:
      if (x == 0.0) throw Error(ErrorKind::DomainError, "f3 is undefined at x = 0");
      return 1.0 / (x * x * x);
    case 4: return std::exp(x);
    case 5: return std::sin(0.001 * x * kPi + 0.5 * kPi) + 2.0 * std::cos(0.002 * x * kPi + 0.1 * kPi);
    case 6:
      return std::sin(0.001 * x * kPi + 0.5 * kPi) + 2.0 * std::cos(0.002 * x * kPi + 0.1 * kPi + 0.001 * x * kPi);
    default: throw Error(ErrorKind::UnknownFunction, "unknown function '" + std::string(name) + "' (expected f1..f6)");
  }
}

Series gen_function(std::string_view name, std::span<const double> xs) {
  if (!is_builtin_function(name)) {
    throw Error(ErrorKind::UnknownFunction, "unknown function '" + std::string(name) + "' (expected f1..f6)");
  }
  std::vector<double> ys(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) ys[i] = eval_function(name, xs[i]);
  return Series(std::vector<double>(xs.begin(), xs.end()), std::move(ys));
}

std::size_t GridSpec::count() const {
  if (!(step > 0.0) || !std::isfinite(start) || !std::isfinite(end) || end < start) {
    throw Error(ErrorKind::InvalidArgument, "grid needs step > 0 and end >= start");
  }
  return static_cast<std::size_t>(std::floor((end - start) / step + 1e-9)) + 1;
}

std::vector<double> GridSpec::points() const {
  std::vector<double> xs(count());
  for (std::size_t i = 0; i < xs.size(); ++i) xs[i] = start + static_cast<double>(i) * step;
  return xs;
}

void ScenarioSpec::validate() const {
  if (name.empty()) throw Error(ErrorKind::InvalidArgument, "scenario name must not be empty");
  if (horizon < 1) throw Error(ErrorKind::InvalidArgument, name + ": horizon must be >= 1");
  for (const auto& [first, last] : segments) {
    if (first < 1 || last < first || last > horizon) {
      throw Error(ErrorKind::InvalidArgument, name + ": segment " + std::to_string(first) + "-" +
                                                  std::to_string(last) + " outside the horizon");
    }
  }
  if (const auto* b = std::get_if<BuiltinSource>(&source)) {
    if (!is_builtin_function(b->function)) {
      throw Error(ErrorKind::UnknownFunction, name + ": unknown function '" + b->function + "'");
    }
    const std::size_t n_train = b->train.count();
    const std::size_t n_test = b->test.count();
    if (b->test.start != b->train.start || std::abs(b->test.step - b->train.step) > 1e-12 * b->train.step ||
        n_test <= n_train) {
      throw Error(ErrorKind::InvalidArgument, name + ": test range must strictly extend the training range");
    }
  }
  if (short_term && (short_horizon < 1 || short_train < min_lrf_length(pipeline.m))) {
    throw Error(ErrorKind::InvalidArgument, name + ": short-term window too small");
  }
  pipeline.validate();
}

ScenarioData load_scenario_data(const ScenarioSpec& spec) {
  spec.validate();
  if (const auto* b = std::get_if<BuiltinSource>(&spec.source)) {
    const std::size_t n_train = b->train.count();
    Series full = gen_function(b->function, b->test.points());
    Series train = full.slice(0, n_train);
    Series truth = full.slice(n_train, full.size() - n_train);
    return {std::move(train), std::move(truth), std::move(full)};
  }
  const auto& c = std::get<CsvSource>(spec.source);
  Series full = load_csv(c.path, c.column, c.header);
  std::size_t n_train = c.train_count;
  if (n_train == 0) {
    if (full.size() <= spec.horizon) {
      throw Error(ErrorKind::TooShort, spec.name + ": " + std::to_string(full.size()) +
                                           " samples leave nothing to train on with horizon " +
                                           std::to_string(spec.horizon));
    }
    n_train = full.size() - spec.horizon;
  }
  if (n_train >= full.size()) {
    throw Error(ErrorKind::TooShort, spec.name + ": train_count leaves no ground truth");
  }
  Series train = full.slice(0, n_train);
  Series truth = full.slice(n_train, full.size() - n_train);
  return {std::move(train), std::move(truth), std::move(full)};
}

Forecaster pipeline_forecaster() {
  return [](const Series& train_series, std::span<const double> future_xs, const PipelineConfig& cfg) {
    const FittedPipeline p = train(train_series, cfg);
    const Series out = generalize(p, future_xs.size());
    return std::vector<double>(out.ys().begin(), out.ys().end());
  };
}

Forecaster oracle_forecaster(const ScenarioSpec& spec) {
  const Series full = load_scenario_data(spec).full;
  return [full](const Series&, std::span<const double> future_xs, const PipelineConfig&) {
    std::vector<double> out;
    out.reserve(future_xs.size());
    const auto xs = full.xs();
    for (double x : future_xs) {
      auto it = std::lower_bound(xs.begin(), xs.end(), x - 1e-9 * std::max(1.0, std::abs(x)));
      if (it == xs.end()) throw Error(ErrorKind::OutOfWindow, "oracle has no value at x = " + std::to_string(x));
      out.push_back(full.y(static_cast<std::size_t>(it - xs.begin())));
    }
    return out;
  };
}

double persistence_mse(const Series& train, const Series& truth) {
  const double last = train.y(train.size() - 1);
  double acc = 0.0;
  for (double v : truth.ys()) acc += (v - last) * (v - last);
  return acc / static_cast<double>(truth.size());
}

LongTermResult run_long_term(const ScenarioSpec& spec, const Forecaster& forecaster) {
  const ScenarioData data = load_scenario_data(spec);
  if (data.truth.size() < spec.horizon) {
    throw Error(ErrorKind::TooShort, spec.name + ": only " + std::to_string(data.truth.size()) +
                                         " ground-truth samples for horizon " + std::to_string(spec.horizon));
  }
  const Series truth = data.truth.slice(0, spec.horizon);
  const Forecaster& f = forecaster ? forecaster : pipeline_forecaster();
  std::vector<double> pred = f(data.train, truth.xs(), spec.pipeline);
  if (pred.size() != spec.horizon) {
    throw Error(ErrorKind::LengthMismatch, spec.name + ": forecaster returned " + std::to_string(pred.size()) +
                                               " values for horizon " + std::to_string(spec.horizon));
  }

  std::vector<SegmentError> segments;
  for (const auto& seg : spec.segments) {
    const std::size_t lo = seg.first - 1;
    const std::size_t len = seg.second - lo;
    segments.push_back({seg, mae(std::span<const double>(pred).subspan(lo, len), truth.ys().subspan(lo, len))});
  }
  double max_abs = 0.0;
  for (double v : truth.ys()) max_abs = std::max(max_abs, std::abs(v));
  const double mae_all = mae(pred, truth.ys());
  const double mse_all = mse(pred, truth.ys());
  return LongTermResult{std::move(segments), mae_all, mse_all, max_abs, truth, std::move(pred)};
}

ShortTermResult run_short_term(const ScenarioSpec& spec, const Forecaster& forecaster) {
  const ScenarioData data = load_scenario_data(spec);
  const std::size_t need = spec.short_train + spec.short_horizon;
  if (data.full.size() < need) {
    throw Error(ErrorKind::TooShort, spec.name + ": short-term protocol needs " + std::to_string(need) +
                                         " samples, have " + std::to_string(data.full.size()));
  }
  const Series window = data.full.slice(0, spec.short_train);
  const Series truth = data.full.slice(spec.short_train, spec.short_horizon);
  PipelineConfig cfg = spec.pipeline;
  cfg.window_n = 0;
  const Forecaster& f = forecaster ? forecaster : pipeline_forecaster();
  const std::vector<double> pred = f(window, truth.xs(), cfg);
  if (pred.size() != truth.size()) {
    throw Error(ErrorKind::LengthMismatch, spec.name + ": forecaster returned the wrong number of values");
  }
  return {mse(pred, truth.ys()), persistence_mse(window, truth)};
}

namespace {

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

BenchmarkReport run_scenarios(const std::vector<ScenarioSpec>& specs, const Forecaster& forecaster) {
  BenchmarkReport report;
  report.metadata = {{"tool", "lrfnet"},
                     {"timestamp", utc_timestamp()},
                     {"scenarios", std::to_string(specs.size())},
                     {"units", "original"}};
  for (const auto& spec : specs) {
    ScenarioResult row;
    row.name = spec.name;
    row.backend = std::string(to_string(spec.pipeline.backend));
    row.seed = spec.pipeline.seed;
    row.long_requested = spec.long_term;
    row.short_requested = spec.short_term;
    const auto t0 = std::chrono::steady_clock::now();

    if (spec.long_term) {
      try {
        const LongTermResult lt = run_long_term(spec, forecaster);
        row.segments = lt.segments;
        row.mse_long = lt.mse_all;
        row.max_abs_truth = lt.max_abs_truth;
        const ScenarioData data = load_scenario_data(spec);
        for (std::size_t i = 0; i < data.train.size(); ++i) {
          row.plot.push_back({data.train.x(i), data.train.y(i), std::nullopt, true});
        }
        for (std::size_t i = 0; i < lt.truth.size(); ++i) {
          row.plot.push_back({lt.truth.x(i), lt.truth.y(i), lt.predicted[i], false});
        }
      } catch (const std::exception& e) {
        row.long_error = e.what();
        if (row.long_error.empty()) row.long_error = "failed";
      }
    }
    if (spec.short_term) {
      try {
        const ShortTermResult st = run_short_term(spec, forecaster);
        row.mse_short = st.mse;
        row.persistence_mse_short = st.persistence_mse;
      } catch (const std::exception& e) {
        row.short_error = e.what();
        if (row.short_error.empty()) row.short_error = "failed";
      }
    }
    row.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    report.rows.push_back(std::move(row));
  }
  return report;
}

std::vector<ScenarioSpec> math_suite(const PipelineConfig& cfg) {
  std::vector<ScenarioSpec> out;
  for (int k = 1; k <= 6; ++k) {
    ScenarioSpec s;
    s.name = "f" + std::to_string(k);
    const bool periodic = k >= 5;
    const GridSpec train = periodic ? GridSpec{0.0, 1.0, 3050.0} : GridSpec{1.0, 0.01, 10.0};
    const GridSpec test = periodic ? GridSpec{0.0, 1.0, 4050.0} : GridSpec{1.0, 0.01, 20.0};
    s.source = BuiltinSource{s.name, train, test};
    s.pipeline = cfg;
    out.push_back(std::move(s));
  }
  return out;
}

namespace {

using nlohmann::json;

[[noreturn]] void suite_error(const std::string& where, const std::string& what) {
  throw Error(ErrorKind::FormatError, "suite file, " + where + ": " + what);
}

GridSpec read_grid(const json& j, const std::string& where) {
  if (!j.is_object()) suite_error(where, "expected {start, step, end}");
  return {j.at("start").get<double>(), j.at("step").get<double>(), j.at("end").get<double>()};
}

void read_pipeline(const json& j, PipelineConfig& c) {
  if (j.contains("m")) c.m = j.at("m").get<std::size_t>();
  if (j.contains("backend")) c.backend = backend_from_string(j.at("backend").get<std::string>());
  if (j.contains("use_st")) c.use_st = j.at("use_st").get<bool>();
  if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("window_n")) c.window_n = j.at("window_n").get<std::size_t>();
  if (j.contains("gbt")) {
    const auto& g = j.at("gbt");
    c.gbt.n_rounds = g.value("n_rounds", c.gbt.n_rounds);
    c.gbt.max_depth = g.value("max_depth", c.gbt.max_depth);
    c.gbt.shrinkage = g.value("shrinkage", c.gbt.shrinkage);
    c.gbt.min_leaf = g.value("min_leaf", c.gbt.min_leaf);
  }
  if (j.contains("mlp")) {
    const auto& p = j.at("mlp");
    c.mlp.hidden_sizes = p.value("hidden_sizes", c.mlp.hidden_sizes);
    c.mlp.max_epochs = p.value("max_epochs", c.mlp.max_epochs);
    c.mlp.learning_rate = p.value("learning_rate", c.mlp.learning_rate);
    c.mlp.tol = p.value("tol", c.mlp.tol);
  }
}

}  // namespace

std::vector<ScenarioSpec> load_suite_file(const std::filesystem::path& path, const PipelineConfig& defaults) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open suite file '" + path.string() + "'");
  json root;
  try {
    root = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::FormatError, "suite file is not valid JSON: " + std::string(e.what()));
  }
  if (!root.is_object() || !root.contains("scenarios") || !root.at("scenarios").is_array()) {
    suite_error("root", "expected an object with a 'scenarios' array");
  }
  const auto base = path.parent_path();
  std::vector<ScenarioSpec> out;
  std::size_t idx = 0;
  for (const auto& sj : root.at("scenarios")) {
    const std::string where = "scenarios[" + std::to_string(idx++) + "]";
    try {
      ScenarioSpec s;
      s.name = sj.at("name").get<std::string>();
      s.pipeline = defaults;
      if (sj.contains("pipeline")) read_pipeline(sj.at("pipeline"), s.pipeline);
      if (sj.contains("function")) {
        s.source = BuiltinSource{sj.at("function").get<std::string>(), read_grid(sj.at("train"), where + ".train"),
                                 read_grid(sj.at("test"), where + ".test")};
      } else if (sj.contains("csv")) {
        CsvSource c;
        c.path = sj.at("csv").get<std::string>();
        if (c.path.is_relative()) c.path = base / c.path;
        if (sj.contains("column")) {
          const auto& col = sj.at("column");
          c.column = col.is_number_unsigned() ? ColumnSelector(col.get<std::size_t>())
                                              : parse_column_selector(col.get<std::string>());
        }
        c.header = sj.value("header", false);
        c.train_count = sj.value("train_count", std::size_t{0});
        s.source = c;
      } else {
        suite_error(where, "needs either 'function' or 'csv'");
      }
      s.horizon = sj.value("horizon", s.horizon);
      if (sj.contains("segments")) {
        s.segments.clear();
        for (const auto& seg : sj.at("segments")) {
          s.segments.emplace_back(seg.at(0).get<std::size_t>(), seg.at(1).get<std::size_t>());
        }
      }
      s.long_term = sj.value("long_term", s.long_term);
      s.short_term = sj.value("short_term", s.short_term);
      s.short_train = sj.value("short_train", s.short_train);
      s.short_horizon = sj.value("short_horizon", s.short_horizon);
      out.push_back(std::move(s));
    } catch (const json::exception& e) {
      suite_error(where, e.what());
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::FormatError) throw;
      suite_error(where, e.what());
    }
  }
  return out;
}

}  // namespace lrfnet
