#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "lrfnet/pipeline.hpp"
#include "lrfnet/series.hpp"

namespace lrfnet {

// ---------------------------------------------------------------------------
// Data sources

/// Evaluates a built-in test function f1..f6 at x.
double eval_function(std::string_view name, double x);
Series gen_function(std::string_view name, std::span<const double> xs);
bool is_builtin_function(std::string_view name);

/// start, start + step, ... up to end (inclusive within 1e-9 steps).
struct GridSpec {
  double start = 0.0;
  double step = 1.0;
  double end = 0.0;

  std::size_t count() const;
  std::vector<double> points() const;
  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

/// A CSV column chosen by 0-based index or header name.
using ColumnSelector = std::variant<std::size_t, std::string>;

/// Digits select an index, anything else a header name.
ColumnSelector parse_column_selector(std::string_view text);

/// Raw values of one column in file order.
std::vector<double> read_csv_column(const std::filesystem::path& path, const ColumnSelector& column, bool header);
/// Single-column series on the grid 1..N.
Series load_csv(const std::filesystem::path& path, const ColumnSelector& column, bool header);
/// True when the selected cell of the first row does not parse as a number.
bool csv_has_header(const std::filesystem::path& path, const ColumnSelector& column);

void write_series_csv(const Series& s, std::ostream& out, std::string_view x_name = "x",
                      std::string_view y_name = "y");

// ---------------------------------------------------------------------------
// Scenarios

struct BuiltinSource {
  std::string function;
  GridSpec train;
  GridSpec test;
  friend bool operator==(const BuiltinSource&, const BuiltinSource&) = default;
};

struct CsvSource {
  std::filesystem::path path;
  ColumnSelector column = std::size_t{0};
  bool header = false;
  /// Samples used for training; the following samples are ground truth.
  /// 0 means all but the horizon.
  std::size_t train_count = 0;
  friend bool operator==(const CsvSource&, const CsvSource&) = default;
};

using ScenarioSource = std::variant<BuiltinSource, CsvSource>;

/// Closed 1-based step range [first, last] of the forecast.
using Segment = std::pair<std::size_t, std::size_t>;

struct ScenarioSpec {
  std::string name;
  ScenarioSource source;
  PipelineConfig pipeline;
  std::size_t horizon = 1000;
  std::vector<Segment> segments{{1, 500}, {501, 1000}};
  bool long_term = true;
  bool short_term = true;
  std::size_t short_train = 672;
  std::size_t short_horizon = 67;

  void validate() const;
};

/// Training data, ground-truth continuation and the full series for a
/// scenario.
struct ScenarioData {
  Series train;
  Series truth;
  Series full;
};

ScenarioData load_scenario_data(const ScenarioSpec& spec);

/// Produces `future_xs.size()` forecasts following `train`. The default
/// trains the scenario's pipeline and generalizes.
using Forecaster = std::function<std::vector<double>(const Series& train, std::span<const double> future_xs,
                                                     const PipelineConfig& cfg)>;

Forecaster pipeline_forecaster();
/// Looks ground truth up from the scenario source; a harness self-test.
Forecaster oracle_forecaster(const ScenarioSpec& spec);

struct SegmentError {
  Segment range;
  double mae = 0.0;
};

struct LongTermResult {
  std::vector<SegmentError> segments;
  double mae_all = 0.0;
  double mse_all = 0.0;
  double max_abs_truth = 0.0;
  Series truth;
  std::vector<double> predicted;
};

struct ShortTermResult {
  double mse = 0.0;
  double persistence_mse = 0.0;
};

LongTermResult run_long_term(const ScenarioSpec& spec, const Forecaster& forecaster = {});
ShortTermResult run_short_term(const ScenarioSpec& spec, const Forecaster& forecaster = {});

/// Mean squared error of repeating the last training value.
double persistence_mse(const Series& train, const Series& truth);

// ---------------------------------------------------------------------------
// Reports

struct PlotRow {
  double x = 0.0;
  std::optional<double> actual;
  std::optional<double> predicted;
  bool train = true;
};

struct ScenarioResult {
  std::string name;
  std::string backend;
  std::uint64_t seed = 0;
  /// Non-empty when that protocol was requested and failed.
  std::string long_error;
  std::string short_error;
  bool long_requested = false;
  bool short_requested = false;
  std::vector<SegmentError> segments;
  std::optional<double> mse_long;
  std::optional<double> mse_short;
  std::optional<double> persistence_mse_short;
  std::optional<double> max_abs_truth;
  double wall_s = 0.0;
  std::vector<PlotRow> plot;

  bool ok() const { return long_error.empty() && short_error.empty(); }
};

struct BenchmarkReport {
  std::vector<std::pair<std::string, std::string>> metadata;
  std::vector<ScenarioResult> rows;
};

/// Runs every scenario; failures are recorded in their row and never affect
/// other rows.
BenchmarkReport run_scenarios(const std::vector<ScenarioSpec>& specs, const Forecaster& forecaster = {});

enum class ReportFormat { JsonLines, Csv };

ReportFormat report_format_from_string(std::string_view name);

void emit_report(const BenchmarkReport& report, ReportFormat format, std::ostream& out);
/// Columns x, actual, predicted, split; one row per training and forecast
/// sample.
void emit_plot_data(const ScenarioResult& scenario, std::ostream& out);
void emit_plot_rows(std::span<const PlotRow> rows, std::ostream& out);

inline constexpr std::string_view kCsvReportHeader = "scenario,backend,seed,mae_1_500,mae_501_1000,mse_short,wall_s";

/// f1..f6 on their standard grids with a 1000-step horizon.
std::vector<ScenarioSpec> math_suite(const PipelineConfig& cfg);

/// Scenario list from a JSON file. Relative CSV paths resolve against the
/// file's directory.
std::vector<ScenarioSpec> load_suite_file(const std::filesystem::path& path, const PipelineConfig& defaults);

}  // namespace lrfnet
