#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "lrfnet/bench.hpp"
#include "lrfnet/error.hpp"
#include "lrfnet/pipeline.hpp"

namespace fs = std::filesystem;
using namespace lrfnet;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

// Thrown for bad flag values detected after parsing.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fmt6(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

template <class Fn>
void with_output(const std::string& path, Fn&& fn) {
  if (path.empty() || path == "-") {
    fn(std::cout);
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::IoError, "cannot open '" + path + "' for writing");
  fn(out);
  out.flush();
  if (!out) throw Error(ErrorKind::IoError, "failed writing '" + path + "'");
}

std::size_t column_count(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open '" + path.string() + "'");
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    return static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1;
  }
  throw Error(ErrorKind::EmptyColumn, "'" + path.string() + "' has no rows");
}

// Empty selector means the last column.
ColumnSelector resolve_column(const fs::path& path, const std::string& sel) {
  if (sel.empty()) return column_count(path) - 1;
  return parse_column_selector(sel);
}

bool resolve_header(const fs::path& path, const ColumnSelector& col, const std::string& mode) {
  if (mode == "yes") return true;
  if (mode == "no") return false;
  return csv_has_header(path, col);
}

std::vector<double> read_column(const fs::path& path, const std::string& sel, const std::string& header_mode) {
  const ColumnSelector col = resolve_column(path, sel);
  return read_csv_column(path, col, resolve_header(path, col, header_mode));
}

std::vector<Segment> parse_segments(const std::string& text) {
  std::vector<Segment> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto colon = item.find(':');
    try {
      if (colon == std::string::npos) throw std::invalid_argument(item);
      std::size_t used = 0;
      const auto a = std::stoul(item.substr(0, colon), &used);
      if (used != colon) throw std::invalid_argument(item);
      const auto rest = item.substr(colon + 1);
      const auto b = std::stoul(rest, &used);
      if (used != rest.size() || a < 1 || b < a) throw std::invalid_argument(item);
      out.emplace_back(a, b);
    } catch (const std::logic_error&) {
      throw UsageError("bad segment '" + item + "' (expected first:last with 1 <= first <= last)");
    }
  }
  if (out.empty()) throw UsageError("no segments given");
  return out;
}

void add_model_flags(CLI::App* cmd, PipelineConfig& cfg, std::string& backend) {
  cmd->add_option("--m", cfg.m, "LRF feature dimensions")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--backend", backend, "fine-tune regressor")
      ->check(CLI::IsMember({"linear", "gbt", "mlp"}))
      ->capture_default_str();
  cmd->add_option("--seed", cfg.seed, "random seed")->capture_default_str();
  cmd->add_flag("--no-st{false}", cfg.use_st, "disable the stationary transform");
  cmd->add_option("--rounds", cfg.gbt.n_rounds, "gbt: boosting rounds")->capture_default_str();
  cmd->add_option("--depth", cfg.gbt.max_depth, "gbt: maximum tree depth")->capture_default_str();
  cmd->add_option("--shrinkage", cfg.gbt.shrinkage, "gbt: shrinkage")->capture_default_str();
  cmd->add_option("--min-leaf", cfg.gbt.min_leaf, "gbt: minimum samples per leaf")->capture_default_str();
  cmd->add_option("--hidden", cfg.mlp.hidden_sizes, "mlp: hidden layer sizes, comma separated")
      ->delimiter(',')
      ->capture_default_str();
  cmd->add_option("--epochs", cfg.mlp.max_epochs, "mlp: maximum epochs")->capture_default_str();
  cmd->add_option("--lr", cfg.mlp.learning_rate, "mlp: initial learning rate")->capture_default_str();
  cmd->add_option("--tol", cfg.mlp.tol, "mlp: early-stop tolerance over 50 epochs")->capture_default_str();
}

template <class Fn>
void as_usage(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
}

void print_error(const std::string& msg) { std::cerr << "lrfnet: error: " << msg << '\n'; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Time-series extrapolation with stationary transform, LRF features and a fine-tune regressor"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "show help for every subcommand");

  // synth
  std::string fn, synth_out;
  GridSpec grid;
  auto* synth = app.add_subcommand("synth", "write a built-in test function sampled on a grid as CSV");
  synth->add_option("--fn", fn, "function name")->required()->check(CLI::IsMember({"f1", "f2", "f3", "f4", "f5", "f6"}));
  synth->add_option("--start", grid.start, "first x")->required();
  synth->add_option("--step", grid.step, "grid step (> 0)")->required();
  synth->add_option("--end", grid.end, "last x (inclusive)")->required();
  synth->add_option("--out", synth_out, "output CSV (default stdout)");

  // fit
  PipelineConfig fit_cfg;
  std::string fit_backend = "mlp", fit_input, fit_column, fit_xcol, fit_header = "auto", model_out;
  auto* fit = app.add_subcommand("fit", "train a pipeline on one CSV column and save it");
  fit->add_option("--input", fit_input, "input CSV")->required();
  fit->add_option("--column", fit_column, "value column: 0-based index or header name (default: last column)");
  fit->add_option("--x-column", fit_xcol, "optional column holding a uniform x grid (default: 1..N)");
  fit->add_option("--header", fit_header, "header row: auto, yes or no")
      ->check(CLI::IsMember({"auto", "yes", "no"}))
      ->capture_default_str();
  fit->add_option("--window", fit_cfg.window_n, "training window length, 0 = all samples")->capture_default_str();
  fit->add_option("--model-out", model_out, "where to write the model file")->required();
  add_model_flags(fit, fit_cfg, fit_backend);

  // predict
  std::string model_in, pred_out, plot_out;
  std::size_t horizon = 0;
  auto* predict = app.add_subcommand("predict", "roll a saved pipeline forward");
  predict->add_option("--model", model_in, "model file")->required();
  predict->add_option("--horizon", horizon, "number of steps")->required()->check(CLI::PositiveNumber);
  predict->add_option("--out", pred_out, "forecast CSV (default stdout)");
  predict->add_option("--plot-data", plot_out, "also write x,actual,predicted,split rows here");

  // bench
  PipelineConfig bench_cfg;
  std::string bench_backend = "mlp", suite, report_path, report_fmt = "auto", plot_dir;
  auto* bench = app.add_subcommand("bench", "run a benchmark suite and write a report");
  bench->add_option("--suite", suite, "'math' or a JSON suite file")->required();
  bench->add_option("--report", report_path, "report file");
  bench->add_option("--format", report_fmt, "report format: auto (from extension), json or csv")
      ->check(CLI::IsMember({"auto", "json", "csv"}))
      ->capture_default_str();
  bench->add_option("--plot-dir", plot_dir, "write <scenario>.csv plot data into this existing directory");
  add_model_flags(bench, bench_cfg, bench_backend);

  // eval
  std::string eval_pred, eval_actual, eval_pcol, eval_acol, eval_segments;
  auto* eval = app.add_subcommand("eval", "segmented MAE/MSE between two CSV columns");
  eval->add_option("--pred", eval_pred, "predictions CSV")->required();
  eval->add_option("--actual", eval_actual, "ground-truth CSV")->required();
  eval->add_option("--pred-column", eval_pcol, "column in --pred (default: last column)");
  eval->add_option("--actual-column", eval_acol, "column in --actual (default: last column)");
  eval->add_option("--segments", eval_segments, "1-based step ranges, e.g. 1:500,501:1000 (default: all)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*synth) {
      as_usage([&] { grid.count(); });
      const Series s = gen_function(fn, grid.points());
      with_output(synth_out, [&](std::ostream& out) { write_series_csv(s, out); });
      if (!synth_out.empty()) std::cout << "wrote " << s.size() << " rows to " << synth_out << '\n';
      return kExitOk;
    }

    if (*fit) {
      fit_cfg.backend = backend_from_string(fit_backend);
      as_usage([&] { fit_cfg.validate(); });
      const std::vector<double> ys = read_column(fit_input, fit_column, fit_header);
      std::vector<double> xs;
      if (!fit_xcol.empty()) {
        xs = read_column(fit_input, fit_xcol, fit_header);
        if (xs.size() != ys.size()) throw Error(ErrorKind::LengthMismatch, "x and value columns differ in length");
      } else {
        for (std::size_t i = 0; i < ys.size(); ++i) xs.push_back(static_cast<double>(i + 1));
      }
      const FittedPipeline p = train(Series(std::move(xs), ys), fit_cfg);
      save_file(p, model_out);
      const Series fv = fitted_values(p);
      const std::size_t first = p.train_tail.size() - fv.size();
      const Series actual = p.train_tail.slice(first, fv.size());
      std::cout << "backend " << to_string(p.config.backend) << "  seed " << p.config.seed << "  m " << p.config.m
                << "  st " << to_string(p.st.branch) << "  window " << p.train_tail.size() << '\n'
                << "in-sample MAE " << fmt6(mae(fv, actual)) << " over " << fv.size() << " pairs\n"
                << "model written to " << model_out << '\n';
      return kExitOk;
    }

    if (*predict) {
      const FittedPipeline p = load_file(model_in);
      const Series fc = generalize(p, horizon);
      with_output(pred_out, [&](std::ostream& out) { write_series_csv(fc, out, "x", "y_pred"); });
      if (!plot_out.empty()) {
        std::vector<PlotRow> rows;
        const Series fv = fitted_values(p);
        const std::size_t first = p.train_tail.size() - fv.size();
        for (std::size_t i = 0; i < p.train_tail.size(); ++i) {
          std::optional<double> pred;
          if (i >= first) pred = fv.y(i - first);
          rows.push_back({p.train_tail.x(i), p.train_tail.y(i), pred, true});
        }
        for (std::size_t i = 0; i < fc.size(); ++i) rows.push_back({fc.x(i), std::nullopt, fc.y(i), false});
        with_output(plot_out, [&](std::ostream& out) { emit_plot_rows(rows, out); });
      }
      if (!pred_out.empty()) {
        std::cout << "seed " << p.config.seed << "  wrote " << fc.size() << " rows to " << pred_out << '\n';
      }
      return kExitOk;
    }

    if (*bench) {
      const bool backend_given = bench->count("--backend") > 0;
      bench_cfg.backend = backend_from_string(bench_backend);
      as_usage([&] { bench_cfg.validate(); });
      std::vector<ScenarioSpec> specs;
      if (suite == "math") {
        specs = math_suite(bench_cfg);
      } else {
        specs = load_suite_file(suite, bench_cfg);
        for (auto& s : specs) {
          if (backend_given) s.pipeline.backend = bench_cfg.backend;
          if (bench->count("--seed")) s.pipeline.seed = bench_cfg.seed;
          if (bench->count("--m")) s.pipeline.m = bench_cfg.m;
          if (bench->count("--no-st")) s.pipeline.use_st = false;
        }
      }
      if (!plot_dir.empty() && !fs::is_directory(plot_dir)) {
        throw UsageError("--plot-dir '" + plot_dir + "' is not a directory");
      }
      BenchmarkReport report = run_scenarios(specs);
      report.metadata.emplace_back("suite", suite);

      if (!report_path.empty()) {
        ReportFormat format = ReportFormat::JsonLines;
        if (report_fmt == "auto") {
          format = fs::path(report_path).extension() == ".csv" ? ReportFormat::Csv : ReportFormat::JsonLines;
        } else {
          format = report_format_from_string(report_fmt);
        }
        with_output(report_path, [&](std::ostream& out) { emit_report(report, format, out); });
      }
      if (!plot_dir.empty()) {
        for (const auto& r : report.rows) {
          with_output((fs::path(plot_dir) / (r.name + ".csv")).string(),
                      [&](std::ostream& out) { emit_plot_data(r, out); });
        }
      }

      bool any_failed = false;
      std::printf("%-12s %-7s %6s %14s %14s %14s %10s\n", "scenario", "backend", "seed", "mae_1_500", "mae_501_1000",
                  "mse_short", "wall_s");
      for (const auto& r : report.rows) {
        auto cell = [&](std::size_t k) -> std::string {
          if (!r.long_requested) return "-";
          if (!r.long_error.empty()) return "failed";
          return k < r.segments.size() ? fmt6(r.segments[k].mae) : "-";
        };
        std::string short_cell = "-";
        if (r.short_requested) short_cell = r.short_error.empty() ? fmt6(*r.mse_short) : "failed";
        std::printf("%-12s %-7s %6llu %14s %14s %14s %10s\n", r.name.c_str(), r.backend.c_str(),
                    static_cast<unsigned long long>(r.seed), cell(0).c_str(), cell(1).c_str(), short_cell.c_str(),
                    fmt6(r.wall_s).c_str());
        if (!r.long_error.empty()) std::fprintf(stderr, "%s: long-term failed: %s\n", r.name.c_str(), r.long_error.c_str());
        if (!r.short_error.empty()) {
          std::fprintf(stderr, "%s: short-term failed: %s\n", r.name.c_str(), r.short_error.c_str());
        }
        any_failed = any_failed || !r.ok();
      }
      return any_failed ? kExitFailure : kExitOk;
    }

    if (*eval) {
      const std::vector<double> pred = read_column(eval_pred, eval_pcol, "auto");
      const std::vector<double> actual = read_column(eval_actual, eval_acol, "auto");
      if (pred.size() != actual.size()) {
        throw Error(ErrorKind::LengthMismatch, "prediction has " + std::to_string(pred.size()) +
                                                   " rows but ground truth has " + std::to_string(actual.size()));
      }
      std::vector<Segment> segs = eval_segments.empty() ? std::vector<Segment>{{1, pred.size()}}
                                                        : parse_segments(eval_segments);
      for (const auto& [a, b] : segs) {
        if (b > pred.size()) {
          throw Error(ErrorKind::LengthMismatch, "segment " + std::to_string(a) + ":" + std::to_string(b) +
                                                     " exceeds " + std::to_string(pred.size()) + " rows");
        }
        const std::span<const double> p(pred.data() + a - 1, b - a + 1);
        const std::span<const double> t(actual.data() + a - 1, b - a + 1);
        std::cout << "segment " << a << '-' << b << "  MAE " << fmt6(lrfnet::mae(p, t)) << "  MSE "
                  << fmt6(lrfnet::mse(p, t)) << '\n';
      }
      return kExitOk;
    }
  } catch (const UsageError& e) {
    print_error(e.what());
    return kExitUsage;
  } catch (const Error& e) {
    print_error(e.what());
    return kExitFailure;
  } catch (const std::exception& e) {
    print_error(e.what());
    return kExitFailure;
  }
  return kExitUsage;
}
