#include <cstdio>
#include <ostream>
#include <string>

#include <json.hpp>

#include "lrfnet/bench.hpp"
#include "lrfnet/error.hpp"

namespace lrfnet {

namespace {

using ojson = nlohmann::ordered_json;

std::string full_precision(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_cell(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

ojson opt(const std::optional<double>& v) { return v ? ojson(*v) : ojson(nullptr); }

void check(std::ostream& out) {
  if (!out) throw Error(ErrorKind::IoError, "failed writing report");
}

}  // namespace

ReportFormat report_format_from_string(std::string_view name) {
  if (name == "json" || name == "jsonl" || name == "json-lines") return ReportFormat::JsonLines;
  if (name == "csv") return ReportFormat::Csv;
  throw Error(ErrorKind::InvalidArgument, "unknown report format '" + std::string(name) + "' (expected json or csv)");
}

void emit_report(const BenchmarkReport& report, ReportFormat format, std::ostream& out) {
  if (format == ReportFormat::JsonLines) {
    ojson meta = ojson::object();
    for (const auto& [k, v] : report.metadata) meta[k] = v;
    out << ojson{{"metadata", meta}}.dump() << '\n';
    for (const auto& r : report.rows) {
      ojson row;
      row["scenario"] = r.name;
      row["backend"] = r.backend;
      row["seed"] = r.seed;
      row["status"] = r.ok() ? "ok" : "failed";
      ojson segs = ojson::array();
      for (const auto& s : r.segments) {
        segs.push_back({{"first", s.range.first}, {"last", s.range.second}, {"mae", s.mae}});
      }
      row["segments"] = segs;
      row["mse_long"] = opt(r.mse_long);
      row["max_abs_truth"] = opt(r.max_abs_truth);
      row["mse_short"] = opt(r.mse_short);
      row["persistence_mse_short"] = opt(r.persistence_mse_short);
      row["long_error"] = r.long_error.empty() ? ojson(nullptr) : ojson(r.long_error);
      row["short_error"] = r.short_error.empty() ? ojson(nullptr) : ojson(r.short_error);
      row["wall_s"] = r.wall_s;
      out << row.dump() << '\n';
    }
    check(out);
    return;
  }

  out << kCsvReportHeader << '\n';
  for (const auto& r : report.rows) {
    auto seg = [&](std::size_t k) -> std::string {
      if (!r.long_requested) return "";
      if (!r.long_error.empty()) return "failed";
      return k < r.segments.size() ? full_precision(r.segments[k].mae) : "";
    };
    std::string short_cell;
    if (r.short_requested) short_cell = r.short_error.empty() ? full_precision(*r.mse_short) : "failed";
    out << csv_cell(r.name) << ',' << csv_cell(r.backend) << ',' << r.seed << ',' << seg(0) << ',' << seg(1) << ','
        << short_cell << ',' << full_precision(r.wall_s) << '\n';
  }
  check(out);
}

void emit_plot_data(const ScenarioResult& scenario, std::ostream& out) { emit_plot_rows(scenario.plot, out); }

void emit_plot_rows(std::span<const PlotRow> rows, std::ostream& out) {
  out << "x,actual,predicted,split\n";
  for (const auto& row : rows) {
    out << full_precision(row.x) << ',' << (row.actual ? full_precision(*row.actual) : std::string()) << ','
        << (row.predicted ? full_precision(*row.predicted) : std::string()) << ',' << (row.train ? "train" : "test")
        << '\n';
  }
  check(out);
}

}  // namespace lrfnet
