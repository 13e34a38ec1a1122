#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <string>

#include "lrfnet/bench.hpp"
#include "lrfnet/error.hpp"

namespace lrfnet {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\"");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\"");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    cells.push_back(trim(std::string_view(line).substr(start, comma == std::string::npos ? std::string::npos
                                                                                          : comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return cells;
}

std::optional<double> parse_double(const std::string& cell) {
  if (cell.empty()) return std::nullopt;
  double v = 0.0;
  const char* first = cell.data();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::ifstream open(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open '" + path.string() + "'");
  return in;
}

bool blank(const std::string& line) { return line.find_first_not_of(" \t\r") == std::string::npos; }

}  // namespace

ColumnSelector parse_column_selector(std::string_view text) {
  if (!text.empty() && text.find_first_not_of("0123456789") == std::string_view::npos) {
    std::size_t idx = 0;
    std::from_chars(text.data(), text.data() + text.size(), idx);
    return idx;
  }
  return std::string(text);
}

std::vector<double> read_csv_column(const std::filesystem::path& path, const ColumnSelector& column, bool header) {
  auto in = open(path);
  std::string line;
  std::size_t row = 0;
  std::size_t col = 0;
  bool resolved = std::holds_alternative<std::size_t>(column);
  if (resolved) col = std::get<std::size_t>(column);
  if (!resolved && !header) {
    throw Error(ErrorKind::InvalidArgument, "a column name requires a header row");
  }

  if (header) {
    bool found = false;
    while (!found && std::getline(in, line)) found = !blank(line);
    if (!found) throw Error(ErrorKind::EmptyColumn, "'" + path.string() + "' has no rows");
    if (!resolved) {
      const auto names = split_row(line);
      const auto& want = std::get<std::string>(column);
      auto it = std::find(names.begin(), names.end(), want);
      if (it == names.end()) {
        throw Error(ErrorKind::InvalidArgument, "no column named '" + want + "' in '" + path.string() + "'");
      }
      col = static_cast<std::size_t>(it - names.begin());
    }
  }

  std::vector<double> values;
  while (std::getline(in, line)) {
    if (blank(line)) continue;
    ++row;
    const auto cells = split_row(line);
    if (col >= cells.size()) {
      throw Error(ErrorKind::ParseError,
                  "row " + std::to_string(row) + ", column " + std::to_string(col + 1) + ": missing field");
    }
    const auto v = parse_double(cells[col]);
    if (!v) {
      throw Error(ErrorKind::ParseError, "row " + std::to_string(row) + ", column " + std::to_string(col + 1) +
                                             ": cannot parse '" + cells[col] + "' as a number");
    }
    values.push_back(*v);
  }
  if (in.bad()) throw Error(ErrorKind::IoError, "failed reading '" + path.string() + "'");
  if (values.empty()) throw Error(ErrorKind::EmptyColumn, "no data rows in '" + path.string() + "'");
  return values;
}

Series load_csv(const std::filesystem::path& path, const ColumnSelector& column, bool header) {
  return Series::from_values(read_csv_column(path, column, header));
}

bool csv_has_header(const std::filesystem::path& path, const ColumnSelector& column) {
  if (std::holds_alternative<std::string>(column)) return true;
  auto in = open(path);
  std::string line;
  while (std::getline(in, line)) {
    if (blank(line)) continue;
    const auto cells = split_row(line);
    const auto col = std::get<std::size_t>(column);
    return col < cells.size() && !parse_double(cells[col]);
  }
  return false;
}

void write_series_csv(const Series& s, std::ostream& out, std::string_view x_name, std::string_view y_name) {
  const auto old = out.precision(17);
  out << x_name << ',' << y_name << '\n';
  for (std::size_t i = 0; i < s.size(); ++i) out << s.x(i) << ',' << s.y(i) << '\n';
  out.precision(old);
  if (!out) throw Error(ErrorKind::IoError, "failed writing series");
}

}  // namespace lrfnet
