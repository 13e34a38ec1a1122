#include "lrfnet/series.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "lrfnet/error.hpp"

namespace lrfnet {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::DegenerateRange: return "DegenerateRange";
    case ErrorKind::TooShort: return "TooShort";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::NonPositiveInput: return "NonPositiveInput";
    case ErrorKind::NonPositiveDenominator: return "NonPositiveDenominator";
    case ErrorKind::GridMismatch: return "GridMismatch";
    case ErrorKind::OutOfWindow: return "OutOfWindow";
    case ErrorKind::EmptyData: return "EmptyData";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::FormatError: return "FormatError";
    case ErrorKind::UnknownFunction: return "UnknownFunction";
    case ErrorKind::DomainError: return "DomainError";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::EmptyColumn: return "EmptyColumn";
  }
  return "Unknown";
}

Series::Series(std::vector<double> xs, std::vector<double> ys) : xs_(std::move(xs)), ys_(std::move(ys)) {
  if (xs_.empty() || ys_.empty()) {
    throw Error(ErrorKind::EmptyData, "series must be nonempty");
  }
  if (xs_.size() != ys_.size()) {
    throw Error(ErrorKind::LengthMismatch,
                "xs has " + std::to_string(xs_.size()) + " samples, ys has " + std::to_string(ys_.size()));
  }
  for (std::size_t i = 0; i < xs_.size(); ++i) {
    if (!std::isfinite(xs_[i]) || !std::isfinite(ys_[i])) {
      throw Error(ErrorKind::NonFinite, "non-finite sample at index " + std::to_string(i));
    }
    if (i > 0 && !(xs_[i] > xs_[i - 1])) {
      throw Error(ErrorKind::InvalidArgument, "xs not strictly increasing at index " + std::to_string(i));
    }
  }
}

Series Series::from_values(std::vector<double> ys) {
  std::vector<double> xs(ys.size());
  std::iota(xs.begin(), xs.end(), 1.0);
  return Series(std::move(xs), std::move(ys));
}

double Series::min_y() const noexcept { return *std::min_element(ys_.begin(), ys_.end()); }
double Series::max_y() const noexcept { return *std::max_element(ys_.begin(), ys_.end()); }

Series Series::slice(std::size_t first, std::size_t count) const {
  if (count == 0 || first + count > size()) {
    throw Error(ErrorKind::OutOfWindow, "slice [" + std::to_string(first) + ", " + std::to_string(first + count) +
                                            ") outside series of length " + std::to_string(size()));
  }
  return Series(std::vector<double>(xs_.begin() + first, xs_.begin() + first + count),
                std::vector<double>(ys_.begin() + first, ys_.begin() + first + count));
}

Series Series::with_values(std::vector<double> ys) const { return Series(xs_, std::move(ys)); }

Normalized normalize_01(const Series& s) {
  const double lo = s.min_y();
  const double hi = s.max_y();
  if (!(hi > lo)) {
    throw Error(ErrorKind::DegenerateRange, "series is constant, range is zero");
  }
  NormParams p{lo, hi, false};
  return {apply_norm(s, p), p};
}

Series apply_norm(const Series& s, const NormParams& p) {
  if (!p.bypass && !(p.y_max > p.y_min)) {
    throw Error(ErrorKind::DegenerateRange, "y_max must exceed y_min");
  }
  std::vector<double> out(s.size());
  std::transform(s.ys().begin(), s.ys().end(), out.begin(), [&](double y) { return p.forward(y); });
  return s.with_values(std::move(out));
}

Series denormalize_01(const Series& s, const NormParams& p) {
  std::vector<double> out(s.size());
  std::transform(s.ys().begin(), s.ys().end(), out.begin(), [&](double v) { return p.inverse(v); });
  return s.with_values(std::move(out));
}

Series diff(const Series& s) {
  if (s.size() < 2) {
    throw Error(ErrorKind::TooShort, "diff needs at least 2 samples");
  }
  std::vector<double> xs(s.xs().begin() + 1, s.xs().end());
  std::vector<double> ys(s.size() - 1);
  for (std::size_t j = 0; j + 1 < s.size(); ++j) {
    ys[j] = s.ys()[j + 1] - s.ys()[j];
  }
  return Series(std::move(xs), std::move(ys));
}

Series cumsum(const Series& s) {
  std::vector<double> ys(s.size());
  std::partial_sum(s.ys().begin(), s.ys().end(), ys.begin());
  return s.with_values(std::move(ys));
}

namespace {

void check_pair(std::span<const double> pred, std::span<const double> actual) {
  if (pred.size() != actual.size()) {
    throw Error(ErrorKind::LengthMismatch,
                "pred has " + std::to_string(pred.size()) + " values, actual has " + std::to_string(actual.size()));
  }
  if (pred.empty()) {
    throw Error(ErrorKind::EmptyData, "metrics need at least one value");
  }
}

}  // namespace

double mae(std::span<const double> pred, std::span<const double> actual) {
  check_pair(pred, actual);
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) acc += std::abs(pred[i] - actual[i]);
  return acc / static_cast<double>(pred.size());
}

double mse(std::span<const double> pred, std::span<const double> actual) {
  check_pair(pred, actual);
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double e = pred[i] - actual[i];
    acc += e * e;
  }
  return acc / static_cast<double>(pred.size());
}

double mae(const Series& pred, const Series& actual) { return mae(pred.ys(), actual.ys()); }
double mse(const Series& pred, const Series& actual) { return mse(pred.ys(), actual.ys()); }

bool is_uniform_grid(std::span<const double> xs, double rel_tol) {
  if (xs.size() < 3) return true;
  const double step = (xs.back() - xs.front()) / static_cast<double>(xs.size() - 1);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double expected = xs.front() + step * static_cast<double>(i);
    if (std::abs(xs[i] - expected) > rel_tol * std::abs(step)) return false;
  }
  return true;
}

double mean(std::span<const double> v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double stddev(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double acc = 0.0;
  for (double x : v) acc += (x - m) * (x - m);
  return std::sqrt(acc / static_cast<double>(v.size() - 1));
}

}  // namespace lrfnet
