#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace lrfnet {

/// Ordered real-valued samples over a strictly increasing index grid.
///
/// Construction validates: equal nonzero lengths, strictly increasing xs and
/// finite values. A Series is immutable afterwards.
class Series {
 public:
  Series(std::vector<double> xs, std::vector<double> ys);

  /// ys on the default grid 1..n.
  static Series from_values(std::vector<double> ys);

  std::size_t size() const noexcept { return ys_.size(); }
  std::span<const double> xs() const noexcept { return xs_; }
  std::span<const double> ys() const noexcept { return ys_; }
  double x(std::size_t i) const { return xs_.at(i); }
  double y(std::size_t i) const { return ys_.at(i); }

  double min_y() const noexcept;
  double max_y() const noexcept;

  /// Samples [first, first + count).
  Series slice(std::size_t first, std::size_t count) const;
  /// Same grid, new values.
  Series with_values(std::vector<double> ys) const;

  friend bool operator==(const Series&, const Series&) = default;

 private:
  std::vector<double> xs_;
  std::vector<double> ys_;
};

/// Min-max scaling parameters. `bypass` marks a constant series for which
/// normalization is the identity.
struct NormParams {
  double y_min = 0.0;
  double y_max = 1.0;
  bool bypass = false;

  static NormParams identity() { return {0.0, 1.0, true}; }

  double forward(double y) const { return bypass ? y : (y - y_min) / (y_max - y_min); }
  double inverse(double v) const { return bypass ? v : v * (y_max - y_min) + y_min; }

  friend bool operator==(const NormParams&, const NormParams&) = default;
};

struct Normalized {
  Series series;
  NormParams params;
};

/// Throws DegenerateRange when max == min.
Normalized normalize_01(const Series& s);
/// Applies `p` to every sample; throws DegenerateRange for invalid params.
Series apply_norm(const Series& s, const NormParams& p);
Series denormalize_01(const Series& s, const NormParams& p);

/// First difference; xs' = xs[1..]. Throws TooShort for n < 2.
Series diff(const Series& s);
/// Running sum with the same grid.
Series cumsum(const Series& s);

double mae(const Series& pred, const Series& actual);
double mse(const Series& pred, const Series& actual);
double mae(std::span<const double> pred, std::span<const double> actual);
double mse(std::span<const double> pred, std::span<const double> actual);

/// True when consecutive steps agree within a relative tolerance.
bool is_uniform_grid(std::span<const double> xs, double rel_tol = 1e-6);

double mean(std::span<const double> v);
/// Sample standard deviation (n - 1 denominator); 0 for n < 2.
double stddev(std::span<const double> v);

}  // namespace lrfnet
