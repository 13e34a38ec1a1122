#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "lrfnet/series.hpp"

namespace lrfnet {

enum class StBranch { Identity, PolyDiff, Exponential };

std::string_view to_string(StBranch b);
StBranch st_branch_from_string(std::string_view name);

/// Fitted trend denominator g(x) mapping a trending series to the
/// near-stationary S(x) = (y + 1) / g(x).
///
///   PolyDiff:    g(x) = a2 * C(x) + b2, C(x_k) = sum_{i<=k} exp(a1 * x_i + b1)
///   Exponential: g(x) = a2 * exp(a1 * x + b1) + b2
///   Identity:    S(x) = y
///
/// C is a running sum over the training grid, continued past the window on
/// the same step starting from `cum_state`.
struct StationaryModel {
  StBranch branch = StBranch::Identity;
  double a1 = 0.0;
  double b1 = 0.0;
  double a2 = 1.0;
  double b2 = 0.0;
  std::optional<double> k_est;
  std::optional<double> base_est;
  std::vector<double> train_xs;
  double cum_state = 0.0;

  /// Uniform step of the training grid (0 for fewer than 2 samples).
  double step() const;
  /// Grid index of x relative to train_xs[0]; throws GridMismatch when x is
  /// off-grid or before the window.
  std::size_t grid_index(double x) const;
  /// g(x); PolyDiff requires x on the training grid or its continuation.
  double denominator(double x) const;
  /// g over many points in O(len + max grid index).
  std::vector<double> denominators(std::span<const double> xs) const;

  friend bool operator==(const StationaryModel&, const StationaryModel&) = default;
};

/// Slope of the OLS fit of log(y) on log(x) over samples with x > 0 and y > 0.
/// Throws NonPositiveInput when fewer than two such samples exist.
double estimate_poly_order(const Series& s);

/// exp(slope) of the OLS fit of log(y) on x over samples with y > 0.
double estimate_exp_base(const Series& s);

/// Residual sums of squares of the two trend candidates against Y1 = y + 1,
/// each fitted as Y1 ~ c * basis + d. Empty when a candidate is not defined.
struct BranchScores {
  std::optional<double> power_sse;
  std::optional<double> exp_sse;
  std::optional<double> k_est;
  std::optional<double> base_est;
};

BranchScores score_branches(const Series& s);

/// Minimum samples for fit_stationary.
inline constexpr std::size_t kMinStationaryLength = 8;
/// Relative range below which the series is treated as constant.
inline constexpr double kConstantRelRange = 1e-6;
/// Smallest admissible denominator.
inline constexpr double kMinDenominator = 1e-12;

StationaryModel fit_stationary(const Series& s);

/// S(x) for every sample. Throws NonPositiveDenominator when g(x) <= 1e-12.
Series apply_stationary(const StationaryModel& m, const Series& s);

/// y = s_val * g(x) - 1 (s_val for Identity).
double invert_stationary(const StationaryModel& m, double s_val, double x);

/// Walks g over the grid points following the training window, one step per
/// call, in O(1). Holds its own copy of the running sum so the model is never
/// mutated.
class TrendCursor {
 public:
  explicit TrendCursor(const StationaryModel& m);

  /// x of the next grid point.
  double next_x() const;
  /// g at next_x(), then advances.
  double advance();

 private:
  const StationaryModel* model_;
  std::size_t next_index_;
  double cum_;
};

}  // namespace lrfnet
