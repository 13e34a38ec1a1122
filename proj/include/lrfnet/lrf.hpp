#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "lrfnet/linalg.hpp"
#include "lrfnet/series.hpp"

namespace lrfnet {

/// One linear regression unit R_j of the feature stack.
///
/// Predicts y[e + 1 + (j - 1)] from the lag window ending at e = i - j + 1:
///   a[0] * y[e] + ... + a[m-1] * y[e-m+1]
/// + b[0] * dy[e] + ... + b[m-1] * dy[e-m+1]
/// + c[0] * v[0] + ... + c[j-2] * v[j-2] + d
/// where dy[t] = y[t] - y[t-1] and v are the shallower feature values at i.
struct LinearUnit {
  std::vector<double> a;
  std::vector<double> b;
  std::vector<double> c;
  double d = 0.0;

  friend bool operator==(const LinearUnit&, const LinearUnit&) = default;
};

struct LrfModel {
  std::size_t m = 0;
  std::vector<LinearUnit> units;
  double ridge_lambda = 0.0;

  /// First 0-based position with a full lag window for the deepest unit.
  std::size_t first_position() const noexcept { return 2 * m - 1; }

  friend bool operator==(const LrfModel&, const LrfModel&) = default;
};

struct FeatureVector {
  std::vector<double> values;
  std::size_t position = 0;
};

/// Feature rows and one-step-ahead targets, one per position in
/// [first_position(), n - 2].
struct TrainingSet {
  Matrix features;
  std::vector<double> targets;
  std::vector<std::size_t> positions;
};

inline constexpr std::size_t min_lrf_length(std::size_t m) { return 2 * m + 3; }

/// Fits units 1..m in order; unit j regresses y[i+1] on its lag window and
/// the outputs of units 1..j-1 over every position with a full window.
LrfModel fit_lrf(const Series& s, std::size_t m, double ridge_lambda = 0.0);

/// Features at 0-based position i. Throws OutOfWindow when i < 2m - 1 or
/// i >= ys.size().
FeatureVector encode(const LrfModel& model, std::span<const double> ys, std::size_t i);
FeatureVector encode(const LrfModel& model, const Series& s, std::size_t i);

TrainingSet encode_training_set(const LrfModel& model, const Series& s);

}  // namespace lrfnet
