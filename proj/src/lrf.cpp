#include "lrfnet/lrf.hpp"

#include <string>

#include "lrfnet/error.hpp"

namespace lrfnet {

namespace {

// Writes the predictors of unit `j` (1-based) at position i into `row`.
void fill_row(std::span<const double> ys, std::size_t m, std::size_t j, std::size_t i,
              std::span<const double> shallower, std::span<double> row) {
  const std::size_t e = i - j + 1;
  for (std::size_t l = 0; l < m; ++l) {
    row[l] = ys[e - l];
    row[m + l] = ys[e - l] - ys[e - l - 1];
  }
  for (std::size_t k = 0; k + 1 < j; ++k) row[2 * m + k] = shallower[k];
}

double eval_unit(const LinearUnit& u, std::span<const double> ys, std::size_t m, std::size_t j, std::size_t i,
                 std::span<const double> shallower) {
  const std::size_t e = i - j + 1;
  double acc = u.d;
  for (std::size_t l = 0; l < m; ++l) {
    acc += u.a[l] * ys[e - l];
    acc += u.b[l] * (ys[e - l] - ys[e - l - 1]);
  }
  for (std::size_t k = 0; k + 1 < j; ++k) acc += u.c[k] * shallower[k];
  return acc;
}

void check_length(const Series& s, std::size_t m) {
  if (m == 0) throw Error(ErrorKind::InvalidArgument, "feature dimension m must be >= 1");
  if (s.size() < min_lrf_length(m)) {
    throw Error(ErrorKind::TooShort, "m = " + std::to_string(m) + " needs at least " +
                                         std::to_string(min_lrf_length(m)) + " samples, got " +
                                         std::to_string(s.size()));
  }
}

// Column-wise feature matrix: values(i, j-1) for every i >= first_position.
Matrix feature_columns(const LrfModel& model, std::span<const double> ys) {
  const std::size_t n = ys.size();
  const std::size_t m = model.m;
  Matrix v(n, m);
  for (std::size_t j = 1; j <= m; ++j) {
    for (std::size_t i = j + m - 1; i < n; ++i) {
      v(i, j - 1) = eval_unit(model.units[j - 1], ys, m, j, i, v.row(i));
    }
  }
  return v;
}

}  // namespace

LrfModel fit_lrf(const Series& s, std::size_t m, double ridge_lambda) {
  check_length(s, m);
  const auto ys = s.ys();
  const std::size_t n = ys.size();

  LrfModel model;
  model.m = m;
  model.ridge_lambda = ridge_lambda;
  Matrix v(n, m);

  for (std::size_t j = 1; j <= m; ++j) {
    const std::size_t first = j + m - 1;
    const std::size_t rows = n - 1 - first;
    Matrix design(rows, 2 * m + (j - 1));
    std::vector<double> target(rows);
    for (std::size_t r = 0; r < rows; ++r) {
      const std::size_t i = first + r;
      fill_row(ys, m, j, i, v.row(i), design.row(r));
      target[r] = ys[i + 1];
    }
    const LinearFit fit = least_squares(design, target, ridge_lambda);

    LinearUnit unit;
    unit.a.assign(fit.coef.begin(), fit.coef.begin() + static_cast<std::ptrdiff_t>(m));
    unit.b.assign(fit.coef.begin() + static_cast<std::ptrdiff_t>(m),
                  fit.coef.begin() + static_cast<std::ptrdiff_t>(2 * m));
    unit.c.assign(fit.coef.begin() + static_cast<std::ptrdiff_t>(2 * m), fit.coef.end());
    unit.d = fit.intercept;

    for (std::size_t i = first; i < n; ++i) v(i, j - 1) = eval_unit(unit, ys, m, j, i, v.row(i));
    model.units.push_back(std::move(unit));
  }
  return model;
}

FeatureVector encode(const LrfModel& model, std::span<const double> ys, std::size_t i) {
  if (model.m == 0 || model.units.size() != model.m) {
    throw Error(ErrorKind::InvalidArgument, "LRF model is not fitted");
  }
  if (i < model.first_position() || i >= ys.size()) {
    throw Error(ErrorKind::OutOfWindow, "position " + std::to_string(i) + " needs indices [" +
                                            std::to_string(model.first_position()) + ", " +
                                            std::to_string(ys.size()) + ")");
  }
  FeatureVector out;
  out.position = i;
  out.values.resize(model.m);
  for (std::size_t j = 1; j <= model.m; ++j) {
    out.values[j - 1] = eval_unit(model.units[j - 1], ys, model.m, j, i, out.values);
  }
  return out;
}

FeatureVector encode(const LrfModel& model, const Series& s, std::size_t i) { return encode(model, s.ys(), i); }

TrainingSet encode_training_set(const LrfModel& model, const Series& s) {
  check_length(s, model.m);
  const auto ys = s.ys();
  const Matrix v = feature_columns(model, ys);
  const std::size_t first = model.first_position();
  const std::size_t rows = ys.size() - 1 - first;

  TrainingSet out;
  out.features = Matrix(rows, model.m);
  out.targets.resize(rows);
  out.positions.resize(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t i = first + r;
    for (std::size_t j = 0; j < model.m; ++j) out.features(r, j) = v(i, j);
    out.targets[r] = ys[i + 1];
    out.positions[r] = i;
  }
  return out;
}

}  // namespace lrfnet
