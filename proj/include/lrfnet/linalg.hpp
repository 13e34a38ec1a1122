#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace lrfnet {

/// Dense row-major matrix used for feature/design matrices.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> data() const noexcept { return data_; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct LinearFit {
  std::vector<double> coef;
  double intercept = 0.0;

  double predict(std::span<const double> x) const;
};

/// Least squares with an unpenalized intercept.
///
/// ridge_lambda == 0 gives the minimum-norm solution from a truncated SVD
/// (singular values below eps * max(rows, cols) * sigma_max are dropped), so
/// collinear or constant columns never make the solve fail. ridge_lambda > 0
/// appends sqrt(lambda) * I rows for the non-intercept coefficients.
LinearFit least_squares(const Matrix& x, std::span<const double> y, double ridge_lambda = 0.0);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
};

/// Simple OLS line y = slope * x + intercept (centered sums). Needs >= 2 points
/// with distinct x; otherwise slope is 0 and intercept is mean(y).
LineFit fit_line(std::span<const double> x, std::span<const double> y);

}  // namespace lrfnet
