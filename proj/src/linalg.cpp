#include "lrfnet/linalg.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <algorithm>
#include <limits>

#include "lrfnet/error.hpp"

namespace lrfnet {

double LinearFit::predict(std::span<const double> x) const {
  if (x.size() != coef.size()) {
    throw Error(ErrorKind::DimensionMismatch,
                "expected " + std::to_string(coef.size()) + " inputs, got " + std::to_string(x.size()));
  }
  double acc = intercept;
  for (std::size_t i = 0; i < x.size(); ++i) acc += coef[i] * x[i];
  return acc;
}

LinearFit least_squares(const Matrix& x, std::span<const double> y, double ridge_lambda) {
  const auto n = static_cast<Eigen::Index>(x.rows());
  const auto p = static_cast<Eigen::Index>(x.cols());
  if (n == 0) throw Error(ErrorKind::EmptyData, "least squares needs at least one row");
  if (static_cast<std::size_t>(n) != y.size()) {
    throw Error(ErrorKind::LengthMismatch, "design has " + std::to_string(n) + " rows, targets " +
                                               std::to_string(y.size()));
  }
  if (ridge_lambda < 0.0) throw Error(ErrorKind::InvalidArgument, "ridge_lambda must be >= 0");
  if (std::all_of(y.begin(), y.end(), [&](double v) { return v == y[0]; })) {
    // constant target: the intercept-only fit is exact, skip the SVD round-off
    return LinearFit{std::vector<double>(static_cast<std::size_t>(p), 0.0), y[0]};
  }

  const Eigen::Index extra = ridge_lambda > 0.0 ? p : 0;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n + extra, p + 1);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n + extra);
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = 0; c < p; ++c) a(r, c) = x(static_cast<std::size_t>(r), static_cast<std::size_t>(c));
    a(r, p) = 1.0;
    b(r) = y[static_cast<std::size_t>(r)];
  }
  if (extra > 0) {
    const double s = std::sqrt(ridge_lambda);
    for (Eigen::Index c = 0; c < p; ++c) a(n + c, c) = s;
  }

  Eigen::BDCSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  svd.setThreshold(std::numeric_limits<double>::epsilon() * static_cast<double>(std::max(a.rows(), a.cols())));
  const Eigen::VectorXd sol = svd.solve(b);

  LinearFit fit;
  fit.coef.assign(sol.data(), sol.data() + p);
  fit.intercept = sol(p);
  return fit;
}

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error(ErrorKind::LengthMismatch, "fit_line: x and y differ in length");
  if (x.empty()) throw Error(ErrorKind::EmptyData, "fit_line: no points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) return {0.0, my};
  const double slope = sxy / sxx;
  return {slope, my - slope * mx};
}

}  // namespace lrfnet
