#include "lrfnet/regress.hpp"

#include <string>

#include "lrfnet/error.hpp"

namespace lrfnet {

std::string_view to_string(Backend b) {
  switch (b) {
    case Backend::Linear: return "linear";
    case Backend::Gbt: return "gbt";
    case Backend::Mlp: return "mlp";
  }
  return "linear";
}

Backend backend_from_string(std::string_view name) {
  if (name == "linear") return Backend::Linear;
  if (name == "gbt") return Backend::Gbt;
  if (name == "mlp") return Backend::Mlp;
  throw Error(ErrorKind::InvalidArgument, "unknown backend '" + std::string(name) + "'");
}

void GbtParams::validate() const {
  if (n_rounds < 1) throw Error(ErrorKind::InvalidArgument, "gbt n_rounds must be >= 1");
  if (max_depth < 1) throw Error(ErrorKind::InvalidArgument, "gbt max_depth must be >= 1");
  if (!(shrinkage > 0.0 && shrinkage <= 1.0)) throw Error(ErrorKind::InvalidArgument, "gbt shrinkage must be in (0, 1]");
  if (min_leaf < 1) throw Error(ErrorKind::InvalidArgument, "gbt min_leaf must be >= 1");
}

void MlpParams::validate() const {
  if (hidden_sizes.empty()) throw Error(ErrorKind::InvalidArgument, "mlp needs at least one hidden layer");
  for (int h : hidden_sizes) {
    if (h < 1) throw Error(ErrorKind::InvalidArgument, "mlp hidden sizes must be >= 1");
  }
  if (max_epochs < 0) throw Error(ErrorKind::InvalidArgument, "mlp max_epochs must be >= 0");
  if (!(learning_rate > 0.0)) throw Error(ErrorKind::InvalidArgument, "mlp learning_rate must be > 0");
  if (!(tol >= 0.0)) throw Error(ErrorKind::InvalidArgument, "mlp tol must be >= 0");
}

Backend Regressor::backend() const noexcept {
  switch (impl_.index()) {
    case 1: return Backend::Gbt;
    case 2: return Backend::Mlp;
    default: return Backend::Linear;
  }
}

double Regressor::predict(std::span<const double> x) const {
  if (x.size() != n_features_) {
    throw Error(ErrorKind::DimensionMismatch, "regressor fitted on " + std::to_string(n_features_) +
                                                  " features, got " + std::to_string(x.size()));
  }
  return std::visit([&](const auto& m) { return m.predict(x); }, impl_);
}

Regressor fit_linear(const Matrix& x, std::span<const double> y) {
  if (x.rows() == 0 || y.empty()) throw Error(ErrorKind::EmptyData, "linear backend needs at least one row");
  return Regressor(LinearModel{least_squares(x, y, 0.0)}, x.cols(), 0);
}

}  // namespace lrfnet
