#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "lrfnet/linalg.hpp"

namespace lrfnet {

enum class Backend { Linear, Gbt, Mlp };

std::string_view to_string(Backend b);
Backend backend_from_string(std::string_view name);

struct GbtParams {
  int n_rounds = 200;
  int max_depth = 3;
  double shrinkage = 0.1;
  int min_leaf = 2;

  void validate() const;
  friend bool operator==(const GbtParams&, const GbtParams&) = default;
};

struct MlpParams {
  std::vector<int> hidden_sizes{10};
  int max_epochs = 2000;
  double learning_rate = 0.1;
  double tol = 1e-7;

  void validate() const;
  friend bool operator==(const MlpParams&, const MlpParams&) = default;
};

// ---------------------------------------------------------------------------
// Boosted trees

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;

  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

struct RegressionTree {
  std::vector<TreeNode> nodes;

  double predict(std::span<const double> x) const;
  friend bool operator==(const RegressionTree&, const RegressionTree&) = default;
};

struct GbtModel {
  GbtParams params;
  double base = 0.0;
  std::vector<RegressionTree> trees;
  /// Training MSE after the mean model and after each round.
  std::vector<double> train_mse;

  double predict(std::span<const double> x) const;
  friend bool operator==(const GbtModel&, const GbtModel&) = default;
};

/// Exact greedy regression tree on (x, residual): variance-reduction splits,
/// ties broken toward the lowest feature index, then the lowest threshold.
RegressionTree fit_tree(const Matrix& x, std::span<const double> residual, int max_depth, int min_leaf);

// ---------------------------------------------------------------------------
// Feedforward net

/// Fully connected tanh network with a linear skip path from the inputs to
/// the scalar output:
///
///   out = b_out + w_skip . x + w_out . h_L(... h_1(x))
///
/// Flat parameter layout: [W_1, b_1, ..., W_L, b_L, w_out, w_skip, b_out],
/// W_l row-major (units x fan_in).
class MlpNet {
 public:
  MlpNet() = default;
  MlpNet(std::size_t inputs, std::vector<std::size_t> hidden);

  std::size_t inputs() const noexcept { return inputs_; }
  const std::vector<std::size_t>& hidden() const noexcept { return hidden_; }
  std::size_t num_params() const noexcept { return params_.size(); }
  std::span<const double> params() const noexcept { return params_; }
  std::vector<double>& mutable_params() noexcept { return params_; }

  /// Offsets into the flat parameter vector.
  std::size_t weight_offset(std::size_t layer) const { return offsets_.at(layer); }
  std::size_t output_offset() const { return offsets_.back(); }
  std::size_t skip_offset() const { return offsets_.back() + hidden_.back(); }
  std::size_t bias_offset() const { return skip_offset() + inputs_; }

  double forward(std::span<const double> x) const;

  /// Mean squared error over the rows of x; fills `grad` (resized to
  /// num_params()) when non-null.
  double loss(const Matrix& x, std::span<const double> y, std::vector<double>* grad) const;

  friend bool operator==(const MlpNet&, const MlpNet&) = default;

 private:
  std::size_t inputs_ = 0;
  std::vector<std::size_t> hidden_;
  std::vector<std::size_t> offsets_;
  std::vector<double> params_;
};

struct MlpModel {
  MlpParams params;
  std::vector<double> x_mean;
  std::vector<double> x_scale;
  double y_mean = 0.0;
  double y_scale = 1.0;
  MlpNet net;
  double train_mse = 0.0;
  int epochs_run = 0;

  double predict(std::span<const double> x) const;
  friend bool operator==(const MlpModel&, const MlpModel&) = default;
};

// ---------------------------------------------------------------------------

struct LinearModel {
  LinearFit fit;
  double predict(std::span<const double> x) const { return fit.predict(x); }
  friend bool operator==(const LinearModel& a, const LinearModel& b) {
    return a.fit.coef == b.fit.coef && a.fit.intercept == b.fit.intercept;
  }
};

/// A fitted fine-tune regressor. Immutable after fit; predict is pure.
class Regressor {
 public:
  using Impl = std::variant<LinearModel, GbtModel, MlpModel>;

  Regressor(Impl impl, std::size_t n_features, std::uint64_t seed)
      : impl_(std::move(impl)), n_features_(n_features), seed_(seed) {}

  Backend backend() const noexcept;
  std::size_t n_features() const noexcept { return n_features_; }
  std::uint64_t seed() const noexcept { return seed_; }
  const Impl& impl() const noexcept { return impl_; }

  /// Throws DimensionMismatch when x.size() != n_features().
  double predict(std::span<const double> x) const;

  friend bool operator==(const Regressor&, const Regressor&) = default;

 private:
  Impl impl_;
  std::size_t n_features_;
  std::uint64_t seed_;
};

Regressor fit_linear(const Matrix& x, std::span<const double> y);
Regressor fit_gbt(const Matrix& x, std::span<const double> y, const GbtParams& p, std::uint64_t seed);
Regressor fit_mlp(const Matrix& x, std::span<const double> y, const MlpParams& p, std::uint64_t seed);

}  // namespace lrfnet
