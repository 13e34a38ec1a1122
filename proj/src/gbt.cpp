#include <algorithm>
#include <numeric>

#include "lrfnet/error.hpp"
#include "lrfnet/regress.hpp"

namespace lrfnet {

double RegressionTree::predict(std::span<const double> x) const {
  int at = 0;
  while (nodes[static_cast<std::size_t>(at)].feature >= 0) {
    const TreeNode& n = nodes[static_cast<std::size_t>(at)];
    at = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
  }
  return nodes[static_cast<std::size_t>(at)].value;
}

double GbtModel::predict(std::span<const double> x) const {
  double acc = base;
  for (const auto& t : trees) acc += params.shrinkage * t.predict(x);
  return acc;
}

namespace {

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
};

class TreeBuilder {
 public:
  TreeBuilder(const Matrix& x, std::span<const double> r, int max_depth, int min_leaf)
      : x_(x), r_(r), max_depth_(max_depth), min_leaf_(static_cast<std::size_t>(min_leaf)) {}

  RegressionTree build() {
    std::vector<std::size_t> rows(x_.rows());
    std::iota(rows.begin(), rows.end(), 0);
    grow(rows, 0);
    return std::move(tree_);
  }

 private:
  int grow(std::vector<std::size_t>& rows, int depth) {
    const int id = static_cast<int>(tree_.nodes.size());
    tree_.nodes.push_back({});
    double sum = 0.0;
    for (std::size_t i : rows) sum += r_[i];
    tree_.nodes.back().value = sum / static_cast<double>(rows.size());

    if (depth >= max_depth_ || rows.size() < 2 * min_leaf_) return id;
    const Split s = best_split(rows, sum);
    if (s.feature < 0) return id;

    std::vector<std::size_t> left, right;
    for (std::size_t i : rows) {
      (x_(i, static_cast<std::size_t>(s.feature)) <= s.threshold ? left : right).push_back(i);
    }
    rows.clear();
    rows.shrink_to_fit();
    const int l = grow(left, depth + 1);
    const int r = grow(right, depth + 1);
    TreeNode& node = tree_.nodes[static_cast<std::size_t>(id)];
    node.feature = s.feature;
    node.threshold = s.threshold;
    node.left = l;
    node.right = r;
    return id;
  }

  // Exact search; a candidate replaces the incumbent only on strictly larger
  // gain, so ties stay with the lower feature index and lower threshold.
  Split best_split(const std::vector<std::size_t>& rows, double total) const {
    const std::size_t n = rows.size();
    const double parent = total * total / static_cast<double>(n);
    Split best;
    std::vector<std::size_t> order(rows);
    for (std::size_t f = 0; f < x_.cols(); ++f) {
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return x_(a, f) < x_(b, f); });
      double left_sum = 0.0;
      for (std::size_t k = 0; k + 1 < n; ++k) {
        left_sum += r_[order[k]];
        const std::size_t nl = k + 1;
        const std::size_t nr = n - nl;
        const double lo = x_(order[k], f);
        const double hi = x_(order[k + 1], f);
        if (nl < min_leaf_ || nr < min_leaf_ || !(lo < hi)) continue;
        const double right_sum = total - left_sum;
        const double gain = left_sum * left_sum / static_cast<double>(nl) +
                            right_sum * right_sum / static_cast<double>(nr) - parent;
        if (gain > best.gain) {
          double t = lo + (hi - lo) / 2.0;
          if (!(t < hi)) t = lo;
          best = {static_cast<int>(f), t, gain};
        }
      }
    }
    // Guard against splits that only reflect rounding in the sums.
    if (best.feature >= 0 && best.gain <= 1e-14 * std::max(1.0, std::abs(parent))) best.feature = -1;
    return best;
  }

  const Matrix& x_;
  std::span<const double> r_;
  int max_depth_;
  std::size_t min_leaf_;
  RegressionTree tree_;
};

double mean_square(std::span<const double> v) {
  double acc = 0.0;
  for (double e : v) acc += e * e;
  return acc / static_cast<double>(v.size());
}

}  // namespace

RegressionTree fit_tree(const Matrix& x, std::span<const double> residual, int max_depth, int min_leaf) {
  if (x.rows() == 0) throw Error(ErrorKind::EmptyData, "tree needs at least one row");
  return TreeBuilder(x, residual, max_depth, min_leaf).build();
}

Regressor fit_gbt(const Matrix& x, std::span<const double> y, const GbtParams& p, std::uint64_t seed) {
  p.validate();
  if (x.rows() < 2 || y.size() != x.rows()) {
    throw Error(ErrorKind::EmptyData, "gbt backend needs at least 2 rows with matching targets");
  }
  GbtModel model;
  model.params = p;
  // anchored mean: exact for constant targets
  double dev = 0.0;
  for (double v : y) dev += v - y[0];
  model.base = y[0] + dev / static_cast<double>(y.size());

  std::vector<double> residual(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) residual[i] = y[i] - model.base;
  model.train_mse.push_back(mean_square(residual));

  for (int round = 0; round < p.n_rounds; ++round) {
    RegressionTree tree = fit_tree(x, residual, p.max_depth, p.min_leaf);
    std::vector<double> next(residual);
    for (std::size_t i = 0; i < y.size(); ++i) next[i] -= p.shrinkage * tree.predict(x.row(i));
    double round_mse = mean_square(next);
    if (round_mse > model.train_mse.back()) {
      // only reachable through rounding once the residual is fully explained
      tree = RegressionTree{{TreeNode{}}};
      round_mse = model.train_mse.back();
    } else {
      residual.swap(next);
    }
    model.trees.push_back(std::move(tree));
    model.train_mse.push_back(round_mse);
  }
  return Regressor(std::move(model), x.cols(), seed);
}

}  // namespace lrfnet
