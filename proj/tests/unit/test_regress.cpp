#include <doctest.h>

#include <cmath>
#include <random>

#include "lrfnet/error.hpp"
#include "lrfnet/lrf.hpp"
#include "lrfnet/regress.hpp"
#include "test_util.hpp"

using namespace lrfnet;
using testutil::kind_of;

namespace {

Matrix column(const std::vector<double>& v) {
  Matrix x(v.size(), 1);
  for (std::size_t r = 0; r < v.size(); ++r) x(r, 0) = v[r];
  return x;
}

double train_mse(const Regressor& reg, const Matrix& x, const std::vector<double>& y) {
  double acc = 0.0;
  for (std::size_t r = 0; r < x.rows(); ++r) acc += std::pow(reg.predict(x.row(r)) - y[r], 2);
  return acc / static_cast<double>(x.rows());
}

// x^T x beta = x^T y with an intercept column, Cholesky-free Gauss-Jordan.
std::vector<double> pinv_oracle(const Matrix& x, const std::vector<double>& y) {
  const std::size_t p = x.cols() + 1;
  std::vector<std::vector<double>> a(p, std::vector<double>(p + 1, 0.0));
  for (std::size_t r = 0; r < x.rows(); ++r) {
    for (std::size_t i = 0; i < p; ++i) {
      const double xi = i < x.cols() ? x(r, i) : 1.0;
      for (std::size_t j = 0; j < p; ++j) a[i][j] += xi * (j < x.cols() ? x(r, j) : 1.0);
      a[i][p] += xi * y[r];
    }
  }
  for (std::size_t c = 0; c < p; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < p; ++r) {
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    }
    std::swap(a[c], a[piv]);
    for (std::size_t r = 0; r < p; ++r) {
      if (r == c) continue;
      const double f = a[r][c] / a[c][c];
      for (std::size_t k = c; k <= p; ++k) a[r][k] -= f * a[c][k];
    }
  }
  std::vector<double> sol(p);
  for (std::size_t i = 0; i < p; ++i) sol[i] = a[i][p] / a[i][i];
  return sol;
}

struct Dataset {
  Matrix x;
  std::vector<double> y;
};

std::vector<Dataset> gbt_datasets() {
  std::vector<Dataset> out;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  {
    std::vector<double> xs, ys;
    for (int i = 0; i < 100; ++i) {
      xs.push_back(i / 99.0);
      ys.push_back(xs.back() < 0.5 ? 0.0 : 1.0);
    }
    out.push_back({column(xs), ys});
  }
  {
    Matrix x(150, 3);
    std::vector<double> y(150);
    for (std::size_t r = 0; r < 150; ++r) {
      for (std::size_t c = 0; c < 3; ++c) x(r, c) = u(rng);
      y[r] = std::sin(6 * x(r, 0)) + x(r, 1) * x(r, 2) + 0.1 * u(rng);
    }
    out.push_back({x, y});
  }
  {
    auto ys = testutil::random_walk(200, 8);
    const Series s = Series::from_values(ys);
    const TrainingSet ts = encode_training_set(fit_lrf(s, 4), s);
    out.push_back({ts.features, ts.targets});
  }
  {
    Matrix x(40, 2, 1.0);  // constant features: no split possible
    std::vector<double> y(40);
    for (std::size_t r = 0; r < 40; ++r) y[r] = u(rng);
    out.push_back({x, y});
  }
  return out;
}

}  // namespace

TEST_SUITE("regress") {
  TEST_CASE("linear backend examples") {
    const Regressor r = fit_linear(column({1, 2, 3}), std::vector<double>{2, 4, 6});
    CHECK(r.backend() == Backend::Linear);
    CHECK(r.predict(std::vector<double>{4.0}) == doctest::Approx(8.0).epsilon(1e-6));

    const Regressor z = fit_linear(column({1, 2, 3, 4}), std::vector<double>{0, 0, 0, 0});
    for (double x : {-10.0, 0.0, 2.5, 100.0}) CHECK(std::abs(z.predict(std::vector<double>{x})) < 1e-6);

    CHECK(kind_of([] { fit_linear(Matrix(0, 2), std::vector<double>{}); }) == ErrorKind::EmptyData);
  }

  TEST_CASE("linear backend matches the normal-equation oracle") {
    std::mt19937_64 rng(19);
    std::normal_distribution<double> nd(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
      const std::size_t d = 1 + static_cast<std::size_t>(trial % 5);
      Matrix x(40, d);
      std::vector<double> y(40);
      std::vector<double> w(d);
      for (auto& v : w) v = nd(rng);
      for (std::size_t r = 0; r < 40; ++r) {
        y[r] = 0.5;
        for (std::size_t c = 0; c < d; ++c) {
          x(r, c) = nd(rng);
          y[r] += w[c] * x(r, c);
        }
      }
      const Regressor reg = fit_linear(x, y);
      const auto& fit = std::get<LinearModel>(reg.impl()).fit;
      const auto oracle = pinv_oracle(x, y);
      for (std::size_t c = 0; c < d; ++c) CHECK(std::abs(fit.coef[c] - oracle[c]) < 1e-6);
      CHECK(std::abs(fit.intercept - oracle[d]) < 1e-6);
    }
  }

  TEST_CASE("predict checks the feature count and is repeatable") {
    const auto data = gbt_datasets();
    const Dataset& d = data[1];
    GbtParams gp;
    gp.n_rounds = 20;
    MlpParams mp;
    mp.max_epochs = 50;
    const std::vector<Regressor> regs{fit_linear(d.x, d.y), fit_gbt(d.x, d.y, gp, 1), fit_mlp(d.x, d.y, mp, 1)};
    for (const auto& r : regs) {
      CHECK(kind_of([&] { r.predict(std::vector<double>{1.0}); }) == ErrorKind::DimensionMismatch);
      const auto row = d.x.row(5);
      const double a = r.predict(row);
      CHECK(std::isfinite(a));
      CHECK(a == r.predict(row));
    }
  }

  TEST_CASE("gbt with constant targets predicts the constant exactly") {
    const Matrix x = column({0.1, 0.4, 0.2, 0.9, 0.3});
    const std::vector<double> y(5, 0.1);
    GbtParams p;
    p.n_rounds = 5;
    const Regressor r = fit_gbt(x, y, p, 1);
    for (double v : {0.0, 0.25, 1.0}) CHECK(r.predict(std::vector<double>{v}) == 0.1);
  }

  TEST_CASE("gbt fits a step function") {
    const Dataset d = gbt_datasets()[0];
    const Regressor r = fit_gbt(d.x, d.y, GbtParams{}, 1);
    CHECK(std::get<GbtModel>(r.impl()).train_mse.back() < 1e-3);
    CHECK(train_mse(r, d.x, d.y) < 1e-3);

    // one depth-1 tree: two leaves holding the side means of the residual
    const RegressionTree t = fit_tree(d.x, d.y, 1, 1);
    REQUIRE(t.nodes.size() == 3);
    CHECK(t.nodes[0].feature == 0);
    CHECK(t.nodes[0].threshold > 49 / 99.0);
    CHECK(t.nodes[0].threshold < 50 / 99.0);
    CHECK(t.predict(std::vector<double>{0.2}) == 0.0);
    CHECK(t.predict(std::vector<double>{0.8}) == 1.0);
  }

  TEST_CASE("gbt training MSE never increases") {
    for (const auto& d : gbt_datasets()) {
      for (double shrink : {0.1, 0.5, 1.0}) {
        GbtParams p;
        p.n_rounds = 60;
        p.shrinkage = shrink;
        const Regressor r = fit_gbt(d.x, d.y, p, 1);
        const auto& hist = std::get<GbtModel>(r.impl()).train_mse;
        REQUIRE(hist.size() == 61);
        for (std::size_t k = 1; k < hist.size(); ++k) CHECK(hist[k] <= hist[k - 1]);
      }
    }
  }

  TEST_CASE("hand-built single-round model predicts the matching leaf") {
    // x = 1..6, y = {1,1,2,8,9,10}; best single split is x <= 3.5
    const Matrix x = column({1, 2, 3, 4, 5, 6});
    const std::vector<double> y{1, 1, 2, 8, 9, 10};
    GbtParams p;
    p.n_rounds = 1;
    p.max_depth = 1;
    p.shrinkage = 1.0;
    p.min_leaf = 1;
    const Regressor r = fit_gbt(x, y, p, 1);
    CHECK(r.predict(std::vector<double>{2.0}) == doctest::Approx(4.0 / 3.0));
    CHECK(r.predict(std::vector<double>{5.5}) == doctest::Approx(9.0));

    GbtModel hand;
    hand.params = p;
    hand.base = 5.0;
    hand.trees.push_back(RegressionTree{{TreeNode{0, 3.5, 1, 2, 0.0}, TreeNode{-1, 0, -1, -1, -11.0 / 3.0},
                                         TreeNode{-1, 0, -1, -1, 4.0}}});
    CHECK(hand.predict(std::vector<double>{1.0}) == doctest::Approx(4.0 / 3.0));
    CHECK(hand.predict(std::vector<double>{6.0}) == doctest::Approx(9.0));
  }

  TEST_CASE("tree ties go to the lowest feature index") {
    Matrix x(8, 2);
    std::vector<double> y(8);
    for (std::size_t r = 0; r < 8; ++r) {
      x(r, 0) = x(r, 1) = static_cast<double>(r);
      y[r] = r < 4 ? 0.0 : 1.0;
    }
    const RegressionTree t = fit_tree(x, y, 1, 1);
    CHECK(t.nodes[0].feature == 0);
  }

  TEST_CASE("gbt parameter validation") {
    const Dataset d = gbt_datasets()[0];
    GbtParams p;
    p.shrinkage = 0.0;
    CHECK(kind_of([&] { fit_gbt(d.x, d.y, p, 1); }) == ErrorKind::InvalidArgument);
    p = GbtParams{};
    p.max_depth = 0;
    CHECK(kind_of([&] { fit_gbt(d.x, d.y, p, 1); }) == ErrorKind::InvalidArgument);
    CHECK(kind_of([] { fit_gbt(column({1}), std::vector<double>{1}, GbtParams{}, 1); }) == ErrorKind::EmptyData);
  }

  TEST_CASE("mlp analytic gradient matches central differences") {
    std::mt19937_64 rng(123);
    std::normal_distribution<double> nd(0.0, 1.0);
    const std::vector<std::vector<std::size_t>> shapes{{10}, {6, 4}, {3}};
    for (int point = 0; point < 10; ++point) {
      const auto& hidden = shapes[static_cast<std::size_t>(point) % shapes.size()];
      MlpNet net(4, hidden);
      for (auto& w : net.mutable_params()) w = 0.7 * nd(rng);
      Matrix x(5, 4);
      std::vector<double> y(5);
      for (std::size_t r = 0; r < 5; ++r) {
        for (std::size_t c = 0; c < 4; ++c) x(r, c) = nd(rng);
        y[r] = nd(rng);
      }
      std::vector<double> grad;
      net.loss(x, y, &grad);
      double worst = 0.0;
      const double eps = 1e-5;
      for (std::size_t k = 0; k < net.num_params(); ++k) {
        MlpNet plus = net, minus = net;
        plus.mutable_params()[k] += eps;
        minus.mutable_params()[k] -= eps;
        const double fd = (plus.loss(x, y, nullptr) - minus.loss(x, y, nullptr)) / (2 * eps);
        const double rel = std::abs(fd - grad[k]) / std::max({std::abs(fd), std::abs(grad[k]), 1e-6});
        worst = std::max(worst, rel);
      }
      CHECK(worst < 1e-4);
    }
  }

  TEST_CASE("mlp forward agrees with the loss pass") {
    MlpNet net(3, {5});
    std::mt19937_64 rng(2);
    std::normal_distribution<double> nd(0.0, 1.0);
    for (auto& w : net.mutable_params()) w = nd(rng);
    Matrix x(1, 3);
    for (std::size_t c = 0; c < 3; ++c) x(0, c) = nd(rng);
    const double out = net.forward(x.row(0));
    CHECK(net.loss(x, std::vector<double>{out}, nullptr) == doctest::Approx(0.0));
  }

  TEST_CASE("mlp fits x^2 on [0, 1]") {
    std::vector<double> xs, ys;
    for (int i = 0; i < 50; ++i) {
      xs.push_back(i / 49.0);
      ys.push_back(xs.back() * xs.back());
    }
    const Regressor r = fit_mlp(column(xs), ys, MlpParams{}, 1);
    CHECK(std::get<MlpModel>(r.impl()).train_mse < 1e-3);
    CHECK(train_mse(r, column(xs), ys) < 1e-3);
  }

  TEST_CASE("mlp with zero or constant targets") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Matrix x(30, 2);
    for (std::size_t r = 0; r < 30; ++r) {
      x(r, 0) = u(rng);
      x(r, 1) = u(rng);
    }
    const Regressor zero = fit_mlp(x, std::vector<double>(30, 0.0), MlpParams{}, 1);
    const Regressor seven = fit_mlp(x, std::vector<double>(30, 7.0), MlpParams{}, 1);
    for (std::size_t r = 0; r < 30; ++r) {
      CHECK(std::abs(zero.predict(x.row(r))) < 1e-3);
      CHECK(std::abs(seven.predict(x.row(r)) - 7.0) < 1e-6);
    }
  }

  TEST_CASE("fixed seed gives identical parameters") {
    const Dataset d = gbt_datasets()[1];
    MlpParams p;
    p.max_epochs = 300;
    CHECK(fit_mlp(d.x, d.y, p, 9) == fit_mlp(d.x, d.y, p, 9));
    CHECK(fit_gbt(d.x, d.y, GbtParams{}, 9) == fit_gbt(d.x, d.y, GbtParams{}, 9));
    const Regressor r9 = fit_mlp(d.x, d.y, p, 9);
    const Regressor r10 = fit_mlp(d.x, d.y, p, 10);
    const auto a = std::get<MlpModel>(r9.impl()).net.params();
    const auto b = std::get<MlpModel>(r10.impl()).net.params();
    CHECK_FALSE(std::equal(a.begin(), a.end(), b.begin(), b.end()));
  }

  TEST_CASE("mlp parameter validation") {
    MlpParams p;
    p.hidden_sizes = {};
    CHECK(kind_of([&] { fit_mlp(column({1, 2, 3}), std::vector<double>{1, 2, 3}, p, 1); }) ==
          ErrorKind::InvalidArgument);
    p.hidden_sizes = {0};
    CHECK(kind_of([&] { fit_mlp(column({1, 2, 3}), std::vector<double>{1, 2, 3}, p, 1); }) ==
          ErrorKind::InvalidArgument);
    CHECK(kind_of([] { fit_mlp(column({1}), std::vector<double>{1}, MlpParams{}, 1); }) == ErrorKind::EmptyData);
  }
}
