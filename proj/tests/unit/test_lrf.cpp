#include <doctest.h>

#include <cmath>
#include <random>

#include "lrfnet/error.hpp"
#include "lrfnet/lrf.hpp"
#include "test_util.hpp"

using namespace lrfnet;
using testutil::kind_of;

namespace {

// Straight from the definition: dy from an explicit difference array, unit
// j at position i reads the window ending at i - j + 1 and all shallower
// feature values at i. No shared helpers with the library.
std::vector<double> naive_features(const LrfModel& model, const std::vector<double>& y, std::size_t i,
                                   int zero_unit = -1, std::size_t upto = 0) {
  const std::size_t m = model.m;
  if (upto == 0) upto = m;
  std::vector<double> dy(y.size(), 0.0);
  for (std::size_t t = 1; t < y.size(); ++t) dy[t] = y[t] - y[t - 1];
  std::vector<double> v(m, 0.0);
  for (std::size_t j = 1; j <= upto; ++j) {
    const LinearUnit& u = model.units[j - 1];
    const std::size_t e = i + 1 - j;
    double lag_y = 0.0, lag_dy = 0.0, feat = 0.0;
    for (std::size_t l = 0; l < m; ++l) lag_y += u.a[l] * y[e - l];
    for (std::size_t l = 0; l < m; ++l) lag_dy += u.b[l] * dy[e - l];
    for (std::size_t k = 0; k + 1 < j; ++k) {
      feat += u.c[k] * (static_cast<int>(k) == zero_unit ? 0.0 : v[k]);
    }
    v[j - 1] = lag_y + lag_dy + feat + u.d;
  }
  return v;
}

std::vector<double> solve_normal(const std::vector<std::vector<double>>& rows, const std::vector<double>& y) {
  const std::size_t p = rows[0].size();
  std::vector<std::vector<double>> a(p, std::vector<double>(p + 1, 0.0));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t i = 0; i < p; ++i) {
      for (std::size_t j = 0; j < p; ++j) a[i][j] += rows[r][i] * rows[r][j];
      a[i][p] += rows[r][i] * y[r];
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

std::vector<double> random_series(std::size_t n, std::uint64_t seed) {
  auto y = testutil::random_walk(n, seed);
  for (std::size_t i = 0; i < n; ++i) y[i] += 3.0 * std::sin(0.3 * static_cast<double>(i));
  return y;
}

}  // namespace

TEST_SUITE("lrf") {
  TEST_CASE("encoder matches the naive reference on random series") {
    std::mt19937_64 rng(5);
    const std::size_t ms[] = {1, 2, 4, 8};
    for (int trial = 0; trial < 20; ++trial) {
      const std::size_t m = ms[trial % 4];
      std::uniform_int_distribution<std::size_t> len(min_lrf_length(m), 200);
      const std::size_t n = len(rng);
      const auto ys = random_series(n, 100 + static_cast<std::uint64_t>(trial));
      const Series s = Series::from_values(ys);
      const LrfModel model = fit_lrf(s, m);
      const TrainingSet ts = encode_training_set(model, s);
      for (std::size_t r = 0; r < ts.targets.size(); ++r) {
        const std::size_t i = ts.positions[r];
        const auto ref = naive_features(model, ys, i);
        const FeatureVector f = encode(model, s, i);
        for (std::size_t j = 0; j < m; ++j) {
          const double tol = 1e-9 * std::max(1.0, std::abs(ref[j]));
          CHECK(std::abs(ts.features(r, j) - ref[j]) <= tol);
          CHECK(std::abs(f.values[j] - ref[j]) <= tol);
        }
      }
    }
  }

  TEST_CASE("unit fits equal an independent least-squares projection") {
    for (std::size_t m : {1, 2, 3}) {
      const auto ys = random_series(120, 40 + m);
      const LrfModel model = fit_lrf(Series::from_values(ys), m);
      for (std::size_t j = 1; j <= m; ++j) {
        // reduced basis: y window, shallower features, intercept (dy lags lie in its span)
        std::vector<std::vector<double>> rows;
        std::vector<double> target, library_pred;
        for (std::size_t i = j + m - 1; i + 1 < ys.size(); ++i) {
          const auto v = naive_features(model, ys, i);
          std::vector<double> row;
          for (std::size_t l = 0; l <= m; ++l) row.push_back(ys[i + 1 - j - l]);
          for (std::size_t k = 0; k + 1 < j; ++k) row.push_back(v[k]);
          row.push_back(1.0);
          rows.push_back(row);
          target.push_back(ys[i + 1]);
          library_pred.push_back(v[j - 1]);
        }
        const auto beta = solve_normal(rows, target);
        for (std::size_t r = 0; r < rows.size(); ++r) {
          double p = 0.0;
          for (std::size_t c = 0; c < beta.size(); ++c) p += beta[c] * rows[r][c];
          CHECK(std::abs(p - library_pred[r]) <= 1e-6 * std::max(1.0, std::abs(p)));
        }
      }
    }
  }

  TEST_CASE("affine series is reproduced exactly") {
    std::vector<double> ys;
    for (int x = 1; x <= 50; ++x) ys.push_back(2.0 * x + 1.0);
    const Series s = Series::from_values(ys);
    const LrfModel model = fit_lrf(s, 4);
    const TrainingSet ts = encode_training_set(model, s);
    for (std::size_t r = 0; r < ts.targets.size(); ++r) {
      for (std::size_t j = 0; j < 4; ++j) CHECK(ts.features(r, j) == doctest::Approx(ts.targets[r]).epsilon(1e-6));
    }
  }

  TEST_CASE("constant series gives constant features") {
    const Series s = Series::from_values(std::vector<double>(30, 7.0));
    const LrfModel model = fit_lrf(s, 4);
    for (std::size_t i = model.first_position(); i < s.size(); ++i) {
      for (double v : encode(model, s, i).values) CHECK(std::abs(v - 7.0) < 1e-6);
    }
  }

  TEST_CASE("m = 1 shape") {
    const LrfModel model = fit_lrf(Series::from_values(random_series(20, 3)), 1);
    REQUIRE(model.units.size() == 1);
    CHECK(model.units[0].a.size() == 1);
    CHECK(model.units[0].b.size() == 1);
    CHECK(model.units[0].c.empty());
  }

  TEST_CASE("unit j has j - 1 feature coefficients") {
    const LrfModel model = fit_lrf(Series::from_values(random_series(80, 9)), 5);
    REQUIRE(model.units.size() == 5);
    for (std::size_t j = 0; j < 5; ++j) {
      CHECK(model.units[j].a.size() == 5);
      CHECK(model.units[j].b.size() == 5);
      CHECK(model.units[j].c.size() == j);
    }
  }

  TEST_CASE("encode shape, finiteness and determinism") {
    const Series s = Series::from_values(random_series(60, 4));
    const LrfModel model = fit_lrf(s, 4);
    for (std::size_t i = model.first_position(); i < s.size(); ++i) {
      const FeatureVector a = encode(model, s, i);
      const FeatureVector b = encode(model, s, i);
      REQUIRE(a.values.size() == 4);
      CHECK(a.position == i);
      for (double v : a.values) CHECK(std::isfinite(v));
      CHECK(a.values == b.values);
    }
  }

  TEST_CASE("positions without history are rejected") {
    const Series s = Series::from_values(random_series(40, 4));
    const LrfModel model = fit_lrf(s, 4);
    CHECK(model.first_position() == 7);
    CHECK(kind_of([&] { encode(model, s, 6); }) == ErrorKind::OutOfWindow);
    CHECK(kind_of([&] { encode(model, s, 40); }) == ErrorKind::OutOfWindow);
    CHECK_NOTHROW(encode(model, s, 7));
    CHECK_NOTHROW(encode(model, s, 39));
  }

  TEST_CASE("short series are rejected") {
    CHECK(kind_of([] { fit_lrf(Series::from_values(random_series(10, 1)), 4); }) == ErrorKind::TooShort);
    CHECK_NOTHROW(fit_lrf(Series::from_values(random_series(11, 1)), 4));
    CHECK(kind_of([] { fit_lrf(Series::from_values(random_series(11, 1)), 0); }) == ErrorKind::InvalidArgument);
  }

  TEST_CASE("training set size and targets") {
    for (std::size_t m : {1, 2, 4, 8}) {
      for (std::size_t n : {min_lrf_length(m), std::size_t{50}, std::size_t{101}}) {
        const auto ys = random_series(n, n + m);
        const Series s = Series::from_values(ys);
        const TrainingSet ts = encode_training_set(fit_lrf(s, m), s);
        // brute force: positions with a full deepest window and a next value
        std::size_t count = 0;
        for (std::size_t i = 0; i < n; ++i) {
          // unit j reads y back to (i - j + 1) - (m - 1) - 1 for its oldest dy
          bool window = true;
          for (std::size_t j = 1; j <= m; ++j) window = window && i + 1 >= j + m;
          if (window && i + 1 < n) ++count;
        }
        CHECK(ts.targets.size() == count);
        CHECK(ts.targets.size() == n - 2 * m);
        CHECK(ts.targets.size() >= 3);
        for (std::size_t r = 0; r < ts.targets.size(); ++r) {
          CHECK(ts.positions[r] == 2 * m - 1 + r);
          CHECK(ts.targets[r] == ys[ts.positions[r] + 1]);
        }
        CHECK(ts.positions.back() == n - 2);
      }
    }
  }

  TEST_CASE("each unit beats the constant predictor in sample") {
    const auto ys = random_series(150, 21);
    const std::size_t m = 4;
    const LrfModel model = fit_lrf(Series::from_values(ys), m);
    for (std::size_t j = 1; j <= m; ++j) {
      const std::size_t first = j + m - 1;
      double mu = 0.0;
      for (std::size_t i = first; i + 1 < ys.size(); ++i) mu += ys[i + 1];
      mu /= static_cast<double>(ys.size() - 1 - first);
      double sse = 0.0, sst = 0.0;
      for (std::size_t i = first; i + 1 < ys.size(); ++i) {
        const double v = naive_features(model, ys, i, -1, j)[j - 1];
        sse += (v - ys[i + 1]) * (v - ys[i + 1]);
        sst += (mu - ys[i + 1]) * (mu - ys[i + 1]);
      }
      CHECK(sse <= sst + 1e-9);
    }
  }

  TEST_CASE("exact representability of a linear recurrence") {
    const double params[][3] = {{0.9, 0.5, 0.3}, {1.0, 0.2, -0.1}, {0.5, -0.3, 1.0}};
    for (const auto& p : params) {
      std::vector<double> ys{1.0, 1.7};
      for (int k = 0; k < 80; ++k) {
        const std::size_t t = ys.size() - 1;
        ys.push_back(p[0] * ys[t] + p[1] * (ys[t] - ys[t - 1]) + p[2]);
      }
      const Series s = Series::from_values(ys);
      const TrainingSet ts = encode_training_set(fit_lrf(s, 3), s);
      const double scale = std::max(1.0, testutil::max_abs(ys));
      for (std::size_t r = 0; r < ts.targets.size(); ++r) {
        for (std::size_t j = 0; j < 3; ++j) CHECK(std::abs(ts.features(r, j) - ts.targets[r]) <= 1e-6 * scale);
      }
    }
  }

  TEST_CASE("deeper units consume shallower features") {
    const auto ys = random_series(100, 77);
    const LrfModel model = fit_lrf(Series::from_values(ys), 3);
    REQUIRE(model.units[1].c.size() == 1);
    REQUIRE(model.units[1].c[0] != 0.0);
    for (std::size_t i = 10; i < 100; i += 10) {
      const auto normal = naive_features(model, ys, i);
      const auto zeroed = naive_features(model, ys, i, 0);
      CHECK(normal[1] != zeroed[1]);
      CHECK(normal[0] == zeroed[0]);
    }
  }
}
