#include "lrfnet/stationary.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "lrfnet/error.hpp"
#include "lrfnet/linalg.hpp"

namespace lrfnet {

std::string_view to_string(StBranch b) {
  switch (b) {
    case StBranch::Identity: return "identity";
    case StBranch::PolyDiff: return "polydiff";
    case StBranch::Exponential: return "exponential";
  }
  return "identity";
}

StBranch st_branch_from_string(std::string_view name) {
  if (name == "identity") return StBranch::Identity;
  if (name == "polydiff") return StBranch::PolyDiff;
  if (name == "exponential") return StBranch::Exponential;
  throw Error(ErrorKind::FormatError, "unknown stationary branch '" + std::string(name) + "'");
}

double StationaryModel::step() const {
  if (train_xs.size() < 2) return 0.0;
  return (train_xs.back() - train_xs.front()) / static_cast<double>(train_xs.size() - 1);
}

std::size_t StationaryModel::grid_index(double x) const {
  if (train_xs.empty()) throw Error(ErrorKind::GridMismatch, "model has no training grid");
  const double h = step();
  if (h == 0.0) {
    if (x == train_xs.front()) return 0;
    throw Error(ErrorKind::GridMismatch, "single-point grid cannot be extended");
  }
  const double k = std::round((x - train_xs.front()) / h);
  if (k < 0.0 || std::abs(x - (train_xs.front() + k * h)) > 1e-6 * std::abs(h)) {
    throw Error(ErrorKind::GridMismatch, "x = " + std::to_string(x) + " is not on the training grid");
  }
  return static_cast<std::size_t>(k);
}

namespace {

double grid_x(const StationaryModel& m, std::size_t k) {
  if (k < m.train_xs.size()) return m.train_xs[k];
  return m.train_xs.front() + static_cast<double>(k) * m.step();
}

double exp_term(const StationaryModel& m, double x) { return std::exp(m.a1 * x + m.b1); }

}  // namespace

double StationaryModel::denominator(double x) const {
  switch (branch) {
    case StBranch::Identity: return 1.0;
    case StBranch::Exponential: return a2 * std::exp(a1 * x + b1) + b2;
    case StBranch::PolyDiff: {
      const std::size_t k = grid_index(x);
      double cum = 0.0;
      if (k < train_xs.size()) {
        for (std::size_t i = 0; i <= k; ++i) cum += exp_term(*this, train_xs[i]);
      } else {
        cum = cum_state;
        for (std::size_t i = train_xs.size(); i <= k; ++i) cum += exp_term(*this, grid_x(*this, i));
      }
      return a2 * cum + b2;
    }
  }
  return 1.0;
}

std::vector<double> StationaryModel::denominators(std::span<const double> xs) const {
  std::vector<double> out(xs.size(), 1.0);
  if (branch == StBranch::Identity) return out;
  if (branch == StBranch::Exponential) {
    for (std::size_t i = 0; i < xs.size(); ++i) out[i] = denominator(xs[i]);
    return out;
  }
  std::vector<std::size_t> idx(xs.size());
  std::size_t max_k = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    idx[i] = grid_index(xs[i]);
    max_k = std::max(max_k, idx[i]);
  }
  // Prefix sums over the training grid, then continued from cum_state so the
  // continuation matches TrendCursor bit for bit.
  std::vector<double> prefix(max_k + 1);
  double cum = 0.0;
  for (std::size_t k = 0; k <= max_k; ++k) {
    if (k == train_xs.size()) cum = cum_state;
    cum += exp_term(*this, grid_x(*this, k));
    prefix[k] = cum;
  }
  for (std::size_t i = 0; i < xs.size(); ++i) out[i] = a2 * prefix[idx[i]] + b2;
  return out;
}

double estimate_poly_order(const Series& s) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s.x(i) > 0.0 && s.y(i) > 0.0) {
      lx.push_back(std::log(s.x(i)));
      ly.push_back(std::log(s.y(i)));
    }
  }
  if (lx.size() < 2) throw Error(ErrorKind::NonPositiveInput, "fewer than 2 samples with x > 0 and y > 0");
  return fit_line(lx, ly).slope;
}

double estimate_exp_base(const Series& s) {
  std::vector<double> xs, ly;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s.y(i) > 0.0) {
      xs.push_back(s.x(i));
      ly.push_back(std::log(s.y(i)));
    }
  }
  if (xs.size() < 2) throw Error(ErrorKind::NonPositiveInput, "fewer than 2 samples with y > 0");
  return std::exp(fit_line(xs, ly).slope);
}

namespace {

std::optional<double> affine_sse(std::span<const double> basis, std::span<const double> target) {
  for (double b : basis) {
    if (!std::isfinite(b)) return std::nullopt;
  }
  const LineFit f = fit_line(basis, target);
  double sse = 0.0;
  for (std::size_t i = 0; i < basis.size(); ++i) {
    const double r = f.slope * basis[i] + f.intercept - target[i];
    sse += r * r;
  }
  return std::isfinite(sse) ? std::optional<double>(sse) : std::nullopt;
}

std::vector<double> shifted(const Series& s) {
  std::vector<double> y1(s.ys().begin(), s.ys().end());
  for (double& v : y1) v += 1.0;
  return y1;
}

// Y1 ~ a2 * basis + b2. `limit` is the basis value the forecast approaches
// (may be +inf). An affine fit that is non-positive inside the window or in
// that limit is replaced by a fit through the origin.
bool fit_outer(std::span<const double> basis, std::span<const double> y1, double limit, StationaryModel& m) {
  const auto positive = [&](double a2, double b2) {
    return std::all_of(basis.begin(), basis.end(), [&](double v) {
      const double g = a2 * v + b2;
      return std::isfinite(g) && g > kMinDenominator;
    });
  };
  const LineFit outer = fit_line(basis, y1);
  const bool limit_ok = std::isinf(limit) ? outer.slope > 0.0 : outer.slope * limit + outer.intercept > kMinDenominator;
  if (limit_ok && positive(outer.slope, outer.intercept)) {
    m.a2 = outer.slope;
    m.b2 = outer.intercept;
    return true;
  }
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < basis.size(); ++i) {
    num += basis[i] * y1[i];
    den += basis[i] * basis[i];
  }
  if (!(den > 0.0) || !positive(num / den, 0.0)) return false;
  m.a2 = num / den;
  m.b2 = 0.0;
  return true;
}

bool fit_polydiff(const Series& s, std::span<const double> y1, StationaryModel& m) {
  std::vector<double> xs, ld;
  // increments along the net trend direction; the outer slope carries the sign
  const double dir = y1.back() >= y1.front() ? 1.0 : -1.0;
  for (std::size_t j = 0; j + 1 < y1.size(); ++j) {
    const double d = dir * (y1[j + 1] - y1[j]);
    if (d > 0.0) {
      xs.push_back(s.x(j + 1));
      ld.push_back(std::log(d));
    }
  }
  if (xs.size() < 4) return false;
  const LineFit inner = fit_line(xs, ld);
  m.a1 = inner.slope;
  m.b1 = inner.intercept;

  std::vector<double> cum(s.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    acc += std::exp(m.a1 * s.x(i) + m.b1);
    cum[i] = acc;
  }
  if (!std::isfinite(acc)) return false;
  m.cum_state = acc;
  double limit = std::numeric_limits<double>::infinity();
  if (m.a1 < 0.0) {
    // geometric tail of the running sum beyond the window
    const double h = m.step();
    const double next = s.x(0) + static_cast<double>(s.size()) * h;
    limit = acc + std::exp(m.a1 * next + m.b1) / -std::expm1(m.a1 * h);
  }
  return fit_outer(cum, y1, limit, m);
}

bool fit_exponential(const Series& s, std::span<const double> y1, StationaryModel& m) {
  std::vector<double> ly(y1.size());
  for (std::size_t i = 0; i < y1.size(); ++i) {
    if (!(y1[i] > 0.0)) return false;
    ly[i] = std::log(y1[i]);
  }
  const LineFit inner = fit_line(s.xs(), ly);
  m.a1 = inner.slope;
  m.b1 = inner.intercept;
  std::vector<double> e(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    e[i] = std::exp(m.a1 * s.x(i) + m.b1);
    if (!std::isfinite(e[i])) return false;
  }
  m.cum_state = 0.0;
  const double limit = m.a1 < 0.0   ? 0.0
                       : m.a1 > 0.0 ? std::numeric_limits<double>::infinity()
                                    : std::exp(m.b1);
  return fit_outer(e, y1, limit, m);
}

bool denominators_positive(const StationaryModel& m) {
  const auto g = m.denominators(m.train_xs);
  return std::all_of(g.begin(), g.end(), [](double v) { return std::isfinite(v) && v > kMinDenominator; });
}

}  // namespace

BranchScores score_branches(const Series& s) {
  BranchScores out;
  const auto y1 = shifted(s);

  const bool x_positive = std::all_of(s.xs().begin(), s.xs().end(), [](double x) { return x > 0.0; });
  try {
    out.k_est = estimate_poly_order(s);
  } catch (const Error&) {
  }
  try {
    out.base_est = estimate_exp_base(s);
  } catch (const Error&) {
  }

  if (out.k_est && x_positive) {
    std::vector<double> basis(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) basis[i] = std::pow(s.x(i), *out.k_est);
    out.power_sse = affine_sse(basis, y1);
  }
  if (out.base_est && *out.base_est > 0.0) {
    const double log_base = std::log(*out.base_est);
    std::vector<double> basis(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) basis[i] = std::exp(log_base * s.x(i));
    out.exp_sse = affine_sse(basis, y1);
  }
  return out;
}

StationaryModel fit_stationary(const Series& s) {
  if (s.size() < kMinStationaryLength) {
    throw Error(ErrorKind::TooShort, "stationary transform needs at least " + std::to_string(kMinStationaryLength) +
                                         " samples, got " + std::to_string(s.size()));
  }
  StationaryModel identity;
  identity.train_xs.assign(s.xs().begin(), s.xs().end());

  const double lo = s.min_y();
  const double hi = s.max_y();
  const double scale = std::max(std::abs(lo), std::abs(hi));
  if (scale == 0.0 || (hi - lo) / scale < kConstantRelRange) return identity;

  const BranchScores scores = score_branches(s);
  identity.k_est = scores.k_est;
  identity.base_est = scores.base_est;

  std::vector<StBranch> order;
  if (scores.power_sse && (!scores.exp_sse || *scores.power_sse <= *scores.exp_sse)) {
    order = {StBranch::PolyDiff, StBranch::Exponential};
  } else if (scores.exp_sse) {
    order = {StBranch::Exponential, StBranch::PolyDiff};
  } else {
    return identity;
  }

  const auto y1 = shifted(s);
  for (StBranch b : order) {
    StationaryModel m = identity;
    m.branch = b;
    const bool ok = b == StBranch::PolyDiff ? fit_polydiff(s, y1, m) : fit_exponential(s, y1, m);
    if (ok && denominators_positive(m)) return m;
  }
  return identity;
}

Series apply_stationary(const StationaryModel& m, const Series& s) {
  if (m.branch == StBranch::Identity) return s;
  const auto g = m.denominators(s.xs());
  std::vector<double> out(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!(g[i] > kMinDenominator) || !std::isfinite(g[i])) {
      throw Error(ErrorKind::NonPositiveDenominator, "g(" + std::to_string(s.x(i)) + ") = " + std::to_string(g[i]));
    }
    out[i] = (s.y(i) + 1.0) / g[i];
  }
  return s.with_values(std::move(out));
}

double invert_stationary(const StationaryModel& m, double s_val, double x) {
  if (m.branch == StBranch::Identity) return s_val;
  const double g = m.denominator(x);
  if (!(g > kMinDenominator) || !std::isfinite(g)) {
    throw Error(ErrorKind::NonPositiveDenominator, "g(" + std::to_string(x) + ") = " + std::to_string(g));
  }
  return s_val * g - 1.0;
}

TrendCursor::TrendCursor(const StationaryModel& m)
    : model_(&m), next_index_(m.train_xs.size()), cum_(m.cum_state) {}

double TrendCursor::next_x() const { return grid_x(*model_, next_index_); }

double TrendCursor::advance() {
  const double x = next_x();
  ++next_index_;
  switch (model_->branch) {
    case StBranch::Identity: return 1.0;
    case StBranch::Exponential: return model_->denominator(x);
    case StBranch::PolyDiff:
      cum_ += exp_term(*model_, x);
      return model_->a2 * cum_ + model_->b2;
  }
  return 1.0;
}

}  // namespace lrfnet
