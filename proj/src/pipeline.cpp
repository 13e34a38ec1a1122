#include "lrfnet/pipeline.hpp"

#include <cmath>
#include <string>

#include "lrfnet/error.hpp"

namespace lrfnet {

void PipelineConfig::validate() const {
  if (m < 1) throw Error(ErrorKind::InvalidArgument, "m must be >= 1");
  if (window_n != 0 && window_n < min_lrf_length(m)) {
    throw Error(ErrorKind::InvalidArgument, "window_n must be >= 2m + 3 = " + std::to_string(min_lrf_length(m)));
  }
  if (ridge_lambda < 0.0) throw Error(ErrorKind::InvalidArgument, "ridge_lambda must be >= 0");
  gbt.validate();
  mlp.validate();
}

namespace {

Regressor fit_backend(const TrainingSet& ts, const PipelineConfig& cfg) {
  switch (cfg.backend) {
    case Backend::Linear: return fit_linear(ts.features, ts.targets);
    case Backend::Gbt: return fit_gbt(ts.features, ts.targets, cfg.gbt, cfg.seed);
    case Backend::Mlp: return fit_mlp(ts.features, ts.targets, cfg.mlp, cfg.seed);
  }
  throw Error(ErrorKind::InvalidArgument, "unknown backend");
}

}  // namespace

FittedPipeline train(const Series& s, const PipelineConfig& cfg) {
  cfg.validate();
  const std::size_t window = cfg.window_n == 0 ? s.size() : cfg.window_n;
  if (s.size() < window || window < min_lrf_length(cfg.m)) {
    throw Error(ErrorKind::TooShort, "series of length " + std::to_string(s.size()) + " cannot fill a window of " +
                                         std::to_string(std::max(window, min_lrf_length(cfg.m))));
  }
  Series tail = s.slice(s.size() - window, window);
  if (!is_uniform_grid(tail.xs())) {
    throw Error(ErrorKind::GridMismatch, "training window must lie on a uniform grid");
  }

  NormParams norm = NormParams::identity();
  Series normalized = tail;
  if (tail.max_y() > tail.min_y()) {
    auto n = normalize_01(tail);
    norm = n.params;
    normalized = std::move(n.series);
  }

  StationaryModel st;
  st.train_xs.assign(tail.xs().begin(), tail.xs().end());
  if (cfg.use_st) st = fit_stationary(normalized);
  const Series stationary = apply_stationary(st, normalized);

  LrfModel lrf = fit_lrf(stationary, cfg.m, cfg.ridge_lambda);
  const TrainingSet ts = encode_training_set(lrf, stationary);
  Regressor reg = fit_backend(ts, cfg);

  return FittedPipeline{cfg, norm, std::move(st), std::move(lrf), std::move(reg), std::move(tail)};
}

Series to_model_space(const FittedPipeline& p, const Series& s) {
  return apply_stationary(p.st, apply_norm(s, p.norm));
}

double from_model_space(const FittedPipeline& p, double s_val, double x) {
  return p.norm.inverse(invert_stationary(p.st, s_val, x));
}

Series generalize(const FittedPipeline& p, std::size_t horizon) {
  if (horizon < 1) throw Error(ErrorKind::InvalidArgument, "horizon must be >= 1");
  const std::size_t m = p.lrf.m;
  const std::size_t span_len = 2 * m + 1;  // enough history for the deepest unit

  const Series model_space = to_model_space(p, p.train_tail);
  std::vector<double> window(model_space.ys().begin(), model_space.ys().end());
  window.reserve(window.size() + horizon);

  TrendCursor cursor(p.st);
  std::vector<double> xs(horizon), ys(horizon);
  for (std::size_t step = 0; step < horizon; ++step) {
    const std::span<const double> recent(window.data() + window.size() - span_len, span_len);
    const FeatureVector f = encode(p.lrf, recent, span_len - 1);
    const double pred = p.reg.predict(f.values);

    const double x = cursor.next_x();
    const double g = cursor.advance();
    if (p.st.branch != StBranch::Identity && !(g > kMinDenominator)) {
      throw Error(ErrorKind::NonPositiveDenominator, "trend denominator vanished at step " + std::to_string(step + 1));
    }
    const double y_norm = p.st.branch == StBranch::Identity ? pred : pred * g - 1.0;
    const double y = p.norm.inverse(y_norm);
    if (!std::isfinite(pred) || !std::isfinite(y)) {
      throw Error(ErrorKind::NonFinite, "prediction diverged at step " + std::to_string(step + 1));
    }
    xs[step] = x;
    ys[step] = y;
    window.push_back(pred);
  }
  return Series(std::move(xs), std::move(ys));
}

Series fitted_values(const FittedPipeline& p) {
  const Series model_space = to_model_space(p, p.train_tail);
  const TrainingSet ts = encode_training_set(p.lrf, model_space);
  const auto g = p.st.denominators(p.train_tail.xs());
  std::vector<double> xs(ts.targets.size()), ys(ts.targets.size());
  for (std::size_t r = 0; r < ts.targets.size(); ++r) {
    const std::size_t at = ts.positions[r] + 1;
    const double pred = p.reg.predict(ts.features.row(r));
    const double y_norm = p.st.branch == StBranch::Identity ? pred : pred * g[at] - 1.0;
    xs[r] = p.train_tail.x(at);
    ys[r] = p.norm.inverse(y_norm);
  }
  return Series(std::move(xs), std::move(ys));
}

}  // namespace lrfnet
