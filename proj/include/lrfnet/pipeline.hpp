#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

#include "lrfnet/lrf.hpp"
#include "lrfnet/regress.hpp"
#include "lrfnet/series.hpp"
#include "lrfnet/stationary.hpp"

namespace lrfnet {

struct PipelineConfig {
  std::size_t m = 4;
  Backend backend = Backend::Mlp;
  GbtParams gbt;
  MlpParams mlp;
  bool use_st = true;
  std::uint64_t seed = 1;
  /// Training window length; 0 means the whole series.
  std::size_t window_n = 0;
  double ridge_lambda = 0.0;

  void validate() const;
  friend bool operator==(const PipelineConfig&, const PipelineConfig&) = default;
};

/// The fitted forecasting function: 0-1 normalization, stationary transform,
/// LRF encoder and fine-tune regressor, plus the training window that seeds
/// rolling generalization.
struct FittedPipeline {
  PipelineConfig config;
  NormParams norm;
  StationaryModel st;
  LrfModel lrf;
  Regressor reg;
  Series train_tail;

  friend bool operator==(const FittedPipeline&, const FittedPipeline&) = default;
};

FittedPipeline train(const Series& s, const PipelineConfig& cfg);

/// Normalized and stationarized values of `s` under the fitted transforms.
Series to_model_space(const FittedPipeline& p, const Series& s);
/// Inverse of to_model_space for a single value at x.
double from_model_space(const FittedPipeline& p, double s_val, double x);

/// Rolling one-step-ahead forecast of `horizon` samples on the continued
/// grid. Throws NonFinite naming the step when a prediction diverges.
Series generalize(const FittedPipeline& p, std::size_t horizon);

/// In-sample one-step-ahead predictions at every training pair, in original
/// units, on the grid of the predicted samples.
Series fitted_values(const FittedPipeline& p);

inline constexpr int kPipelineFormatVersion = 1;

std::string to_json(const FittedPipeline& p);
FittedPipeline from_json(const std::string& text);
void save(const FittedPipeline& p, std::ostream& out);
FittedPipeline load(std::istream& in);
void save_file(const FittedPipeline& p, const std::filesystem::path& path);
FittedPipeline load_file(const std::filesystem::path& path);

}  // namespace lrfnet
