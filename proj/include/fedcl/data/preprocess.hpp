#pragma once

#include <span>
#include <string>
#include <vector>

#include "fedcl/core/tensor.hpp"
#include "fedcl/data/calendar.hpp"
#include "fedcl/data/raw_series.hpp"

namespace fedcl {

/// Forward fill then backward fill, per column (numeric and categorical).
/// Throws ImputationError naming the first column that has no value at all.
RawSeries impute(const RawSeries& series);

/// Encoded model inputs for one station, one row per hour.
struct FeatureMatrix {
  std::vector<std::string> columns;
  /// true for sin/cos pair columns, which are already bounded and never rescaled.
  std::vector<bool> cyclical;
  Tensor values;  // [T, d]
  std::vector<HourStamp> times;
  std::string target_column;

  std::size_t rows() const noexcept { return times.size(); }
  std::size_t width() const noexcept { return columns.size(); }
  std::size_t column_index(const std::string& name) const;
  /// Rows whose timestamp lies in [begin, end).
  FeatureMatrix slice(HourStamp begin, HourStamp end) const;
};

struct EncodeOptions {
  std::string target_column = "TEMP";
  std::string wind_column = "wd";
  /// Season-of-year sin/cos pair; off by default because tasks are seasons.
  bool include_season = false;
};

/// Compass token (16-point, e.g. "NNE") to degrees clockwise from north.
double compass_degrees(const std::string& token);

/// Numeric columns pass through; hour of day, day of week and wind direction
/// become sin/cos pairs. Input must be imputed. Throws EncodingError.
FeatureMatrix encode_features(const RawSeries& series, const EncodeOptions& options);

/// Percentile with linear interpolation between order statistics of a sorted range.
double percentile_sorted(std::span<const double> sorted, double q);

/// Per-column robust range: lo = 1st percentile, hi = 99th percentile.
struct ScalerParams {
  std::vector<std::string> columns;
  std::vector<double> lo;
  std::vector<double> hi;

  std::size_t index(const std::string& column) const;
  double scale(const std::string& column, double x) const;
  double unscale(const std::string& column, double v) const;
};

/// Fits over the concatenated rows of every matrix (all clients). Only
/// non-cyclical columns are fitted. Throws ScaleError for degenerate columns.
ScalerParams fit_scaler(std::span<const FeatureMatrix> matrices);

/// x -> (x - lo) / (hi - lo) on every fitted column; no clipping.
FeatureMatrix apply_scaler(const FeatureMatrix& matrix, const ScalerParams& scaler);

}  // namespace fedcl
