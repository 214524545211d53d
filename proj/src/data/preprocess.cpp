#include "fedcl/data/preprocess.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "fedcl/errors.hpp"

namespace fedcl {

namespace {

template <class T>
void fill_column(std::vector<std::optional<T>>& col, const std::string& name) {
  std::optional<T> last;
  for (auto& v : col) {
    if (v) {
      last = v;
    } else if (last) {
      v = last;
    }
  }
  const auto first = std::find_if(col.begin(), col.end(), [](const auto& v) { return v.has_value(); });
  if (first == col.end()) throw ImputationError(name);
  for (auto it = col.begin(); it != first; ++it) *it = *first;
}

constexpr std::array<const char*, 16> kCompass{"N", "NNE", "NE", "ENE", "E", "ESE", "SE", "SSE",
                                               "S", "SSW", "SW", "WSW", "W", "WNW", "NW", "NNW"};

}  // namespace

RawSeries impute(const RawSeries& series) {
  RawSeries out = series;
  if (out.rows() == 0) return out;
  for (std::size_t c = 0; c < out.numeric.size(); ++c) {
    fill_column(out.numeric[c], out.numeric_columns[c]);
  }
  for (std::size_t c = 0; c < out.categorical.size(); ++c) {
    fill_column(out.categorical[c], out.categorical_columns[c]);
  }
  return out;
}

std::size_t FeatureMatrix::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == name) return i;
  }
  throw Error("feature matrix has no column '" + name + "'");
}

FeatureMatrix FeatureMatrix::slice(HourStamp begin, HourStamp end) const {
  const auto lo = std::lower_bound(times.begin(), times.end(), begin);
  const auto hi = std::lower_bound(times.begin(), times.end(), end);
  const auto first = static_cast<std::size_t>(lo - times.begin());
  const auto count = static_cast<std::size_t>(hi - lo);
  FeatureMatrix out;
  out.columns = columns;
  out.cyclical = cyclical;
  out.target_column = target_column;
  out.times.assign(lo, hi);
  const std::size_t w = width();
  std::vector<double> data(values.data().begin() + static_cast<std::ptrdiff_t>(first * w),
                           values.data().begin() + static_cast<std::ptrdiff_t>((first + count) * w));
  out.values = Tensor({count, w}, std::move(data));
  return out;
}

double compass_degrees(const std::string& token) {
  for (std::size_t i = 0; i < kCompass.size(); ++i) {
    if (token == kCompass[i]) return 22.5 * static_cast<double>(i);
  }
  throw EncodingError("unknown wind direction '" + token + "'");
}

FeatureMatrix encode_features(const RawSeries& series, const EncodeOptions& options) {
  const std::size_t rows = series.rows();
  FeatureMatrix m;
  m.times = series.times;
  m.target_column = options.target_column;

  bool has_target = false;
  for (const auto& name : series.numeric_columns) {
    m.columns.push_back(name);
    m.cyclical.push_back(false);
    has_target = has_target || name == options.target_column;
  }
  if (!has_target) {
    throw EncodingError("target column '" + options.target_column + "' is not a numeric column");
  }
  const bool has_wind =
      std::find(series.categorical_columns.begin(), series.categorical_columns.end(),
                options.wind_column) != series.categorical_columns.end();
  std::vector<std::string> pairs;
  if (has_wind) pairs.push_back(options.wind_column);
  pairs.push_back("hour");
  pairs.push_back("dow");
  if (options.include_season) pairs.push_back("season");
  for (const auto& p : pairs) {
    m.columns.push_back(p + "_sin");
    m.columns.push_back(p + "_cos");
    m.cyclical.push_back(true);
    m.cyclical.push_back(true);
  }

  const std::size_t w = m.columns.size();
  std::vector<double> data(rows * w);
  const double two_pi = 2.0 * std::numbers::pi;
  const std::size_t wind_idx = has_wind ? series.categorical_index(options.wind_column) : 0;
  for (std::size_t r = 0; r < rows; ++r) {
    double* out = data.data() + r * w;
    std::size_t c = 0;
    for (std::size_t k = 0; k < series.numeric.size(); ++k) {
      const auto& v = series.numeric[k][r];
      if (!v) throw EncodingError("column '" + series.numeric_columns[k] + "' has missing values");
      out[c++] = *v;
    }
    auto put_angle = [&](double radians) {
      out[c++] = std::sin(radians);
      out[c++] = std::cos(radians);
    };
    if (has_wind) {
      const auto& token = series.categorical[wind_idx][r];
      if (!token) throw EncodingError("column '" + options.wind_column + "' has missing values");
      put_angle(compass_degrees(*token) * std::numbers::pi / 180.0);
    }
    const CivilTime t = to_civil(series.times[r]);
    put_angle(two_pi * t.hour / 24.0);
    put_angle(two_pi * day_of_week(series.times[r]) / 7.0);
    if (options.include_season) put_angle(two_pi * meteorological_season(t.month) / 4.0);
  }
  m.values = Tensor({rows, w}, std::move(data));
  return m;
}

double percentile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw ScaleError("percentile of an empty column");
  if (q < 0.0 || q > 100.0) throw ScaleError("percentile must lie in [0, 100]");
  const double pos = q / 100.0 * static_cast<double>(sorted.size() - 1);
  const auto below = static_cast<std::size_t>(std::floor(pos));
  const std::size_t above = std::min(below + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(below);
  return sorted[below] + frac * (sorted[above] - sorted[below]);
}

std::size_t ScalerParams::index(const std::string& column) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == column) return i;
  }
  throw ScaleError("scaler was not fitted on column '" + column + "'");
}

double ScalerParams::scale(const std::string& column, double x) const {
  const std::size_t i = index(column);
  return (x - lo[i]) / (hi[i] - lo[i]);
}

double ScalerParams::unscale(const std::string& column, double v) const {
  const std::size_t i = index(column);
  return lo[i] + v * (hi[i] - lo[i]);
}

ScalerParams fit_scaler(std::span<const FeatureMatrix> matrices) {
  if (matrices.empty()) throw ScaleError("cannot fit a scaler without data");
  const FeatureMatrix& ref = matrices.front();
  for (const auto& m : matrices) {
    if (m.columns != ref.columns) throw ScaleError("feature matrices have different columns");
  }
  ScalerParams params;
  std::vector<double> column;
  for (std::size_t c = 0; c < ref.width(); ++c) {
    if (ref.cyclical[c]) continue;
    column.clear();
    for (const auto& m : matrices) {
      const std::size_t w = m.width();
      for (std::size_t r = 0; r < m.rows(); ++r) column.push_back(m.values.data()[r * w + c]);
    }
    std::sort(column.begin(), column.end());
    if (column.empty() || column.front() == column.back()) {
      throw ScaleError("column '" + ref.columns[c] + "' is constant; cannot scale");
    }
    const double lo = percentile_sorted(column, 1.0);
    const double hi = percentile_sorted(column, 99.0);
    if (!(hi > lo)) {
      throw ScaleError("column '" + ref.columns[c] + "' has equal 1st and 99th percentiles");
    }
    params.columns.push_back(ref.columns[c]);
    params.lo.push_back(lo);
    params.hi.push_back(hi);
  }
  return params;
}

FeatureMatrix apply_scaler(const FeatureMatrix& matrix, const ScalerParams& scaler) {
  FeatureMatrix out = matrix;
  const std::size_t w = out.width();
  for (std::size_t c = 0; c < w; ++c) {
    if (out.cyclical[c]) continue;
    const std::size_t k = scaler.index(out.columns[c]);
    const double lo = scaler.lo[k];
    const double range = scaler.hi[k] - scaler.lo[k];
    auto data = out.values.data();
    for (std::size_t r = 0; r < out.rows(); ++r) data[r * w + c] = (data[r * w + c] - lo) / range;
  }
  return out;
}

}  // namespace fedcl
