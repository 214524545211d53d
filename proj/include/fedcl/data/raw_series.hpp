#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fedcl/data/calendar.hpp"

namespace fedcl {

/// Column names expected in each station CSV besides the time and station columns.
struct CsvSchema {
  std::vector<std::string> numeric_columns{"PM2.5", "PM10", "SO2", "NO2", "CO", "O3",
                                           "TEMP",  "PRES", "DEWP", "RAIN", "WSPM"};
  std::vector<std::string> categorical_columns{"wd"};
  std::string station_column = "station";
  /// When nonempty, rows for any other station are rejected.
  std::vector<std::string> allowed_stations;
};

/// Hourly series for one station, stored column-major. Missing cells are nullopt.
struct RawSeries {
  std::string station;
  std::vector<std::string> numeric_columns;
  std::vector<std::string> categorical_columns;
  std::vector<HourStamp> times;
  std::vector<std::vector<std::optional<double>>> numeric;           // [column][row]
  std::vector<std::vector<std::optional<std::string>>> categorical;  // [column][row]

  std::size_t rows() const noexcept { return times.size(); }
  std::size_t numeric_index(const std::string& name) const;
  std::size_t categorical_index(const std::string& name) const;
};

/// Reads one CSV; returns one series per station found (sorted by station
/// name), each sorted by time and regularised to an hourly grid with
/// all-missing rows inserted for gaps. Throws IngestionError with the file line.
std::vector<RawSeries> ingest_csv(const std::filesystem::path& path, const CsvSchema& schema);

/// Ingests every *.csv in `dir` (sorted by file name) and merges by station.
std::vector<RawSeries> ingest_csv_dir(const std::filesystem::path& dir, const CsvSchema& schema);

/// Writes the station CSV layout (No, year, month, day, hour, features..., station).
/// Missing cells are written as NA.
void write_csv(const std::filesystem::path& path, const RawSeries& series);

}  // namespace fedcl
