#include "fedcl/data/raw_series.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "fedcl/errors.hpp"

namespace fedcl {

namespace {

// Order of the feature columns in the upstream station files.
const std::vector<std::string> kCanonicalOrder{"PM2.5", "PM10", "SO2",  "NO2", "CO",  "O3",
                                               "TEMP",  "PRES", "DEWP", "RAIN", "wd", "WSPM"};

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (char ch : line) {
    if (ch == '"') {
      quoted = !quoted;
    } else if (ch == ',' && !quoted) {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

bool is_missing(const std::string& cell) { return cell.empty() || cell == "NA" || cell == "NaN"; }

template <class T>
bool parse_number(const std::string& cell, T& out) {
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), out);
  return ec == std::errc() && ptr == cell.data() + cell.size();
}

struct PendingRow {
  HourStamp time;
  long line;
  std::vector<std::optional<double>> numeric;
  std::vector<std::optional<std::string>> categorical;
};

RawSeries regularize(const std::string& station, const CsvSchema& schema,
                     std::vector<PendingRow> rows) {
  std::stable_sort(rows.begin(), rows.end(),
                   [](const PendingRow& a, const PendingRow& b) { return a.time < b.time; });
  RawSeries s;
  s.station = station;
  s.numeric_columns = schema.numeric_columns;
  s.categorical_columns = schema.categorical_columns;
  s.numeric.assign(schema.numeric_columns.size(), {});
  s.categorical.assign(schema.categorical_columns.size(), {});
  if (rows.empty()) return s;

  const HourStamp first = rows.front().time;
  const HourStamp last = rows.back().time;
  const auto span = static_cast<std::size_t>(last - first + 1);
  s.times.resize(span);
  std::iota(s.times.begin(), s.times.end(), first);
  for (auto& col : s.numeric) col.assign(span, std::nullopt);
  for (auto& col : s.categorical) col.assign(span, std::nullopt);

  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (r > 0 && rows[r].time == rows[r - 1].time) {
      throw IngestionError("duplicate timestamp " + format_stamp(rows[r].time) + " for station '" +
                               station + "'",
                           rows[r].line);
    }
    const auto idx = static_cast<std::size_t>(rows[r].time - first);
    for (std::size_t c = 0; c < s.numeric.size(); ++c) s.numeric[c][idx] = rows[r].numeric[c];
    for (std::size_t c = 0; c < s.categorical.size(); ++c) {
      s.categorical[c][idx] = std::move(rows[r].categorical[c]);
    }
  }
  return s;
}

std::map<std::string, std::vector<PendingRow>> read_rows(const std::filesystem::path& path,
                                                         const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw IngestionError("cannot open '" + path.string() + "'", 0);
  std::string line;
  if (!std::getline(in, line)) throw IngestionError("empty file '" + path.string() + "'", 1);
  if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line = line.substr(3);
  const auto header = split_line(line);
  auto column = [&](const std::string& name) -> std::size_t {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (trim(header[i]) == name) return i;
    }
    throw IngestionError("missing column '" + name + "' in '" + path.string() + "'", 1);
  };
  const std::size_t c_year = column("year");
  const std::size_t c_month = column("month");
  const std::size_t c_day = column("day");
  const std::size_t c_hour = column("hour");
  const std::size_t c_station = column(schema.station_column);
  std::vector<std::size_t> c_num, c_cat;
  for (const auto& n : schema.numeric_columns) c_num.push_back(column(n));
  for (const auto& n : schema.categorical_columns) c_cat.push_back(column(n));

  std::map<std::string, std::vector<PendingRow>> by_station;
  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty() || line == "\r") continue;
    const auto cells = split_line(line);
    if (cells.size() != header.size()) {
      throw IngestionError("expected " + std::to_string(header.size()) + " fields, found " +
                               std::to_string(cells.size()),
                           line_no);
    }
    int year = 0, hour = 0;
    unsigned month = 0, day = 0;
    if (!parse_number(trim(cells[c_year]), year) || !parse_number(trim(cells[c_month]), month) ||
        !parse_number(trim(cells[c_day]), day) || !parse_number(trim(cells[c_hour]), hour)) {
      throw IngestionError("malformed timestamp", line_no);
    }
    PendingRow row;
    row.line = line_no;
    try {
      row.time = to_hour_stamp(year, month, day, hour);
    } catch (const Error&) {
      throw IngestionError("malformed timestamp", line_no);
    }
    const std::string station = trim(cells[c_station]);
    if (station.empty()) throw IngestionError("empty station name", line_no);
    if (!schema.allowed_stations.empty() &&
        std::find(schema.allowed_stations.begin(), schema.allowed_stations.end(), station) ==
            schema.allowed_stations.end()) {
      throw IngestionError("unknown station '" + station + "'", line_no);
    }
    for (std::size_t k = 0; k < c_num.size(); ++k) {
      const std::string cell = trim(cells[c_num[k]]);
      if (is_missing(cell)) {
        row.numeric.emplace_back(std::nullopt);
        continue;
      }
      double v = 0.0;
      if (!parse_number(cell, v)) {
        throw IngestionError("non-numeric value '" + cell + "' in column '" +
                                 schema.numeric_columns[k] + "'",
                             line_no);
      }
      row.numeric.emplace_back(v);
    }
    for (std::size_t k = 0; k < c_cat.size(); ++k) {
      const std::string cell = trim(cells[c_cat[k]]);
      if (is_missing(cell)) {
        row.categorical.emplace_back(std::nullopt);
      } else {
        row.categorical.emplace_back(cell);
      }
    }
    by_station[station].push_back(std::move(row));
  }
  return by_station;
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace

std::size_t RawSeries::numeric_index(const std::string& name) const {
  for (std::size_t i = 0; i < numeric_columns.size(); ++i) {
    if (numeric_columns[i] == name) return i;
  }
  throw Error("series has no numeric column '" + name + "'");
}

std::size_t RawSeries::categorical_index(const std::string& name) const {
  for (std::size_t i = 0; i < categorical_columns.size(); ++i) {
    if (categorical_columns[i] == name) return i;
  }
  throw Error("series has no categorical column '" + name + "'");
}

std::vector<RawSeries> ingest_csv(const std::filesystem::path& path, const CsvSchema& schema) {
  auto rows = read_rows(path, schema);
  std::vector<RawSeries> out;
  for (auto& [station, station_rows] : rows) {
    out.push_back(regularize(station, schema, std::move(station_rows)));
  }
  return out;
}

std::vector<RawSeries> ingest_csv_dir(const std::filesystem::path& dir, const CsvSchema& schema) {
  if (!std::filesystem::is_directory(dir)) {
    throw IngestionError("data directory '" + dir.string() + "' does not exist", 0);
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".csv") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::map<std::string, std::vector<PendingRow>> merged;
  for (const auto& f : files) {
    for (auto& [station, rows] : read_rows(f, schema)) {
      auto& dst = merged[station];
      std::move(rows.begin(), rows.end(), std::back_inserter(dst));
    }
  }
  std::vector<RawSeries> out;
  for (auto& [station, rows] : merged) out.push_back(regularize(station, schema, std::move(rows)));
  return out;
}

void write_csv(const std::filesystem::path& path, const RawSeries& series) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path.string() + "'");

  struct Col {
    std::string name;
    bool numeric;
    std::size_t index;
  };
  std::vector<Col> cols;
  auto find_col = [&](const std::string& name) -> std::optional<Col> {
    for (std::size_t i = 0; i < series.numeric_columns.size(); ++i) {
      if (series.numeric_columns[i] == name) return Col{name, true, i};
    }
    for (std::size_t i = 0; i < series.categorical_columns.size(); ++i) {
      if (series.categorical_columns[i] == name) return Col{name, false, i};
    }
    return std::nullopt;
  };
  for (const auto& name : kCanonicalOrder) {
    if (auto c = find_col(name)) cols.push_back(*c);
  }
  auto listed = [&](const std::string& name) {
    return std::any_of(cols.begin(), cols.end(), [&](const Col& c) { return c.name == name; });
  };
  for (const auto& n : series.numeric_columns) {
    if (!listed(n)) cols.push_back(*find_col(n));
  }
  for (const auto& n : series.categorical_columns) {
    if (!listed(n)) cols.push_back(*find_col(n));
  }

  out << "No,year,month,day,hour";
  for (const auto& c : cols) out << ',' << c.name;
  out << ",station\n";
  for (std::size_t r = 0; r < series.rows(); ++r) {
    const CivilTime t = to_civil(series.times[r]);
    out << (r + 1) << ',' << t.year << ',' << t.month << ',' << t.day << ',' << t.hour;
    for (const auto& c : cols) {
      out << ',';
      if (c.numeric) {
        const auto& v = series.numeric[c.index][r];
        out << (v ? format_double(*v) : std::string("NA"));
      } else {
        const auto& v = series.categorical[c.index][r];
        out << (v ? *v : std::string("NA"));
      }
    }
    out << ',' << series.station << '\n';
  }
}

}  // namespace fedcl
