#include "fedcl/data/calendar.hpp"

#include <charconv>
#include <chrono>
#include <cstdio>

#include "fedcl/errors.hpp"

namespace fedcl {

namespace chr = std::chrono;

HourStamp to_hour_stamp(int year, unsigned month, unsigned day, int hour) {
  const chr::year_month_day ymd{chr::year{year}, chr::month{month}, chr::day{day}};
  if (!ymd.ok()) {
    throw Error("invalid calendar date " + std::to_string(year) + "-" + std::to_string(month) +
                "-" + std::to_string(day));
  }
  if (hour < 0 || hour > 23) throw Error("hour out of range: " + std::to_string(hour));
  const auto days = chr::sys_days{ymd}.time_since_epoch().count();
  return static_cast<HourStamp>(days) * 24 + hour;
}

namespace {

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

}  // namespace

CivilTime to_civil(HourStamp stamp) {
  const std::int64_t days = floor_div(stamp, 24);
  const int hour = static_cast<int>(stamp - days * 24);
  const chr::year_month_day ymd{chr::sys_days{chr::days{days}}};
  return CivilTime{static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                   static_cast<unsigned>(ymd.day()), hour};
}

int day_of_week(HourStamp stamp) {
  const chr::sys_days d{chr::days{floor_div(stamp, 24)}};
  return static_cast<int>(chr::weekday{d}.iso_encoding()) - 1;
}

int meteorological_season(unsigned month) {
  if (month < 1 || month > 12) throw Error("month out of range");
  return static_cast<int>(((month + 9) % 12) / 3);
}

HourStamp parse_date(std::string_view text) {
  int y = 0;
  unsigned m = 0, d = 0;
  auto parse_part = [&](std::string_view part, auto& out) {
    auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), out);
    return ec == std::errc() && ptr == part.data() + part.size();
  };
  if (text.size() != 10 || text[4] != '-' || text[7] != '-' || !parse_part(text.substr(0, 4), y) ||
      !parse_part(text.substr(5, 2), m) || !parse_part(text.substr(8, 2), d)) {
    throw Error("expected a YYYY-MM-DD date, got '" + std::string(text) + "'");
  }
  return to_hour_stamp(y, m, d, 0);
}

std::string format_stamp(HourStamp stamp) {
  const CivilTime c = to_civil(stamp);
  char buf[32];
  if (c.hour == 0) {
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", c.year, c.month, c.day);
  } else {
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u %02d:00", c.year, c.month, c.day, c.hour);
  }
  return buf;
}

HourStamp add_months(HourStamp stamp, int months) {
  const CivilTime c = to_civil(stamp);
  const int total = c.year * 12 + static_cast<int>(c.month) - 1 + months;
  const int year = floor_div(total, 12);
  const unsigned month = static_cast<unsigned>(total - year * 12 + 1);
  return to_hour_stamp(year, month, c.day, c.hour);
}

}  // namespace fedcl
