#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace fedcl {

/// Hours since 1970-01-01T00:00 on a naive (timezone-free) clock.
using HourStamp = std::int64_t;

struct CivilTime {
  int year = 1970;
  unsigned month = 1;
  unsigned day = 1;
  int hour = 0;
};

/// Throws Error when the date is not a valid calendar date or hour is out of [0, 23].
HourStamp to_hour_stamp(int year, unsigned month, unsigned day, int hour = 0);
CivilTime to_civil(HourStamp stamp);

/// Monday = 0 ... Sunday = 6.
int day_of_week(HourStamp stamp);

/// Meteorological season: 0 = Mar-May, 1 = Jun-Aug, 2 = Sep-Nov, 3 = Dec-Feb.
int meteorological_season(unsigned month);

/// Parses "YYYY-MM-DD".
HourStamp parse_date(std::string_view text);
/// "YYYY-MM-DD" or "YYYY-MM-DD HH:00" when the hour is nonzero.
std::string format_stamp(HourStamp stamp);

/// Adds calendar months, keeping the day of month (which must exist in the target month).
HourStamp add_months(HourStamp stamp, int months);

}  // namespace fedcl
