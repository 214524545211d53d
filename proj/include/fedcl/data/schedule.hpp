#pragma once

#include <string>
#include <vector>

#include "fedcl/data/calendar.hpp"

namespace fedcl {

/// Half-open hour range [begin, end).
struct TimeRange {
  HourStamp begin = 0;
  HourStamp end = 0;

  HourStamp hours() const noexcept { return end - begin; }
  bool contains(HourStamp t) const noexcept { return t >= begin && t < end; }
  bool overlaps(const TimeRange& o) const noexcept { return begin < o.end && o.begin < end; }
  friend bool operator==(const TimeRange&, const TimeRange&) = default;
};

/// Base task T0 followed by N chronological, disjoint continual tasks.
struct TaskSchedule {
  TimeRange base;
  std::vector<TimeRange> tasks;

  std::size_t num_tasks() const noexcept { return tasks.size(); }
  /// Range covering the base task and every continual task.
  TimeRange span() const;
  /// Task 0 is the base task, 1..N the continual tasks.
  const TimeRange& range(std::size_t task) const;
};

struct ScheduleConfig {
  enum class Mode { meteorological, fixed_days };
  Mode mode = Mode::meteorological;
  std::string start = "2013-03-01";
  /// meteorological mode: base length in months (multiple of 3).
  int base_months = 12;
  /// fixed_days mode: base and season lengths in days.
  int base_days = 365;
  int season_days = 90;
  int num_tasks = 11;
};

/// Meteorological mode splits time after the base into 3-month seasons
/// (Mar-May, Jun-Aug, Sep-Nov, Dec-Feb) and requires `start` on a season
/// boundary. Throws ScheduleError.
TaskSchedule build_schedule(const ScheduleConfig& config);

/// Throws ScheduleError if any range falls outside [data_begin, data_end).
void check_coverage(const TaskSchedule& schedule, HourStamp data_begin, HourStamp data_end);

}  // namespace fedcl
