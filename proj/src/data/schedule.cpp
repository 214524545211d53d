#include "fedcl/data/schedule.hpp"

#include "fedcl/errors.hpp"

namespace fedcl {

TimeRange TaskSchedule::span() const {
  return TimeRange{base.begin, tasks.empty() ? base.end : tasks.back().end};
}

const TimeRange& TaskSchedule::range(std::size_t task) const {
  if (task == 0) return base;
  if (task > tasks.size()) throw ScheduleError("task index out of range");
  return tasks[task - 1];
}

TaskSchedule build_schedule(const ScheduleConfig& config) {
  if (config.num_tasks < 1) throw ScheduleError("at least one continual task is required");
  HourStamp start = 0;
  try {
    start = parse_date(config.start);
  } catch (const Error& e) {
    throw ScheduleError(std::string("schedule start: ") + e.what());
  }
  TaskSchedule s;
  if (config.mode == ScheduleConfig::Mode::meteorological) {
    const CivilTime c = to_civil(start);
    if (c.day != 1 || c.month % 3 != 0) {
      throw ScheduleError("meteorological schedules must start on the 1st of Mar, Jun, Sep or Dec");
    }
    if (config.base_months <= 0 || config.base_months % 3 != 0) {
      throw ScheduleError("base_months must be a positive multiple of 3");
    }
    s.base = {start, add_months(start, config.base_months)};
    HourStamp cursor = s.base.end;
    for (int i = 0; i < config.num_tasks; ++i) {
      const HourStamp next = add_months(cursor, 3);
      s.tasks.push_back({cursor, next});
      cursor = next;
    }
  } else {
    if (config.base_days <= 0 || config.season_days <= 0) {
      throw ScheduleError("base_days and season_days must be positive");
    }
    s.base = {start, start + 24LL * config.base_days};
    HourStamp cursor = s.base.end;
    for (int i = 0; i < config.num_tasks; ++i) {
      s.tasks.push_back({cursor, cursor + 24LL * config.season_days});
      cursor += 24LL * config.season_days;
    }
  }
  return s;
}

void check_coverage(const TaskSchedule& schedule, HourStamp data_begin, HourStamp data_end) {
  const TimeRange all = schedule.span();
  if (all.begin < data_begin || all.end > data_end) {
    throw ScheduleError("schedule [" + format_stamp(all.begin) + ", " + format_stamp(all.end) +
                        ") exceeds available data [" + format_stamp(data_begin) + ", " +
                        format_stamp(data_end) + ")");
  }
}

}  // namespace fedcl
