#pragma once

#include <cstdint>
#include <string>

#include "gridcast/errors.hpp"

namespace gridcast {

// Civil (wall-clock) time of the dataset, stored as seconds since the Unix
// epoch with no time-zone handling: the benchmark file carries local civil
// timestamps and all arithmetic stays in that frame.
struct Timestamp {
  std::int64_t seconds = 0;

  friend auto operator<=>(const Timestamp&, const Timestamp&) = default;
  Timestamp operator+(std::int64_t s) const { return Timestamp{seconds + s}; }
  Timestamp operator-(std::int64_t s) const { return Timestamp{seconds - s}; }
  std::int64_t operator-(const Timestamp& other) const { return seconds - other.seconds; }
};

struct CivilTime {
  int year = 1970;
  int month = 1;  // 1..12
  int day = 1;    // 1..31
  int hour = 0;   // 0..23
  int minute = 0; // 0..59
  int second = 0; // 0..59
};

Timestamp make_timestamp(const CivilTime& civil);
Timestamp make_timestamp(int year, int month, int day, int hour = 0, int minute = 0,
                         int second = 0);
CivilTime civil_from(Timestamp ts);

// Day of week, Monday = 0 .. Sunday = 6.
int day_of_week(Timestamp ts);

// Same civil date/time, `n` calendar years later (Feb 29 clamps to Feb 28).
Timestamp add_years(Timestamp ts, int n);

Timestamp floor_hour(Timestamp ts);
Timestamp floor_minute(Timestamp ts);

// "YYYY-MM-DDThh:mm:ss".
std::string iso8601(Timestamp ts);
Timestamp parse_iso8601(const std::string& text);

// The three date/time inputs of the forecasting models.
// Raw integer ranges; scaled accessors map each affinely into [0, 1].
struct CalendarFeatures {
  int day = 1;       // day of month, 1..31
  int day_week = 0;  // Monday = 0 .. Sunday = 6
  int hour = 0;      // 0..23

  void validate() const;
  double day_scaled() const { return (day - 1) / 30.0; }
  double day_week_scaled() const { return day_week / 6.0; }
  double hour_scaled() const { return hour / 23.0; }
};

CalendarFeatures calendar_features(Timestamp ts);

}  // namespace gridcast
