#include "gridcast/time.hpp"

#include <chrono>
#include <cstdio>

namespace gridcast {

namespace {

namespace chr = std::chrono;

constexpr std::int64_t kSecondsPerDay = 86400;

std::int64_t days_from_civil(int y, int m, int d) {
  const chr::year_month_day ymd{chr::year{y}, chr::month{static_cast<unsigned>(m)},
                                chr::day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) {
    throw DataError("invalid civil date " + std::to_string(y) + "-" + std::to_string(m) + "-" +
                    std::to_string(d));
  }
  return chr::sys_days{ymd}.time_since_epoch().count();
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b) != 0 && ((a < 0) != (b < 0))) --q;
  return q;
}

std::int64_t floor_mod(std::int64_t a, std::int64_t b) { return a - floor_div(a, b) * b; }

}  // namespace

Timestamp make_timestamp(const CivilTime& c) {
  if (c.hour < 0 || c.hour > 23 || c.minute < 0 || c.minute > 59 || c.second < 0 ||
      c.second > 59) {
    throw DataError("invalid time of day " + std::to_string(c.hour) + ":" +
                    std::to_string(c.minute) + ":" + std::to_string(c.second));
  }
  const std::int64_t days = days_from_civil(c.year, c.month, c.day);
  return Timestamp{days * kSecondsPerDay + c.hour * 3600 + c.minute * 60 + c.second};
}

Timestamp make_timestamp(int year, int month, int day, int hour, int minute, int second) {
  return make_timestamp(CivilTime{year, month, day, hour, minute, second});
}

CivilTime civil_from(Timestamp ts) {
  const std::int64_t days = floor_div(ts.seconds, kSecondsPerDay);
  const std::int64_t sod = floor_mod(ts.seconds, kSecondsPerDay);
  const chr::year_month_day ymd{chr::sys_days{chr::days{days}}};
  CivilTime c;
  c.year = static_cast<int>(ymd.year());
  c.month = static_cast<int>(static_cast<unsigned>(ymd.month()));
  c.day = static_cast<int>(static_cast<unsigned>(ymd.day()));
  c.hour = static_cast<int>(sod / 3600);
  c.minute = static_cast<int>((sod % 3600) / 60);
  c.second = static_cast<int>(sod % 60);
  return c;
}

int day_of_week(Timestamp ts) {
  const std::int64_t days = floor_div(ts.seconds, kSecondsPerDay);
  // 1970-01-01 was a Thursday (3 with Monday = 0).
  return static_cast<int>(floor_mod(days + 3, 7));
}

Timestamp add_years(Timestamp ts, int n) {
  CivilTime c = civil_from(ts);
  c.year += n;
  if (c.month == 2 && c.day == 29) {
    const chr::year_month_day probe{chr::year{c.year}, chr::month{2}, chr::day{29}};
    if (!probe.ok()) c.day = 28;
  }
  return make_timestamp(c);
}

Timestamp floor_hour(Timestamp ts) {
  return Timestamp{floor_div(ts.seconds, 3600) * 3600};
}

Timestamp floor_minute(Timestamp ts) {
  return Timestamp{floor_div(ts.seconds, 60) * 60};
}

std::string iso8601(Timestamp ts) {
  const CivilTime c = civil_from(ts);
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02d", c.year, c.month, c.day,
                c.hour, c.minute, c.second);
  return buf;
}

Timestamp parse_iso8601(const std::string& text) {
  CivilTime c;
  if (std::sscanf(text.c_str(), "%d-%d-%dT%d:%d:%d", &c.year, &c.month, &c.day, &c.hour,
                  &c.minute, &c.second) < 5) {
    throw DataError("unparseable ISO-8601 timestamp: '" + text + "'");
  }
  return make_timestamp(c);
}

void CalendarFeatures::validate() const {
  if (day < 1 || day > 31) {
    throw DataError("calendar day out of range 1..31: " + std::to_string(day));
  }
  if (day_week < 0 || day_week > 6) {
    throw DataError("calendar day_week out of range 0..6: " + std::to_string(day_week));
  }
  if (hour < 0 || hour > 23) {
    throw DataError("calendar hour out of range 0..23: " + std::to_string(hour));
  }
}

CalendarFeatures calendar_features(Timestamp ts) {
  const CivilTime c = civil_from(ts);
  return CalendarFeatures{c.day, day_of_week(ts), c.hour};
}

}  // namespace gridcast
