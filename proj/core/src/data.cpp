#include "gridcast/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace gridcast {

namespace {

constexpr const char* kExpectedHeader =
    "Date;Time;Global_active_power;Global_reactive_power;Voltage;Global_intensity;"
    "Sub_metering_1;Sub_metering_2;Sub_metering_3";

constexpr std::size_t kMaxSampleErrors = 5;

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

// Field is either '?' (missing) or a non-negative decimal number.
bool parse_power_field(const std::string& field, std::optional<double>& out) {
  if (field == "?") {
    out.reset();
    return true;
  }
  if (field.empty()) return false;
  char* end = nullptr;
  const double v = std::strtod(field.c_str(), &end);
  if (end != field.c_str() + field.size() || !std::isfinite(v) || v < 0.0) return false;
  out = v;
  return true;
}

bool numeric_or_missing(const std::string& field) {
  if (field == "?" || field.empty()) return field == "?";
  char* end = nullptr;
  const double v = std::strtod(field.c_str(), &end);
  return end == field.c_str() + field.size() && std::isfinite(v);
}

}  // namespace

std::string to_string(Resolution r) { return r == Resolution::minute ? "minute" : "hour"; }

Resolution resolution_from_string(const std::string& name) {
  if (name == "minute") return Resolution::minute;
  if (name == "hour") return Resolution::hour;
  throw ConfigError("unknown resolution '" + name + "' (minute | hour)");
}

ParsedDataset parse_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset file: " + path);

  std::string line;
  if (!std::getline(in, line)) throw DataError("dataset file is empty: " + path);
  strip_cr(line);
  if (line != kExpectedHeader) {
    throw DataError("unexpected dataset header in " + path + ": '" + line + "'");
  }

  ParsedDataset out;
  std::vector<std::string> fields(9);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) continue;
    ++out.report.data_rows;

    // Split on ';' into exactly 9 fields.
    std::size_t n = 0, pos = 0;
    bool ok = true;
    while (n < 9) {
      const std::size_t next = line.find(';', pos);
      if (next == std::string::npos) {
        if (n != 8) ok = false;
        fields[n++] = line.substr(pos);
        break;
      }
      fields[n++] = line.substr(pos, next - pos);
      pos = next + 1;
      if (n == 9) ok = false;  // too many fields
    }
    if (ok && n != 9) ok = false;

    int d = 0, mo = 0, y = 0, hh = 0, mm = 0, ss = 0;
    if (ok && (std::sscanf(fields[0].c_str(), "%d/%d/%d", &d, &mo, &y) != 3 ||
               std::sscanf(fields[1].c_str(), "%d:%d:%d", &hh, &mm, &ss) != 3)) {
      ok = false;
    }

    std::optional<double> power;
    if (ok && !parse_power_field(fields[2], power)) ok = false;
    for (std::size_t f = 3; ok && f < 9; ++f) {
      if (!numeric_or_missing(fields[f])) ok = false;
    }

    Timestamp ts;
    if (ok) {
      try {
        ts = make_timestamp(y, mo, d, hh, mm, ss);
      } catch (const DataError&) {
        ok = false;
      }
    }

    if (!ok) {
      ++out.report.malformed_rows;
      if (out.report.sample_errors.size() < kMaxSampleErrors) {
        out.report.sample_errors.push_back("line " + std::to_string(line_no) + ": '" +
                                           line.substr(0, 60) + "'");
      }
      continue;
    }

    ++out.report.records;
    if (!power) ++out.report.missing_power;
    out.records.push_back(RawRecord{ts, power});
  }
  return out;
}

std::size_t LoadSeries::valid_count() const {
  std::size_t n = 0;
  for (std::uint8_t v : valid) n += v != 0;
  return n;
}

std::size_t LoadSeries::index_of(Timestamp ts) const {
  const std::int64_t step = step_seconds(resolution);
  const std::int64_t offset = ts - start;
  if (offset < 0 || offset % step != 0) {
    throw DataError("timestamp " + iso8601(ts) + " is not on the series grid starting " +
                    iso8601(start));
  }
  const std::size_t idx = static_cast<std::size_t>(offset / step);
  if (idx >= size()) {
    throw DataError("timestamp " + iso8601(ts) + " is past the end of the series");
  }
  return idx;
}

void LoadSeries::check_consistent() const {
  if (values_kw.size() != valid.size()) {
    throw DataError("series arrays disagree: " + std::to_string(values_kw.size()) +
                    " values vs " + std::to_string(valid.size()) + " flags");
  }
}

LoadSeries to_minute_series(std::vector<RawRecord> records) {
  if (records.empty()) throw DataError("cannot grid an empty record set");
  if (!std::is_sorted(records.begin(), records.end(),
                      [](const RawRecord& a, const RawRecord& b) { return a.ts < b.ts; })) {
    std::stable_sort(records.begin(), records.end(),
                     [](const RawRecord& a, const RawRecord& b) { return a.ts < b.ts; });
  }

  LoadSeries s;
  s.resolution = Resolution::minute;
  s.start = floor_minute(records.front().ts);
  const Timestamp last = floor_minute(records.back().ts);
  const std::size_t n = static_cast<std::size_t>((last - s.start) / 60) + 1;
  s.values_kw.assign(n, 0.0);
  s.valid.assign(n, 0);

  std::vector<std::string> conflicts;
  for (const RawRecord& r : records) {
    const std::size_t i = static_cast<std::size_t>((floor_minute(r.ts) - s.start) / 60);
    if (!r.active_power_kw) continue;
    if (s.valid[i] && s.values_kw[i] != *r.active_power_kw) {
      if (conflicts.size() < 5) {
        conflicts.push_back(iso8601(s.timestamp_at(i)) + " (" +
                            std::to_string(s.values_kw[i]) + " vs " +
                            std::to_string(*r.active_power_kw) + ")");
      }
      continue;
    }
    s.values_kw[i] = *r.active_power_kw;
    s.valid[i] = 1;
  }
  if (!conflicts.empty()) {
    std::string msg = "conflicting duplicate timestamps:";
    for (const auto& c : conflicts) msg += " " + c + ";";
    throw DataError(msg);
  }
  return s;
}

LoadSeries resample_hourly(const LoadSeries& minutes, std::size_t min_valid_minutes) {
  minutes.check_consistent();
  if (minutes.resolution != Resolution::minute) {
    throw DataError("resample_hourly expects a minute-resolution series, got " +
                    to_string(minutes.resolution));
  }
  if (min_valid_minutes == 0 || min_valid_minutes > 60) {
    throw ConfigError("min_valid_minutes must be in 1..60, got " +
                      std::to_string(min_valid_minutes));
  }

  LoadSeries out;
  out.resolution = Resolution::hour;
  out.start = floor_hour(minutes.start);
  const Timestamp last_minute = minutes.timestamp_at(minutes.size() - 1);
  const std::size_t hours =
      static_cast<std::size_t>((floor_hour(last_minute) - out.start) / 3600) + 1;
  out.values_kw.assign(hours, 0.0);
  out.valid.assign(hours, 0);

  std::vector<std::size_t> counts(hours, 0);
  std::vector<double> sums(hours, 0.0);
  for (std::size_t i = 0; i < minutes.size(); ++i) {
    if (!minutes.valid[i]) continue;
    const std::size_t h = static_cast<std::size_t>((minutes.timestamp_at(i) - out.start) / 3600);
    sums[h] += minutes.values_kw[i];
    counts[h] += 1;
  }
  for (std::size_t h = 0; h < hours; ++h) {
    if (counts[h] >= min_valid_minutes) {
      out.values_kw[h] = sums[h] / static_cast<double>(counts[h]);
      out.valid[h] = 1;
    }
  }
  return out;
}

LoadSeries forward_fill(LoadSeries series) {
  series.check_consistent();
  bool have_last = false;
  double last = 0.0;
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (series.valid[i]) {
      last = series.values_kw[i];
      have_last = true;
    } else if (have_last) {
      series.values_kw[i] = last;
      series.valid[i] = 1;
    }
  }
  return series;
}

std::pair<LoadSeries, LoadSeries> split(const LoadSeries& series, const SplitSpec& spec) {
  series.check_consistent();
  const std::int64_t step = step_seconds(series.resolution);
  const std::int64_t offset = spec.boundary - series.start;
  if (offset % step != 0) {
    throw DataError("split boundary " + iso8601(spec.boundary) + " is off the series grid");
  }
  const std::int64_t idx = offset / step;
  if (idx <= 0 || idx >= static_cast<std::int64_t>(series.size())) {
    throw DataError("split boundary " + iso8601(spec.boundary) +
                    " leaves an empty partition (series spans " + iso8601(series.start) +
                    " .. " + iso8601(series.timestamp_at(series.size() - 1)) + ")");
  }
  const std::size_t b = static_cast<std::size_t>(idx);

  LoadSeries train, test;
  train.resolution = test.resolution = series.resolution;
  train.start = series.start;
  train.values_kw.assign(series.values_kw.begin(), series.values_kw.begin() + b);
  train.valid.assign(series.valid.begin(), series.valid.begin() + b);
  test.start = spec.boundary;
  test.values_kw.assign(series.values_kw.begin() + b, series.values_kw.end());
  test.valid.assign(series.valid.begin() + b, series.valid.end());
  return {std::move(train), std::move(test)};
}

NormStats fit_norm(const LoadSeries& train) {
  train.check_consistent();
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < train.size(); ++i) {
    if (!train.valid[i]) continue;
    sum += train.values_kw[i];
    ++n;
  }
  if (n < 2) {
    throw DataError("normalization needs at least 2 valid training samples, got " +
                    std::to_string(n));
  }
  const double mean = sum / static_cast<double>(n);
  double ssd = 0.0;
  for (std::size_t i = 0; i < train.size(); ++i) {
    if (!train.valid[i]) continue;
    const double d = train.values_kw[i] - mean;
    ssd += d * d;
  }
  const double var = ssd / static_cast<double>(n);
  if (!(var > 0.0)) {
    throw DataError("training partition has zero variance, cannot z-score");
  }
  return NormStats{mean, std::sqrt(var)};
}

void write_series_csv(const LoadSeries& series, const std::string& path) {
  series.check_consistent();
  std::ofstream out(path);
  if (!out) throw DataError("cannot write series file: " + path);
  out << "timestamp,active_power_kw,valid\n";
  char buf[64];
  for (std::size_t i = 0; i < series.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", series.values_kw[i]);
    out << iso8601(series.timestamp_at(i)) << ',' << buf << ',' << int(series.valid[i])
        << '\n';
  }
  if (!out) throw DataError("write failed for series file: " + path);
}

LoadSeries read_series_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open series file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty series file: " + path);
  strip_cr(line);
  if (line != "timestamp,active_power_kw,valid") {
    throw DataError("unexpected series header in " + path + ": '" + line + "'");
  }

  std::vector<Timestamp> stamps;
  LoadSeries s;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) continue;
    const std::size_t c1 = line.find(',');
    const std::size_t c2 = c1 == std::string::npos ? std::string::npos : line.find(',', c1 + 1);
    if (c2 == std::string::npos) {
      throw DataError(path + ":" + std::to_string(line_no) + ": malformed series row");
    }
    stamps.push_back(parse_iso8601(line.substr(0, c1)));
    s.values_kw.push_back(std::strtod(line.c_str() + c1 + 1, nullptr));
    s.valid.push_back(line.substr(c2 + 1) == "1" ? 1 : 0);
  }
  if (stamps.empty()) throw DataError("series file has no rows: " + path);

  s.start = stamps.front();
  const std::int64_t step = stamps.size() > 1 ? stamps[1] - stamps[0] : 3600;
  if (step == 60) {
    s.resolution = Resolution::minute;
  } else if (step == 3600) {
    s.resolution = Resolution::hour;
  } else {
    throw DataError("series file grid step is " + std::to_string(step) +
                    " s, expected 60 or 3600");
  }
  for (std::size_t i = 0; i < stamps.size(); ++i) {
    if (stamps[i] != s.timestamp_at(i)) {
      throw DataError(path + ": series grid breaks at row " + std::to_string(i + 2) + " (" +
                      iso8601(stamps[i]) + ")");
    }
  }
  return s;
}

}  // namespace gridcast
