#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gridcast/time.hpp"

namespace gridcast {

enum class Resolution { minute, hour };

std::string to_string(Resolution r);
Resolution resolution_from_string(const std::string& name);
inline std::int64_t step_seconds(Resolution r) { return r == Resolution::minute ? 60 : 3600; }

// One line of the benchmark file. Only the aggregate active power is kept;
// the remaining columns are validated during parsing and dropped.
struct RawRecord {
  Timestamp ts;
  std::optional<double> active_power_kw;
};

struct ParseReport {
  std::size_t data_rows = 0;       // lines after the header, well-formed or not
  std::size_t records = 0;         // well-formed rows, with or without power
  std::size_t missing_power = 0;   // rows whose power field is '?'
  std::size_t malformed_rows = 0;  // skipped rows
  std::vector<std::string> sample_errors;  // first few malformed-line messages
};

struct ParsedDataset {
  std::vector<RawRecord> records;
  ParseReport report;
};

// Parses the published benchmark format: one header line, ';'-separated
// fields Date;Time;Global_active_power;...;Sub_metering_3, Date d/m/yyyy,
// Time hh:mm:ss, missing values written as '?'. Malformed lines are counted
// and skipped; a malformed header throws.
ParsedDataset parse_dataset(const std::string& path);

// Regularly gridded load series. Index i sits at start + i * resolution;
// gaps are represented by valid = 0 slots, never omitted.
struct LoadSeries {
  Resolution resolution = Resolution::minute;
  Timestamp start;
  std::vector<double> values_kw;
  std::vector<std::uint8_t> valid;

  std::size_t size() const { return values_kw.size(); }
  Timestamp timestamp_at(std::size_t i) const {
    return start + static_cast<std::int64_t>(i) * step_seconds(resolution);
  }
  std::size_t valid_count() const;
  // Index of the slot holding `ts`; throws when off the grid or out of range.
  std::size_t index_of(Timestamp ts) const;
  void check_consistent() const;
};

// Lays the records onto a full minute grid spanning [first, last] timestamp.
// Records are sorted if needed; duplicate timestamps with conflicting power
// values are an error.
LoadSeries to_minute_series(std::vector<RawRecord> records);

// Hourly means of valid minutes. An hour is invalid when it has fewer than
// `min_valid_minutes` valid samples.
LoadSeries resample_hourly(const LoadSeries& minutes, std::size_t min_valid_minutes = 1);

// Optional experiment mode: copies the last valid value into invalid slots.
// Leading invalid slots stay invalid. Off by default everywhere.
LoadSeries forward_fill(LoadSeries series);

// Train/test boundary. The default follows the benchmark protocol: the
// boundary sits exactly three calendar years after the series start, so the
// first three years train and the final year tests.
struct SplitSpec {
  Timestamp boundary;

  static SplitSpec first_three_years(const LoadSeries& series) {
    return SplitSpec{add_years(series.start, 3)};
  }
};

// Splits into [start, boundary) and [boundary, end]; both must be non-empty.
std::pair<LoadSeries, LoadSeries> split(const LoadSeries& series, const SplitSpec& spec);

// z-score statistics, fitted on valid training samples only.
struct NormStats {
  double mean_kw = 0.0;
  double std_kw = 1.0;

  friend bool operator==(const NormStats&, const NormStats&) = default;
};

// Population mean/std over the valid samples of the training partition.
// Requires at least two valid samples and nonzero variance.
NormStats fit_norm(const LoadSeries& train);

inline double normalize(double kw, const NormStats& s) { return (kw - s.mean_kw) / s.std_kw; }
inline double denormalize(double z, const NormStats& s) { return z * s.std_kw + s.mean_kw; }

// Canonical series file: CSV with header "timestamp,active_power_kw,valid",
// ISO-8601 timestamps, one row per grid slot.
void write_series_csv(const LoadSeries& series, const std::string& path);
LoadSeries read_series_csv(const std::string& path);

}  // namespace gridcast
