#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "blrain/simulator.hpp"

namespace blrain {

// ---------------------------------------------------------------------------
// Calendar on a minute clock (minutes since 1970-01-01T00:00, proleptic
// Gregorian, no time zones).

inline constexpr std::int64_t kLatticeMinutes = 5;
inline constexpr std::int64_t kMinutesPerDay = 24 * 60;
inline constexpr std::int64_t kBinsPerDay = kMinutesPerDay / kLatticeMinutes;

struct CivilDate {
  int year;
  int month;  // 1..12
  int day;    // 1..31
};

std::int64_t days_from_civil(int year, int month, int day);
CivilDate civil_from_days(std::int64_t days);
int days_in_month(int year, int month);
bool is_leap_year(int year);

std::int64_t month_start_minute(int year, int month);
CivilDate date_of_minute(std::int64_t minute);

/// Accepts YYYY-MM-DDTHH:MM with optional ":00" seconds, a space in place of
/// 'T' and a trailing 'Z'. Returns false on anything else.
bool parse_timestamp(std::string_view text, std::int64_t& minute);
std::string format_timestamp(std::int64_t minute);

// ---------------------------------------------------------------------------

enum class Quality { Observed, Missing };

struct GaugeRecord {
  std::int64_t minute;  // start of the 5-minute interval
  double depth_mm;      // 0 when missing
  Quality quality;
};

enum class SeriesFormat { Csv };

/// Reads `timestamp,depth_mm` CSV. Lines starting with '#' are comments; an
/// empty depth field marks the interval missing, and lattice points absent
/// from the file are inserted as missing. Throws ParseError (with line
/// number), NonMonotoneTimestamps or NegativeDepth.
std::vector<GaugeRecord> load_series(const std::filesystem::path& path, SeriesFormat format = SeriesFormat::Csv);
std::vector<GaugeRecord> parse_series(std::istream& in, const std::string& source = "<stream>");

/// Writes records in the format load_series reads; `comments` are emitted as
/// leading '#' lines.
void write_series(std::ostream& out, std::span<const GaugeRecord> records,
                  std::span<const std::string> comments = {});
void export_series(const std::filesystem::path& path, std::span<const GaugeRecord> records,
                   std::span<const std::string> comments = {});

/// Converts a 5-minute aggregated series into gauge records starting at its
/// start_minute.
std::vector<GaugeRecord> to_records(const AggregatedSeries& s);

/// Shortest decimal text that parses back to the same double.
std::string format_depth(double x);

}  // namespace blrain
