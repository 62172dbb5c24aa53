#include "blrain/gauge.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include "blrain/error.hpp"

namespace blrain {

// Civil date conversions after H. Hinnant's days_from_civil algorithms.
std::int64_t days_from_civil(int year, int month, int day) {
  const std::int64_t y = static_cast<std::int64_t>(year) - (month <= 2 ? 1 : 0);
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const auto yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * static_cast<unsigned>(month + (month > 2 ? -3 : 9)) + 2u) / 5u +
                       static_cast<unsigned>(day) - 1u;
  const unsigned doe = yoe * 365u + yoe / 4u - yoe / 100u + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

CivilDate civil_from_days(std::int64_t z) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const auto doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460u + doe / 36524u - doe / 146096u) / 365u;
  const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365u * yoe + yoe / 4u - yoe / 100u);
  const unsigned mp = (5u * doy + 2u) / 153u;
  const unsigned d = doy - (153u * mp + 2u) / 5u + 1u;
  const unsigned m = mp < 10u ? mp + 3u : mp - 9u;
  return {static_cast<int>(y + (m <= 2 ? 1 : 0)), static_cast<int>(m), static_cast<int>(d)};
}

bool is_leap_year(int year) { return (year % 4 == 0 && year % 100 != 0) || year % 400 == 0; }

int days_in_month(int year, int month) {
  static constexpr int kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  if (month == 2 && is_leap_year(year)) return 29;
  return kDays[month - 1];
}

std::int64_t month_start_minute(int year, int month) { return days_from_civil(year, month, 1) * kMinutesPerDay; }

CivilDate date_of_minute(std::int64_t minute) {
  std::int64_t days = minute / kMinutesPerDay;
  if (minute % kMinutesPerDay < 0) --days;
  return civil_from_days(days);
}

namespace {

bool parse_fixed(std::string_view s, std::size_t pos, std::size_t len, int& out) {
  if (pos + len > s.size()) return false;
  int v = 0;
  for (std::size_t i = pos; i < pos + len; ++i) {
    if (s[i] < '0' || s[i] > '9') return false;
    v = v * 10 + (s[i] - '0');
  }
  out = v;
  return true;
}

}  // namespace

bool parse_timestamp(std::string_view s, std::int64_t& minute) {
  if (!s.empty() && s.back() == 'Z') s.remove_suffix(1);
  int y, mo, d, hh, mm;
  if (s.size() != 16 && s.size() != 19) return false;
  if (!parse_fixed(s, 0, 4, y) || s[4] != '-' || !parse_fixed(s, 5, 2, mo) || s[7] != '-' ||
      !parse_fixed(s, 8, 2, d) || (s[10] != 'T' && s[10] != ' ') || !parse_fixed(s, 11, 2, hh) || s[13] != ':' ||
      !parse_fixed(s, 14, 2, mm)) {
    return false;
  }
  if (s.size() == 19) {
    int ss;
    if (s[16] != ':' || !parse_fixed(s, 17, 2, ss) || ss != 0) return false;
  }
  if (mo < 1 || mo > 12 || d < 1 || d > days_in_month(y, mo) || hh > 23 || mm > 59) return false;
  minute = days_from_civil(y, mo, d) * kMinutesPerDay + hh * 60 + mm;
  return true;
}

std::string format_timestamp(std::int64_t minute) {
  const CivilDate c = date_of_minute(minute);
  std::int64_t rem = minute % kMinutesPerDay;
  if (rem < 0) rem += kMinutesPerDay;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d", c.year, c.month, c.day, static_cast<int>(rem / 60),
                static_cast<int>(rem % 60));
  return buf;
}

std::string format_depth(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::vector<GaugeRecord> parse_series(std::istream& in, const std::string& source) {
  std::vector<GaugeRecord> out;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  auto fail = [&](ErrorCode code, const std::string& what) {
    throw Error(code, source + ":" + std::to_string(line_no), source + ":" + std::to_string(line_no) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      if (line != "timestamp,depth_mm") fail(ErrorCode::ParseError, "expected header 'timestamp,depth_mm'");
      header_seen = true;
      continue;
    }
    const auto comma = line.find(',');
    if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos) {
      fail(ErrorCode::ParseError, "expected two fields");
    }
    std::int64_t minute = 0;
    if (!parse_timestamp(std::string_view(line).substr(0, comma), minute)) {
      fail(ErrorCode::ParseError, "malformed timestamp '" + line.substr(0, comma) + "'");
    }
    if (minute % kLatticeMinutes != 0) fail(ErrorCode::ParseError, "timestamp is not on the 5-minute lattice");
    const std::string_view depth_text = std::string_view(line).substr(comma + 1);
    GaugeRecord rec{minute, 0.0, Quality::Missing};
    if (!depth_text.empty()) {
      double v = 0.0;
      auto res = std::from_chars(depth_text.data(), depth_text.data() + depth_text.size(), v);
      if (res.ec != std::errc() || res.ptr != depth_text.data() + depth_text.size() || !std::isfinite(v)) {
        fail(ErrorCode::ParseError, "malformed depth '" + std::string(depth_text) + "'");
      }
      if (v < 0.0) fail(ErrorCode::NegativeDepth, "negative depth " + std::string(depth_text));
      rec.depth_mm = v;
      rec.quality = Quality::Observed;
    }
    if (!out.empty()) {
      if (minute <= out.back().minute) fail(ErrorCode::NonMonotoneTimestamps, "timestamps must strictly increase");
      for (std::int64_t m = out.back().minute + kLatticeMinutes; m < minute; m += kLatticeMinutes) {
        out.push_back({m, 0.0, Quality::Missing});
      }
    }
    out.push_back(rec);
  }
  if (!header_seen) {
    line_no = 0;
    fail(ErrorCode::ParseError, "missing header");
  }
  return out;
}

std::vector<GaugeRecord> load_series(const std::filesystem::path& path, SeriesFormat) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, path.string(), "cannot open '" + path.string() + "'");
  return parse_series(in, path.string());
}

void write_series(std::ostream& out, std::span<const GaugeRecord> records, std::span<const std::string> comments) {
  for (const auto& c : comments) out << "# " << c << '\n';
  out << "timestamp,depth_mm\n";
  for (const auto& r : records) {
    out << format_timestamp(r.minute) << ',';
    if (r.quality == Quality::Observed) out << format_depth(r.depth_mm);
    out << '\n';
  }
}

void export_series(const std::filesystem::path& path, std::span<const GaugeRecord> records,
                   std::span<const std::string> comments) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, path.string(), "cannot write '" + path.string() + "'");
  write_series(out, records, comments);
}

std::vector<GaugeRecord> to_records(const AggregatedSeries& s) {
  if (std::abs(s.h * 12.0 - 1.0) > 1e-12) {
    throw Error(ErrorCode::InvalidArgument, "h", "gauge records are 5-minute depths");
  }
  std::vector<GaugeRecord> out;
  out.reserve(s.depths.size());
  for (std::size_t i = 0; i < s.depths.size(); ++i) {
    out.push_back({s.start_minute + static_cast<std::int64_t>(i) * kLatticeMinutes, s.depths[i], Quality::Observed});
  }
  return out;
}

}  // namespace blrain
