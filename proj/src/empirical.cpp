#include "blrain/empirical.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "blrain/error.hpp"

namespace blrain {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::size_t bin_factor(double h) {
  const double f = h * 12.0;
  const double r = std::round(f);
  if (r < 1.0 || std::abs(f - r) > 1e-9 || static_cast<std::int64_t>(r) > kBinsPerDay ||
      kBinsPerDay % static_cast<std::int64_t>(r) != 0) {
    throw Error(ErrorCode::NonDividingBin, "h", "timescale must be a multiple of 5 minutes dividing one day");
  }
  return static_cast<std::size_t>(r);
}

std::array<std::size_t, kTimescales.size()> scale_factors() {
  std::array<std::size_t, kTimescales.size()> f{};
  for (std::size_t i = 0; i < kTimescales.size(); ++i) f[i] = bin_factor(kTimescales[i]);
  return f;
}

constexpr std::size_t kHourIndex = 1;  // position of h = 1 in kTimescales

}  // namespace

std::vector<MonthBlock> month_blocks(std::span<const GaugeRecord> rec, int month) {
  std::vector<MonthBlock> out;
  if (rec.empty()) return out;
  const std::int64_t first = rec.front().minute;
  const int y0 = date_of_minute(first).year;
  const int y1 = date_of_minute(rec.back().minute).year;
  for (int y = y0; y <= y1; ++y) {
    for (int m = 1; m <= 12; ++m) {
      if (month != 0 && m != month) continue;
      const std::int64_t start = month_start_minute(y, m);
      const auto len = static_cast<std::size_t>(days_in_month(y, m) * kBinsPerDay);
      const std::int64_t end = start + static_cast<std::int64_t>(len) * kLatticeMinutes;
      if (end <= first || start > rec.back().minute) continue;
      MonthBlock b{y, m, std::vector<double>(len, kNaN), 0.0};
      // records need not be contiguous; place each one by its minute
      auto it = std::lower_bound(rec.begin(), rec.end(), start,
                                 [](const GaugeRecord& r, std::int64_t t) { return r.minute < t; });
      std::size_t missing = len;
      for (; it != rec.end() && it->minute < end; ++it) {
        if (it->quality != Quality::Observed) continue;
        b.depths[static_cast<std::size_t>((it->minute - start) / kLatticeMinutes)] = it->depth_mm;
        --missing;
      }
      b.missing_fraction = static_cast<double>(missing) / static_cast<double>(len);
      out.push_back(std::move(b));
    }
  }
  return out;
}

std::vector<double> aggregate_bins(std::span<const double> fine, std::size_t factor) {
  if (factor == 0 || fine.size() % factor != 0) {
    throw Error(ErrorCode::NonDividingBin, "factor", "aggregation factor must divide the block length");
  }
  std::vector<double> out(fine.size() / factor, 0.0);
  for (std::size_t i = 0; i < fine.size(); ++i) out[i / factor] += fine[i];  // NaN propagates
  return out;
}

SampleMoments sample_moments(std::span<const double> bins) {
  SampleMoments m;
  double sum = 0.0;
  for (double x : bins) {
    if (std::isnan(x)) continue;
    sum += x;
    ++m.n;
  }
  if (m.n == 0) return m;
  m.mean = sum / static_cast<double>(m.n);
  double s2 = 0.0, s3 = 0.0, sc = 0.0;
  for (std::size_t i = 0; i < bins.size(); ++i) {
    if (std::isnan(bins[i])) continue;
    const double d = bins[i] - m.mean;
    s2 += d * d;
    s3 += d * d * d;
    if (i + 1 < bins.size() && !std::isnan(bins[i + 1])) {
      sc += d * (bins[i + 1] - m.mean);
      ++m.pairs;
    }
  }
  m.variance = s2 / static_cast<double>(m.n);
  m.third_central = s3 / static_cast<double>(m.n);
  m.lag1_autocov = m.pairs ? sc / static_cast<double>(m.pairs) : 0.0;
  return m;
}

namespace {

using PropertyArray = std::array<double, kPropertyCount>;

// Fills the property vector from per-scale moments; false when a scale has
// no variance or no rain.
bool properties_from_moments(std::span<const SampleMoments, kTimescales.size()> m, PropertyArray& out) {
  out[0] = m[kHourIndex].mean;
  for (std::size_t s = 0; s < kTimescales.size(); ++s) {
    // a variance at rounding level relative to the mean counts as zero
    if (!(m[s].mean > 0.0) || !(m[s].variance > 1e-20 * m[s].mean * m[s].mean) || m[s].pairs == 0) return false;
    out[1 + 3 * s] = std::sqrt(m[s].variance) / m[s].mean;
    out[2 + 3 * s] = m[s].lag1_autocov / m[s].variance;
    out[3 + 3 * s] = m[s].third_central / std::pow(m[s].variance, 1.5);
  }
  return true;
}

// Moments over several blocks around their pooled mean.
SampleMoments pooled_moments(const std::vector<std::vector<double>>& blocks) {
  SampleMoments m;
  double sum = 0.0;
  for (const auto& b : blocks) {
    for (double x : b) {
      if (!std::isnan(x)) {
        sum += x;
        ++m.n;
      }
    }
  }
  if (m.n == 0) return m;
  m.mean = sum / static_cast<double>(m.n);
  double s2 = 0.0, s3 = 0.0, sc = 0.0;
  for (const auto& b : blocks) {
    for (std::size_t i = 0; i < b.size(); ++i) {
      if (std::isnan(b[i])) continue;
      const double d = b[i] - m.mean;
      s2 += d * d;
      s3 += d * d * d;
      if (i + 1 < b.size() && !std::isnan(b[i + 1])) {
        sc += d * (b[i + 1] - m.mean);
        ++m.pairs;
      }
    }
  }
  m.variance = s2 / static_cast<double>(m.n);
  m.third_central = s3 / static_cast<double>(m.n);
  m.lag1_autocov = m.pairs ? sc / static_cast<double>(m.pairs) : 0.0;
  return m;
}

// Raw power sums of one block at one scale; pooled moments of any subset of
// blocks follow by addition.
struct RawSums {
  double n = 0, s1 = 0, s2 = 0, s3 = 0;
  double pairs = 0, lead = 0, lag = 0, cross = 0;

  RawSums& operator+=(const RawSums& o) {
    n += o.n, s1 += o.s1, s2 += o.s2, s3 += o.s3;
    pairs += o.pairs, lead += o.lead, lag += o.lag, cross += o.cross;
    return *this;
  }
  RawSums& operator-=(const RawSums& o) {
    n -= o.n, s1 -= o.s1, s2 -= o.s2, s3 -= o.s3;
    pairs -= o.pairs, lead -= o.lead, lag -= o.lag, cross -= o.cross;
    return *this;
  }
};

RawSums raw_sums(std::span<const double> b) {
  RawSums r;
  for (std::size_t i = 0; i < b.size(); ++i) {
    const double x = b[i];
    if (std::isnan(x)) continue;
    r.n += 1.0;
    r.s1 += x;
    r.s2 += x * x;
    r.s3 += x * x * x;
    if (i + 1 < b.size() && !std::isnan(b[i + 1])) {
      r.pairs += 1.0;
      r.lead += x;
      r.lag += b[i + 1];
      r.cross += x * b[i + 1];
    }
  }
  return r;
}

SampleMoments moments_from_sums(const RawSums& r) {
  SampleMoments m;
  m.n = static_cast<std::size_t>(r.n);
  m.pairs = static_cast<std::size_t>(r.pairs);
  if (r.n <= 0) return m;
  const double mu = r.s1 / r.n;
  m.mean = mu;
  m.variance = (r.s2 - 2.0 * mu * r.s1 + r.n * mu * mu) / r.n;
  m.third_central = (r.s3 - 3.0 * mu * r.s2 + 3.0 * mu * mu * r.s1 - r.n * mu * mu * mu) / r.n;
  m.lag1_autocov = r.pairs > 0 ? (r.cross - mu * (r.lead + r.lag) + r.pairs * mu * mu) / r.pairs : 0.0;
  return m;
}

// Delete-one-year jackknife covariance of the pooled statistics, row-major.
std::vector<double> jackknife_covariance(const std::array<std::vector<RawSums>, kTimescales.size()>& sums) {
  const std::size_t n = sums[0].size();
  const std::size_t k = kPropertyCount;
  std::array<RawSums, kTimescales.size()> total{};
  for (std::size_t s = 0; s < kTimescales.size(); ++s) {
    for (const auto& r : sums[s]) total[s] += r;
  }
  std::vector<PropertyArray> loo;
  for (std::size_t y = 0; y < n; ++y) {
    std::array<SampleMoments, kTimescales.size()> m;
    for (std::size_t s = 0; s < kTimescales.size(); ++s) {
      RawSums r = total[s];
      r -= sums[s][y];
      m[s] = moments_from_sums(r);
    }
    PropertyArray p{};
    if (properties_from_moments(m, p)) loo.push_back(p);
  }
  std::vector<double> cov(k * k, 0.0);
  const double m = static_cast<double>(loo.size());
  if (loo.size() < 2) return cov;
  PropertyArray avg{};
  for (const auto& p : loo) {
    for (std::size_t i = 0; i < k; ++i) avg[i] += p[i] / m;
  }
  for (const auto& p : loo) {
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = 0; j < k; ++j) cov[i * k + j] += (p[i] - avg[i]) * (p[j] - avg[j]);
    }
  }
  for (double& c : cov) c *= (m - 1.0) / m;
  return cov;
}

}  // namespace

StatisticVector monthly_statistics(std::span<const MonthBlock> blocks, int month, const StatsOptions& opts) {
  const auto factors = scale_factors();
  std::vector<PropertyArray> per_year;
  std::array<std::vector<std::vector<double>>, kTimescales.size()> pooled;
  int excluded_missing = 0, degenerate = 0;

  for (const auto& b : blocks) {
    if (month != 0 && b.month != month) continue;
    if (b.missing_fraction > opts.max_missing_fraction) {
      ++excluded_missing;
      continue;
    }
    std::array<SampleMoments, kTimescales.size()> m;
    std::array<std::vector<double>, kTimescales.size()> bins;
    for (std::size_t s = 0; s < kTimescales.size(); ++s) {
      bins[s] = aggregate_bins(b.depths, factors[s]);
      m[s] = sample_moments(bins[s]);
    }
    PropertyArray props{};
    if (!properties_from_moments(m, props)) {
      ++degenerate;
      continue;
    }
    per_year.push_back(props);
    for (std::size_t s = 0; s < kTimescales.size(); ++s) pooled[s].push_back(std::move(bins[s]));
  }

  const auto n = per_year.size();
  if (n < 2) {
    if (degenerate > 0) {
      throw Error(ErrorCode::AllDryMonth, "month " + std::to_string(month),
                  "month " + std::to_string(month) + " has fewer than two years with rain variability");
    }
    throw Error(ErrorCode::InsufficientYears, "month " + std::to_string(month),
                "month " + std::to_string(month) + " has " + std::to_string(n) + " usable observation years (need 2)");
  }

  StatisticVector sv;
  sv.month = month;
  sv.years_used = static_cast<int>(n);
  sv.years_excluded = excluded_missing + degenerate;

  const std::size_t k = kPropertyCount;
  std::vector<double> avg(k, 0.0);
  for (const auto& y : per_year) {
    for (std::size_t i = 0; i < k; ++i) avg[i] += y[i] / static_cast<double>(n);
  }
  sv.covariance.assign(k * k, 0.0);
  for (const auto& y : per_year) {
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = 0; j < k; ++j) sv.covariance[i * k + j] += (y[i] - avg[i]) * (y[j] - avg[j]);
    }
  }
  // sample covariance of the per-year statistics, divided by the year count;
  // the pooled mode replaces it by a delete-one-year jackknife below
  for (double& c : sv.covariance) c /= static_cast<double>(n - 1) * static_cast<double>(n);

  if (opts.mode == AveragingMode::PerYear) {
    sv.values = avg;
  } else {
    std::array<SampleMoments, kTimescales.size()> m;
    for (std::size_t s = 0; s < kTimescales.size(); ++s) m[s] = pooled_moments(pooled[s]);
    PropertyArray props{};
    if (!properties_from_moments(m, props)) {
      throw Error(ErrorCode::AllDryMonth, "month " + std::to_string(month), "pooled record has no rain variability");
    }
    sv.values.assign(props.begin(), props.end());
    std::array<std::vector<RawSums>, kTimescales.size()> sums;
    for (std::size_t s = 0; s < kTimescales.size(); ++s) {
      for (const auto& b : pooled[s]) sums[s].push_back(raw_sums(b));
    }
    sv.covariance = jackknife_covariance(sums);
  }

  const auto names = property_names();
  for (std::size_t i = 0; i < k; ++i) {
    const double v = sv.covariance[i * k + i];
    if (!(v > 0.0)) {
      throw Error(ErrorCode::ZeroVariance, std::string(names[i]),
                  "across-year variance of " + std::string(names[i]) + " is zero");
    }
    sv.variances.push_back(v);
    sv.weights.push_back(1.0 / v);
  }
  return sv;
}

StatisticVector monthly_statistics(std::span<const GaugeRecord> rec, int month, const StatsOptions& opts) {
  if (month < 1 || month > 12) throw Error(ErrorCode::InvalidArgument, "month", "month must be 1..12");
  return monthly_statistics(month_blocks(rec, month), month, opts);
}

nlohmann::json to_json(const StatisticVector& s) {
  nlohmann::json names = nlohmann::json::array();
  for (std::size_t i = 0; i < s.values.size(); ++i) names.push_back(std::string(property_names()[i]));
  nlohmann::json cov = nlohmann::json::array();
  const std::size_t k = s.values.size();
  if (s.covariance.size() == k * k) {
    for (std::size_t i = 0; i < k; ++i) {
      cov.push_back(std::vector<double>(s.covariance.begin() + static_cast<std::ptrdiff_t>(i * k),
                                        s.covariance.begin() + static_cast<std::ptrdiff_t>((i + 1) * k)));
    }
  }
  return {{"month", s.month},           {"properties", names},  {"values", s.values},
          {"variances", s.variances},   {"weights", s.weights}, {"covariance", cov},
          {"years_used", s.years_used}, {"years_excluded", s.years_excluded}};
}

StatisticVector statistic_vector_from_json(const nlohmann::json& j) {
  try {
    StatisticVector s;
    s.month = j.at("month").get<int>();
    s.values = j.at("values").get<std::vector<double>>();
    s.variances = j.at("variances").get<std::vector<double>>();
    s.weights = j.at("weights").get<std::vector<double>>();
    for (const auto& row : j.value("covariance", nlohmann::json::array())) {
      for (double x : row.get<std::vector<double>>()) s.covariance.push_back(x);
    }
    s.years_used = j.value("years_used", 0);
    s.years_excluded = j.value("years_excluded", 0);
    if (s.values.size() != s.weights.size() || s.values.size() != s.variances.size()) {
      throw Error(ErrorCode::ParseError, "statistics", "values, variances and weights differ in length");
    }
    for (double w : s.weights) {
      if (!(w > 0.0)) throw Error(ErrorCode::ParseError, "weights", "weights must be positive");
    }
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, "statistics", std::string("malformed statistics document: ") + e.what());
  }
}

// ---------------------------------------------------------------------------

double WetDryStats::ww() const {
  if (!p_ww) throw Error(ErrorCode::NoWetIntervals, "p_ww", "no wet interval is followed by an observed interval");
  return *p_ww;
}

void WetDryAccumulator::add_block(std::span<const double> bins) {
  for (std::size_t i = 0; i < bins.size(); ++i) {
    if (std::isnan(bins[i])) continue;
    const bool wet = bins[i] > threshold_;
    ++bins_;
    if (!wet) ++dry_;
    if (i + 1 < bins.size() && !std::isnan(bins[i + 1])) {
      const bool next_wet = bins[i + 1] > threshold_;
      if (wet) {
        ++from_wet_;
        if (next_wet) ++wet_wet_;
      } else {
        ++from_dry_;
        if (!next_wet) ++dry_dry_;
      }
    }
  }
}

WetDryStats WetDryAccumulator::result() const {
  WetDryStats s;
  s.bins = bins_;
  s.p_dry = bins_ ? static_cast<double>(dry_) / static_cast<double>(bins_) : 0.0;
  if (from_wet_) s.p_ww = static_cast<double>(wet_wet_) / static_cast<double>(from_wet_);
  if (from_dry_) s.p_dd = static_cast<double>(dry_dry_) / static_cast<double>(from_dry_);
  s.wet_transitions = from_wet_;
  s.dry_transitions = from_dry_;
  return s;
}

WetDryStats wet_dry_from_bins(std::span<const double> bins, double threshold) {
  WetDryAccumulator acc(threshold);
  acc.add_block(bins);
  return acc.result();
}

WetDryStats wet_dry_stats(std::span<const GaugeRecord> rec, int month, double h, double threshold,
                          double max_missing_fraction) {
  const std::size_t factor = bin_factor(h);
  WetDryAccumulator acc(threshold);
  for (const auto& b : month_blocks(rec, month)) {
    if (b.missing_fraction > max_missing_fraction) continue;
    acc.add_block(aggregate_bins(b.depths, factor));
  }
  return acc.result();
}

// ---------------------------------------------------------------------------

double block_maximum(std::span<const double> fine, std::size_t factor) {
  double best = -std::numeric_limits<double>::infinity();
  for (double x : aggregate_bins(fine, factor)) {
    if (!std::isnan(x)) best = std::max(best, x);
  }
  return best;
}

AnnualMaxima annual_maxima(std::span<const GaugeRecord> rec, double h, int month, double max_missing_fraction) {
  const std::size_t factor = bin_factor(h);
  struct YearAcc {
    int blocks = 0;
    double missing = 0.0;  // minutes-weighted missing count
    double total = 0.0;
    double max = -std::numeric_limits<double>::infinity();
  };
  std::map<int, YearAcc> years;
  for (const auto& b : month_blocks(rec, month)) {
    auto& acc = years[b.year];
    ++acc.blocks;
    const auto len = static_cast<double>(b.depths.size());
    acc.missing += b.missing_fraction * len;
    acc.total += len;
    acc.max = std::max(acc.max, block_maximum(b.depths, factor));
  }
  AnnualMaxima out;
  const int needed = month == 0 ? 12 : 1;
  for (const auto& [year, acc] : years) {
    if (acc.blocks < needed || acc.missing > max_missing_fraction * acc.total || !std::isfinite(acc.max)) continue;
    out.years.push_back(year);
    out.maxima.push_back(acc.max);
  }
  if (out.years.empty()) throw Error(ErrorCode::NoCompleteYears, "record", "no complete year in the record");
  return out;
}

double reduced_variate(double return_period) { return -std::log(-std::log(1.0 - 1.0 / return_period)); }

double gringorten_probability(std::size_t rank, std::size_t n) {
  return (static_cast<double>(rank) - 0.44) / (static_cast<double>(n) + 0.12);
}

std::vector<GumbelPoint> gumbel_plot(std::span<const double> maxima) {
  std::vector<double> sorted(maxima.begin(), maxima.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<GumbelPoint> out;
  const std::size_t n = sorted.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double p = gringorten_probability(i + 1, n);
    const double r = 1.0 / (1.0 - p);
    out.push_back({i + 1, sorted[i], p, r, reduced_variate(r)});
  }
  return out;
}

}  // namespace blrain
