#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "blrain/empirical.hpp"
#include "blrain/error.hpp"
#include "blrain/gauge.hpp"
#include "blrain/moments.hpp"
#include "blrain/reference_sets.hpp"
#include "blrain/synthetic.hpp"
#include "doctest.h"

using namespace blrain;

namespace {

const IntensityLaw kExp = IntensityLaw::exponential(1.0);
constexpr auto kCommon = PulseDepthDependence::Common;

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::InvalidArgument;
}

// January of one year: sparse random rain rescaled to a given hourly mean.
MonthBlock january(int year, double hourly_mean, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution wet(0.08);
  std::exponential_distribution<double> depth(2.0);
  std::vector<double> d(31 * 288, 0.0);
  double total = 0.0;
  for (auto& x : d) {
    if (wet(rng)) x = depth(rng);
    total += x;
  }
  for (auto& x : d) x *= hourly_mean * 744.0 / total;
  return {year, 1, std::move(d), 0.0};
}

std::vector<GaugeRecord> records_for(int first_year, int years, const ModelParams& p, std::uint64_t seed) {
  SeasonalParams sp;
  for (auto& s : sp) s = validate_params(p);
  return simulate_record(sp, kExp, kCommon, first_year, years, seed);
}

}  // namespace

TEST_CASE("two-year hand example") {
  const std::vector<MonthBlock> blocks{january(2001, 1.0, 1), january(2002, 3.0, 2)};
  const auto sv = monthly_statistics(std::span<const MonthBlock>(blocks), 1);
  REQUIRE(sv.size() == kPropertyCount);
  CHECK(sv.years_used == 2);
  CHECK(sv.values[0] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(sv.variances[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(sv.weights[0] == doctest::Approx(1.0).epsilon(1e-12));
  for (double w : sv.weights) CHECK(w > 0.0);
}

TEST_CASE("per-year averaging matches a direct computation") {
  const std::vector<MonthBlock> blocks{january(2001, 0.5, 11), january(2002, 0.8, 12), january(2003, 0.2, 13)};
  const auto sv = monthly_statistics(std::span<const MonthBlock>(blocks), 1);
  // independent per-year cv at 1 h
  std::vector<double> cv;
  for (const auto& b : blocks) {
    std::vector<double> hourly(744, 0.0);
    for (std::size_t i = 0; i < b.depths.size(); ++i) hourly[i / 12] += b.depths[i];
    double mean = 0, ss = 0;
    for (double x : hourly) mean += x / 744.0;
    for (double x : hourly) ss += (x - mean) * (x - mean) / 744.0;
    cv.push_back(std::sqrt(ss) / mean);
  }
  const double avg = (cv[0] + cv[1] + cv[2]) / 3.0;
  double var = 0;
  for (double c : cv) var += (c - avg) * (c - avg) / 2.0;
  CHECK(sv.values[4] == doctest::Approx(avg).epsilon(1e-10));
  CHECK(sv.variances[4] == doctest::Approx(var / 3.0).epsilon(1e-9));
}

TEST_CASE("degenerate months") {
  std::vector<MonthBlock> constant{{2001, 1, std::vector<double>(31 * 288, 0.1), 0.0},
                                   {2002, 1, std::vector<double>(31 * 288, 0.1), 0.0}};
  CHECK(code_of([&] { monthly_statistics(std::span<const MonthBlock>(constant), 1); }) == ErrorCode::AllDryMonth);
  std::vector<MonthBlock> dry{{2001, 1, std::vector<double>(31 * 288, 0.0), 0.0},
                              {2002, 1, std::vector<double>(31 * 288, 0.0), 0.0}};
  CHECK(code_of([&] { monthly_statistics(std::span<const MonthBlock>(dry), 1); }) == ErrorCode::AllDryMonth);
  std::vector<MonthBlock> single{january(2001, 1.0, 3)};
  CHECK(code_of([&] { monthly_statistics(std::span<const MonthBlock>(single), 1); }) ==
        ErrorCode::InsufficientYears);
}

TEST_CASE("missing-data exclusion") {
  auto a = january(2001, 1.0, 21), b = january(2002, 2.0, 22), c = january(2003, 1.5, 23);
  // 6% of 2003 missing: the year is dropped
  for (std::size_t i = 0; i < c.depths.size() * 6 / 100; ++i) c.depths[i] = std::nan("");
  c.missing_fraction = 0.06;
  const std::vector<MonthBlock> with{a, b, c}, without{a, b};
  const auto s1 = monthly_statistics(std::span<const MonthBlock>(with), 1);
  const auto s2 = monthly_statistics(std::span<const MonthBlock>(without), 1);
  CHECK(s1.years_used == 2);
  CHECK(s1.years_excluded == 1);
  CHECK(s1.values == s2.values);

  // through the record path
  std::vector<GaugeRecord> rec;
  for (const auto& blk : {a, b, c}) {
    const auto start = month_start_minute(blk.year, 1);
    for (std::size_t i = 0; i < blk.depths.size(); ++i) {
      const bool miss = std::isnan(blk.depths[i]);
      rec.push_back({start + 5 * static_cast<std::int64_t>(i), miss ? 0.0 : blk.depths[i],
                     miss ? Quality::Missing : Quality::Observed});
    }
  }
  const auto s3 = monthly_statistics(rec, 1);
  CHECK(s3.years_used == 2);
  for (std::size_t i = 0; i < kPropertyCount; ++i) CHECK(s3.values[i] == doctest::Approx(s2.values[i]).epsilon(1e-12));
}

TEST_CASE("wet/dry hand counts") {
  const std::vector<double> a{1, 0, 0, 1};
  CHECK(wet_dry_from_bins(a).p_dry == 0.5);
  const std::vector<double> b{1, 1, 0, 0};
  const auto w = wet_dry_from_bins(b);
  REQUIRE(w.p_ww);
  REQUIRE(w.p_dd);
  CHECK(*w.p_ww == 0.5);
  CHECK(*w.p_dd == 1.0);
  CHECK(w.wet_transitions == 2);
  CHECK(w.dry_transitions == 1);
  const std::vector<double> dry(10, 0.0);
  const auto d = wet_dry_from_bins(dry);
  CHECK(d.p_dry == 1.0);
  CHECK(!d.p_ww);
  CHECK(code_of([&] { d.ww(); }) == ErrorCode::NoWetIntervals);
  // threshold
  const std::vector<double> t{0.05, 0.3, 0.1, 0.0};
  CHECK(wet_dry_from_bins(t, 0.1).p_dry == 0.75);
}

TEST_CASE("transitions stay within a month") {
  std::vector<GaugeRecord> rec;
  const auto jan = month_start_minute(2001, 1), feb = month_start_minute(2001, 2);
  for (std::int64_t m = jan; m < feb + 28 * 1440; m += 5) rec.push_back({m, 0.0, Quality::Observed});
  const auto last_jan = static_cast<std::size_t>((feb - jan) / 5 - 1);
  rec[last_jan].depth_mm = 1.0;      // last January bin wet
  rec[last_jan + 1].depth_mm = 1.0;  // first February bin wet
  const auto j = wet_dry_stats(rec, 1, 1.0 / 12.0);
  CHECK(!j.p_ww);  // the only wet January bin has no January successor
  const auto f = wet_dry_stats(rec, 2, 1.0 / 12.0);
  REQUIRE(f.p_ww);
  CHECK(*f.p_ww == 0.0);
}

TEST_CASE("wet/dry invariants on a simulated record") {
  const auto rec = records_for(2001, 5, reference::row_params(reference::blrprx_table(), 7), 17);
  for (int month : {1, 7}) {
    double prev = 2.0;
    for (double h : kTimescales) {
      const auto s = wet_dry_stats(rec, month, h);
      CHECK(s.p_dry <= prev);
      prev = s.p_dry;
      REQUIRE(s.p_ww);
      // P(dry | wet) counted independently
      std::size_t from_wet = 0, wet_dry = 0;
      for (const auto& b : month_blocks(rec, month)) {
        const auto bins = aggregate_bins(b.depths, static_cast<std::size_t>(std::llround(h * 12)));
        for (std::size_t i = 0; i + 1 < bins.size(); ++i) {
          if (bins[i] > 0.0) {
            ++from_wet;
            if (bins[i + 1] <= 0.0) ++wet_dry;
          }
        }
      }
      CHECK(*s.p_ww + static_cast<double>(wet_dry) / static_cast<double>(from_wet) == doctest::Approx(1.0).epsilon(1e-15));
    }
  }
}

// Pooled statistics of a long simulation against the analytic values.
TEST_CASE("500-year statistics agree with the analytic properties") {
  const auto p = reference::row_params(reference::blrprx_table(), 1);
  const auto blocks = simulate_month_blocks(validate_params(p), kExp, kCommon, 1, 500, 2024);
  const auto sv = monthly_statistics(std::span<const MonthBlock>(blocks), 1, {AveragingMode::Pooled});
  const auto tau = model_fitting_properties(p, kExp, kCommon).to_array();
  for (std::size_t i = 0; i < kPropertyCount; ++i) {
    CAPTURE(property_names()[i]);
    CHECK(std::abs(sv.values[i] - tau[i]) < 3.0 * std::sqrt(sv.variances[i]));
  }
}

TEST_CASE("statistic vector JSON") {
  const std::vector<MonthBlock> blocks{january(2001, 1.0, 1), january(2002, 3.0, 2), january(2003, 0.1, 3)};
  const auto sv = monthly_statistics(std::span<const MonthBlock>(blocks), 1);
  const auto back = statistic_vector_from_json(nlohmann::json::parse(to_json(sv).dump()));
  CHECK(back.month == sv.month);
  CHECK(back.values == sv.values);
  CHECK(back.variances == sv.variances);
  CHECK(back.weights == sv.weights);
  CHECK(back.covariance == sv.covariance);
  CHECK(back.years_used == sv.years_used);
}

TEST_CASE("annual maxima and Gumbel coordinates") {
  CHECK(reduced_variate(2.0) == doctest::Approx(-std::log(-std::log(0.5))).epsilon(1e-15));
  CHECK(reduced_variate(2.0) == doctest::Approx(0.3665).epsilon(1e-4 / 0.3665));
  CHECK(gringorten_probability(1, 69) == doctest::Approx(0.56 / 69.12));

  std::mt19937_64 rng(1);
  std::gamma_distribution<double> g(2.0, 5.0);
  std::vector<double> maxima(69);
  for (auto& m : maxima) m = g(rng);
  maxima[10] = maxima[20];  // ties still get distinct plotting positions
  const auto plot = gumbel_plot(maxima);
  REQUIRE(plot.size() == 69);
  for (std::size_t i = 1; i < plot.size(); ++i) {
    CHECK(plot[i].reduced_variate > plot[i - 1].reduced_variate);
    CHECK(plot[i].value >= plot[i - 1].value);
  }
  CHECK(plot[0].rank == 1);

  // record maxima against a direct scan of hourly totals per year
  const auto rec = records_for(2001, 3, reference::row_params(reference::blrprx_table(), 7), 5);
  const auto am = annual_maxima(rec, 1.0);
  REQUIRE(am.years == std::vector<int>{2001, 2002, 2003});
  std::map<int, std::map<std::int64_t, double>> hourly;
  for (const auto& r : rec) hourly[date_of_minute(r.minute).year][r.minute / 60] += r.depth_mm;
  for (std::size_t i = 0; i < am.years.size(); ++i) {
    double mx = 0.0;
    for (const auto& [hour, d] : hourly[am.years[i]]) mx = std::max(mx, d);
    CHECK(am.maxima[i] == doctest::Approx(mx).epsilon(1e-12));
  }
  const auto july = annual_maxima(rec, 1.0, 7);
  for (std::size_t i = 0; i < 3; ++i) CHECK(july.maxima[i] <= am.maxima[i]);

  const auto one = records_for(2001, 1, reference::row_params(reference::blrprx_table(), 7), 6);
  CHECK(annual_maxima(one, 6.0).maxima.size() == 1);

  std::vector<GaugeRecord> partial(rec.begin(), rec.begin() + 1000);
  CHECK(code_of([&] { annual_maxima(partial, 1.0); }) == ErrorCode::NoCompleteYears);
}
