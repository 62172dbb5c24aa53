#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "blrain/gauge.hpp"
#include "blrain/moments.hpp"
#include "json.hpp"

namespace blrain {

/// Observed (or model) values of the fitting properties for one calendar
/// month, in property_names() order, with GMM weights w_i = 1 / Var(T_i).
struct StatisticVector {
  int month = 0;
  std::vector<double> values;
  std::vector<double> variances;
  std::vector<double> weights;
  /// Across-year covariance of the per-year statistics divided by the year
  /// count, row-major; empty when unknown.
  std::vector<double> covariance;
  int years_used = 0;
  int years_excluded = 0;

  std::size_t size() const { return values.size(); }
};

nlohmann::json to_json(const StatisticVector& s);
StatisticVector statistic_vector_from_json(const nlohmann::json& j);

enum class AveragingMode {
  PerYear,  // statistic per observation-month, averaged across years
  Pooled,   // one statistic over all observation-months pooled
};

struct StatsOptions {
  AveragingMode mode = AveragingMode::PerYear;
  /// Observation-months with a larger missing fraction are excluded.
  double max_missing_fraction = 0.05;
};

/// One calendar month of one year on the 5-minute lattice; NaN marks missing.
struct MonthBlock {
  int year;
  int month;
  std::vector<double> depths;
  double missing_fraction;
};

/// Extracts every (year, month) block spanned by the record. month = 0
/// extracts all months.
std::vector<MonthBlock> month_blocks(std::span<const GaugeRecord> rec, int month);

/// Sums groups of `factor` 5-minute bins; any missing constituent makes the
/// coarse bin missing.
std::vector<double> aggregate_bins(std::span<const double> fine, std::size_t factor);

/// Population (1/n) moments of one bin sequence, skipping missing bins;
/// lag-1 pairs need both bins present.
struct SampleMoments {
  std::size_t n = 0;
  double mean = 0.0;
  double variance = 0.0;
  double third_central = 0.0;
  double lag1_autocov = 0.0;
  std::size_t pairs = 0;
};

SampleMoments sample_moments(std::span<const double> bins);

/// Throws InsufficientYears or AllDryMonth (every usable year has a zero
/// variance at some scale).
StatisticVector monthly_statistics(std::span<const GaugeRecord> rec, int month, const StatsOptions& opts = {});

/// Statistics from already extracted blocks; shared by the simulator-based
/// validation path.
StatisticVector monthly_statistics(std::span<const MonthBlock> blocks, int month, const StatsOptions& opts = {});

struct WetDryStats {
  double p_dry = 0.0;
  std::optional<double> p_ww;  // P(wet at i+1 | wet at i)
  std::optional<double> p_dd;  // P(dry at i+1 | dry at i)
  std::size_t bins = 0;
  std::size_t wet_transitions = 0;  // transitions out of a wet bin
  std::size_t dry_transitions = 0;

  /// Throws NoWetIntervals when undefined.
  double ww() const;
};

/// Wet/dry counts accumulate across blocks; transitions never cross blocks
/// or missing bins. A bin is dry when its depth is <= threshold.
class WetDryAccumulator {
 public:
  explicit WetDryAccumulator(double threshold = 0.0) : threshold_(threshold) {}
  void add_block(std::span<const double> bins);
  WetDryStats result() const;

 private:
  double threshold_;
  std::size_t bins_ = 0, dry_ = 0;
  std::size_t from_wet_ = 0, wet_wet_ = 0, from_dry_ = 0, dry_dry_ = 0;
};

WetDryStats wet_dry_from_bins(std::span<const double> bins, double threshold = 0.0);

WetDryStats wet_dry_stats(std::span<const GaugeRecord> rec, int month, double h, double threshold = 0.0,
                          double max_missing_fraction = 0.05);

struct AnnualMaxima {
  std::vector<int> years;
  std::vector<double> maxima;  // mm per h-interval, one per year
};

/// Per calendar year maximum of the h-aggregated depth; restricted to one
/// calendar month when month != 0. Years with more than
/// max_missing_fraction missing are skipped. Throws NoCompleteYears.
AnnualMaxima annual_maxima(std::span<const GaugeRecord> rec, double h, int month = 0,
                           double max_missing_fraction = 0.05);

/// Maximum of h-aggregated depths over the blocks of one year.
double block_maximum(std::span<const double> fine, std::size_t factor);

struct GumbelPoint {
  std::size_t rank;       // 1 = smallest
  double value;
  double probability;     // Gringorten non-exceedance (i - 0.44) / (n + 0.12)
  double return_period;   // 1 / (1 - probability)
  double reduced_variate; // -ln(-ln(1 - 1/R))
};

double reduced_variate(double return_period);
double gringorten_probability(std::size_t rank, std::size_t n);
std::vector<GumbelPoint> gumbel_plot(std::span<const double> maxima);

}  // namespace blrain
