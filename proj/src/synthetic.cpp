#include "blrain/synthetic.hpp"

namespace blrain {

namespace {

std::vector<double> simulate_segment(const ValidatedParams& p, const IntensityLaw& law, PulseDepthDependence dep,
                                     int year, int month, std::uint64_t seed, std::uint64_t replicate,
                                     std::uint64_t year_index, const SimulationOptions& opts) {
  const double horizon = 24.0 * days_in_month(year, month);
  const auto e = simulate(p, law, dep, horizon,
                          Seed{seed, substream(replicate, year_index, static_cast<std::uint64_t>(month))}, opts);
  return aggregate(e, 1.0 / 12.0).depths;
}

}  // namespace

std::vector<MonthBlock> simulate_month_blocks(const ValidatedParams& p, const IntensityLaw& law,
                                              PulseDepthDependence dep, int month, int years, std::uint64_t seed,
                                              std::uint64_t replicate, int first_year,
                                              const SimulationOptions& opts) {
  std::vector<MonthBlock> out;
  out.reserve(static_cast<std::size_t>(years));
  for (int y = 0; y < years; ++y) {
    const int year = first_year + y;
    out.push_back({year, month,
                   simulate_segment(p, law, dep, year, month, seed, replicate, static_cast<std::uint64_t>(y), opts),
                   0.0});
  }
  return out;
}

std::vector<GaugeRecord> simulate_record(const SeasonalParams& params, const IntensityLaw& law,
                                         PulseDepthDependence dep, int first_year, int years, std::uint64_t seed,
                                         std::uint64_t replicate, const SimulationOptions& opts, bool keep_absent) {
  std::vector<GaugeRecord> out;
  for (int y = 0; y < years; ++y) {
    const int year = first_year + y;
    for (int month = 1; month <= 12; ++month) {
      const std::int64_t start = month_start_minute(year, month);
      const auto& p = params[static_cast<std::size_t>(month - 1)];
      if (!p && !keep_absent) continue;
      if (!p) {
        const std::int64_t bins = static_cast<std::int64_t>(days_in_month(year, month)) * kBinsPerDay;
        for (std::int64_t i = 0; i < bins; ++i) out.push_back({start + i * kLatticeMinutes, 0.0, Quality::Missing});
        continue;
      }
      const auto depths =
          simulate_segment(*p, law, dep, year, month, seed, replicate, static_cast<std::uint64_t>(y), opts);
      for (std::size_t i = 0; i < depths.size(); ++i) {
        out.push_back({start + static_cast<std::int64_t>(i) * kLatticeMinutes, depths[i], Quality::Observed});
      }
    }
  }
  return out;
}

}  // namespace blrain
