#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "blrain/empirical.hpp"
#include "blrain/gauge.hpp"
#include "blrain/simulator.hpp"

namespace blrain {

/// Simulates `years` independent realizations of one calendar month, each
/// from its own substream (replicate, year index, month), aggregated to the
/// 5-minute lattice.
std::vector<MonthBlock> simulate_month_blocks(const ValidatedParams& p, const IntensityLaw& law,
                                              PulseDepthDependence dep, int month, int years, std::uint64_t seed,
                                              std::uint64_t replicate = 0, int first_year = 2001,
                                              const SimulationOptions& opts = {});

/// Per-month parameter sets of a seasonal model; an empty entry leaves the
/// month missing in a simulated record.
using SeasonalParams = std::array<std::optional<ValidatedParams>, 12>;

/// 5-minute record covering whole calendar years. Every month of every year
/// is simulated as a stationary segment from its own parameters and
/// substream, so any month can be reproduced in isolation. Months without
/// parameters are written as missing, or left out when `keep_absent` is
/// false.
std::vector<GaugeRecord> simulate_record(const SeasonalParams& params, const IntensityLaw& law,
                                         PulseDepthDependence dep, int first_year, int years, std::uint64_t seed,
                                         std::uint64_t replicate = 0, const SimulationOptions& opts = {},
                                         bool keep_absent = true);

}  // namespace blrain
