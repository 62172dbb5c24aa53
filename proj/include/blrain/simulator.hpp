#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "blrain/model.hpp"

namespace blrain {

/// Seed plus substream index. Every (seed, stream) pair maps to an independent
/// generator, so replicate r of year y can be drawn without drawing the rest.
struct Seed {
  std::uint64_t value = 0;
  std::uint64_t stream = 0;
};

using Rng = std::mt19937_64;

Rng make_rng(Seed seed);

/// Stream index for (replicate, year, month); distinct for distinct inputs.
std::uint64_t substream(std::uint64_t replicate, std::uint64_t year, std::uint64_t month);

struct Storm {
  double origin;  // h, relative to the start of the scoring window
  double eta;     // cell duration rate for this storm
  double end;     // end of cell generation
};

struct Cell {
  std::size_t storm;
  double origin;
  double end;        // origin + duration
  double intensity;  // mm/h; rectangular variants only
  std::size_t first_pulse = 0;
  std::size_t pulse_count = 0;
};

struct Pulse {
  double time;
  double depth;  // mm
};

/// Continuous-time realization over [0, horizon). Storms that started during
/// the warm-up are retained only when their activity reaches the window.
struct EventSeries {
  Variant variant = Variant::BLRP;
  double horizon = 0.0;
  double warmup = 0.0;
  std::vector<Storm> storms;
  std::vector<Cell> cells;
  std::vector<Pulse> pulses;
};

struct RejectionLimits {
  std::optional<double> max_storm_duration;  // h, length of cell generation
  std::optional<double> max_cell_duration;   // h
  /// mm/h for rectangular cells, mm for pulse depths.
  std::optional<double> max_intensity;

  bool empty() const { return !max_storm_duration && !max_cell_duration && !max_intensity; }
};

enum class RejectionPolicy { Remove, Resample };

struct RejectionReport {
  std::size_t storms_considered = 0;  // storms originating in the window
  std::size_t storms_rejected = 0;
  std::size_t cells_considered = 0;
  std::size_t cells_rejected = 0;
  std::size_t intensities_rejected = 0;
};

struct SimulationOptions {
  /// Upper bound on the fraction of stationary rainfall activity that the
  /// warm-up is allowed to miss; sets the warm-up length from the tail of the
  /// storm and cell duration laws.
  double warmup_tail_mass = 1e-4;
  /// Hard cap on the warm-up, h.
  double max_warmup = 2.0e6;
  /// Lower truncation of eta for random-eta variants (resampled); 0 = off.
  double eta_floor = 0.0;
  RejectionLimits limits;
  RejectionPolicy policy = RejectionPolicy::Remove;
};

/// Warm-up length, h, chosen for the given parameters and options.
double warmup_length(const ValidatedParams& p, const SimulationOptions& opts = {});

/// Throws HorizonNonPositive when horizon <= 0. With limits set, the policy
/// is applied during generation; `report` (optional) receives the counts.
EventSeries simulate(const ValidatedParams& p, const IntensityLaw& law, PulseDepthDependence dep, double horizon,
                     Seed seed, const SimulationOptions& opts = {}, RejectionReport* report = nullptr);

/// Removes storms and cells that exceed the limits. Removing a storm removes
/// its cells; removing a cell removes its pulses.
EventSeries rejection_filter(const EventSeries& e, const RejectionLimits& limits, RejectionReport* report = nullptr);

/// Rainfall depths in consecutive bins of width h.
struct AggregatedSeries {
  double h = 0.0;
  std::vector<double> depths;
  std::int64_t start_minute = 0;  // minutes since 1970-01-01T00:00
  int month = 0;                  // calendar month tag, 0 if untied
};

/// Exact interval-overlap integration of rectangular cells, or pulse sums.
/// Throws NonDividingBin unless h divides the horizon.
AggregatedSeries aggregate(const EventSeries& e, double h);

/// Sums groups of `factor` consecutive bins.
AggregatedSeries coarsen(const AggregatedSeries& s, std::size_t factor);

}  // namespace blrain
