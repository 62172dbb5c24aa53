#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "blrain/error.hpp"
#include "blrain/reference_sets.hpp"
#include "blrain/simulator.hpp"
#include "doctest.h"

using namespace blrain;

namespace {

const IntensityLaw kExp = IntensityLaw::exponential(1.0);
constexpr auto kCommon = PulseDepthDependence::Common;

ValidatedParams reference_row(const reference::Table& t, int month) {
  return validate_params(reference::row_params(t, month), ConstraintSet{1.0});
}

bool same_series(const EventSeries& a, const EventSeries& b) {
  if (a.storms.size() != b.storms.size() || a.cells.size() != b.cells.size() || a.pulses.size() != b.pulses.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.storms.size(); ++i) {
    if (a.storms[i].origin != b.storms[i].origin || a.storms[i].eta != b.storms[i].eta ||
        a.storms[i].end != b.storms[i].end) {
      return false;
    }
  }
  for (std::size_t i = 0; i < a.cells.size(); ++i) {
    if (a.cells[i].origin != b.cells[i].origin || a.cells[i].end != b.cells[i].end ||
        a.cells[i].intensity != b.cells[i].intensity) {
      return false;
    }
  }
  for (std::size_t i = 0; i < a.pulses.size(); ++i) {
    if (a.pulses[i].time != b.pulses[i].time || a.pulses[i].depth != b.pulses[i].depth) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("empty and deterministic realizations") {
  const ConstraintSet degenerate{1.0, true};
  const auto none = validate_params(BlrpParams{0.0, 0.96, 5.422, 0.231, 5.975}, degenerate);
  const auto e = simulate(none, kExp, kCommon, 744.0, Seed{1, 0});
  CHECK(e.storms.empty());
  CHECK(e.cells.empty());
  const auto bins = aggregate(e, 1.0 / 12.0);
  CHECK(bins.depths.size() == 744 * 12);
  CHECK(std::all_of(bins.depths.begin(), bins.depths.end(), [](double d) { return d == 0.0; }));

  for (const auto* t : {&reference::blrp_table(), &reference::blip_table(), &reference::blipr_table(),
                        &reference::blrprx_table()}) {
    const auto p = reference_row(*t, 7);
    const auto a = simulate(p, kExp, kCommon, 744.0, Seed{42, 3});
    const auto b = simulate(p, kExp, kCommon, 744.0, Seed{42, 3});
    const auto c = simulate(p, kExp, kCommon, 744.0, Seed{42, 4});
    CHECK(same_series(a, b));
    CHECK_FALSE(same_series(a, c));
  }

  try {
    simulate(reference_row(reference::blrp_table(), 1), kExp, kCommon, 0.0, Seed{});
    FAIL("expected HorizonNonPositive");
  } catch (const Error& err) {
    CHECK(err.code() == ErrorCode::HorizonNonPositive);
  }
  CHECK(substream(1, 2, 3) != substream(1, 3, 2));
  CHECK(substream(0, 0, 1) != substream(1, 0, 0));
}

TEST_CASE("storm and cell counts") {
  const double horizon = 2000.0 * 744.0;
  SUBCASE("storm arrivals, BLRP January") {
    const auto p = reference_row(reference::blrp_table(), 1);
    const auto e = simulate(p, kExp, kCommon, horizon, Seed{7, 0});
    const auto n = std::count_if(e.storms.begin(), e.storms.end(), [](const Storm& s) { return s.origin >= 0.0; });
    const double expected = 0.022 * horizon;
    CHECK(std::abs(static_cast<double>(n) - expected) < 3.0 * std::sqrt(expected));

    // cells per storm: one at the origin plus a Poisson(beta) count over an
    // Exp(gamma) window, mean 1 + beta/gamma, variance r (1 + r), r = beta/gamma
    std::map<std::size_t, double> per_storm;
    for (std::size_t i = 0; i < e.storms.size(); ++i) {
      if (e.storms[i].origin >= 0.0 && e.storms[i].end < horizon) per_storm[i] = 0.0;
    }
    for (const auto& c : e.cells) {
      if (auto it = per_storm.find(c.storm); it != per_storm.end()) it->second += 1.0;
    }
    const double r = 5.422 / 0.231;
    const double se = std::sqrt(r * (1 + r) / static_cast<double>(per_storm.size()));
    double total = 0.0;
    for (const auto& [i, k] : per_storm) total += k;
    CHECK(std::abs(total / static_cast<double>(per_storm.size()) - (1 + r)) < 3.0 * se);
  }
  SUBCASE("per-storm eta is Gamma(alpha, nu)") {
    const auto p = reference_row(reference::blrprx_table(), 1);
    const auto& q = p.as<BlrprXParams>();
    const auto e = simulate(p, kExp, kCommon, horizon, Seed{8, 0});
    std::vector<double> etas;
    for (const auto& s : e.storms) {
      if (s.origin >= 0.0) etas.push_back(s.eta);
    }
    const double n = static_cast<double>(etas.size());
    const double mean = std::accumulate(etas.begin(), etas.end(), 0.0) / n;
    const double se = std::sqrt(q.alpha) / q.nu / std::sqrt(n);
    CHECK(std::abs(mean - q.alpha / q.nu) < 3.0 * se);
  }
}

TEST_CASE("event geometry") {
  for (const auto* t : {&reference::blrp_table(), &reference::blip_table(), &reference::blipr_table(),
                        &reference::blrprx_table()}) {
    const auto p = reference_row(*t, 1);
    const auto e = simulate(p, kExp, kCommon, 50 * 744.0, Seed{11, 0});
    const bool inst = is_instantaneous(e.variant);
    for (const auto& c : e.cells) {
      const auto& s = e.storms[c.storm];
      CHECK(c.origin >= s.origin);
      CHECK(c.origin <= s.end);
      CHECK(c.end > c.origin);
      for (std::size_t k = 0; k < c.pulse_count; ++k) {
        const auto& pulse = e.pulses[c.first_pulse + k];
        CHECK(pulse.time >= c.origin);
        CHECK(pulse.time <= std::min(c.end, s.end));
        CHECK(pulse.depth > 0.0);
      }
      if (!inst) {
        CHECK(c.intensity > 0.0);
        CHECK(c.pulse_count == 0);
      }
    }
    if (!inst) {
      // a cell at every storm origin
      std::map<std::size_t, bool> at_origin;
      for (const auto& c : e.cells) {
        if (c.origin == e.storms[c.storm].origin) at_origin[c.storm] = true;
      }
      std::size_t in_window = 0, covered = 0;
      for (std::size_t i = 0; i < e.storms.size(); ++i) {
        if (e.storms[i].origin < 0.0) continue;
        ++in_window;
        if (at_origin.count(i)) ++covered;
      }
      CHECK(covered == in_window);
    }
  }
}

TEST_CASE("aggregation") {
  EventSeries e;
  e.variant = Variant::BLRP;
  e.horizon = 3.0;
  e.storms.push_back({0.0, 1.0, 3.0});
  e.cells.push_back({0, 0.25, 0.75, 2.0});
  auto a = aggregate(e, 1.0);
  REQUIRE(a.depths.size() == 3);
  CHECK(a.depths[0] == doctest::Approx(1.0));
  CHECK(a.depths[1] == 0.0);

  e.cells[0] = {0, 0.6, 1.6, 2.0};
  a = aggregate(e, 1.0);
  CHECK(a.depths[0] == doctest::Approx(0.8));
  CHECK(a.depths[1] == doctest::Approx(1.2));
  CHECK(a.depths[0] + a.depths[1] == doctest::Approx(2.0));

  // a cell running past the horizon is cut at it
  e.cells[0] = {0, 2.5, 10.0, 1.0};
  a = aggregate(e, 0.5);
  CHECK(a.depths.back() == doctest::Approx(0.5));

  EventSeries pulses;
  pulses.variant = Variant::BLIP;
  pulses.horizon = 2.0;
  pulses.storms.push_back({0.0, 1.0, 2.0});
  pulses.pulses = {{0.1, 0.5}, {0.9, 0.25}, {1.5, 1.0}};
  pulses.cells.push_back({0, 0.0, 2.0, 0.0, 0, 3});
  a = aggregate(pulses, 1.0);
  CHECK(a.depths[0] == doctest::Approx(0.75));
  CHECK(a.depths[1] == doctest::Approx(1.0));

  try {
    aggregate(e, 0.7);
    FAIL("expected NonDividingBin");
  } catch (const Error& err) {
    CHECK(err.code() == ErrorCode::NonDividingBin);
  }
}

TEST_CASE("5-minute bins sum to the hourly bins") {
  for (const auto* t : {&reference::blrp_table(), &reference::blipr_table(), &reference::blrprx_table()}) {
    const auto p = reference_row(*t, 7);
    const auto e = simulate(p, kExp, kCommon, 20 * 744.0, Seed{5, 1});
    const auto fine = aggregate(e, 1.0 / 12.0);
    const auto hourly = aggregate(e, 1.0);
    const auto summed = coarsen(fine, 12);
    REQUIRE(summed.depths.size() == hourly.depths.size());
    double worst = 0.0, total = 0.0;
    for (std::size_t i = 0; i < hourly.depths.size(); ++i) {
      worst = std::max(worst, std::abs(summed.depths[i] - hourly.depths[i]));
      total += hourly.depths[i];
    }
    CHECK(total > 0.0);
    CHECK(worst <= 1e-12 * std::max(1.0, *std::max_element(hourly.depths.begin(), hourly.depths.end())));
  }
}

TEST_CASE("rejection") {
  const auto p = reference_row(reference::blrprx_table(), 1);
  const auto e = simulate(p, kExp, kCommon, 100 * 744.0, Seed{3, 0});

  SUBCASE("no limits is the identity") {
    RejectionReport r;
    const auto f = rejection_filter(e, {}, &r);
    CHECK(same_series(e, f));
    CHECK(r.storms_rejected == 0);
  }
  SUBCASE("a 30-h cell is removed by a 24-h limit") {
    EventSeries s;
    s.variant = Variant::BLRPR_X;
    s.horizon = 100.0;
    s.storms = {{0.0, 1.0, 40.0}, {50.0, 1.0, 60.0}};
    s.cells = {{0, 0.0, 2.0, 1.0}, {0, 5.0, 35.0, 1.0}, {1, 50.0, 51.0, 3.0}};
    RejectionLimits lim;
    lim.max_cell_duration = 24.0;
    RejectionReport r;
    const auto f = rejection_filter(s, lim, &r);
    REQUIRE(f.cells.size() == 2);
    CHECK(f.cells[0].end == 2.0);
    CHECK(f.cells[1].origin == 50.0);
    CHECK(f.cells[1].storm == 1);
    CHECK(f.storms.size() == 2);
    CHECK(r.cells_rejected == 1);
  }
  SUBCASE("storm-duration rejection rate follows the Pareto-II tail") {
    // alpha = 2, mean eta 5.014: P(D > 72) = (nu / (nu + 72 phi))^alpha
    BlrprXParams q = p.as<BlrprXParams>();
    q.alpha = 2.0;
    q.nu = q.alpha / 5.014;
    const double tail = std::pow(q.nu / (q.nu + 72.0 * q.phi), q.alpha);
    CHECK(tail == doctest::Approx(0.0136).epsilon(0.01));
    SimulationOptions opts;
    opts.limits.max_storm_duration = 72.0;
    RejectionReport r;
    const auto f = simulate(validate_params(q), kExp, kCommon, 3000 * 744.0, Seed{9, 0}, opts, &r);
    const double n = static_cast<double>(r.storms_considered);
    const double frac = static_cast<double>(r.storms_rejected) / n;
    CHECK(std::abs(frac - tail) < 3.0 * std::sqrt(tail * (1 - tail) / n));
    for (const auto& s : f.storms) CHECK(s.end - s.origin <= 72.0);
  }
  SUBCASE("resampling keeps the storm count") {
    SimulationOptions opts;
    opts.limits.max_storm_duration = 24.0;
    opts.policy = RejectionPolicy::Resample;
    RejectionReport r;
    const double horizon = 2000 * 744.0;
    const auto f = simulate(p, kExp, kCommon, horizon, Seed{4, 0}, opts, &r);
    const auto n = std::count_if(f.storms.begin(), f.storms.end(), [](const Storm& s) { return s.origin >= 0.0; });
    const double expected = 0.022 * horizon;
    CHECK(std::abs(static_cast<double>(n) - expected) < 3.0 * std::sqrt(expected));
    CHECK(r.storms_rejected > 0);
    for (const auto& s : f.storms) CHECK(s.end - s.origin <= 24.0);
  }
  SUBCASE("eta floor") {
    SimulationOptions opts;
    opts.eta_floor = 3.0;
    const auto f = simulate(p, kExp, kCommon, 200 * 744.0, Seed{6, 0}, opts);
    REQUIRE(!f.storms.empty());
    for (const auto& s : f.storms) CHECK(s.eta > 3.0);
  }
}
