#include "blrain/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "blrain/error.hpp"

namespace blrain {

Rng make_rng(Seed seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed.value), static_cast<std::uint32_t>(seed.value >> 32),
                    static_cast<std::uint32_t>(seed.stream), static_cast<std::uint32_t>(seed.stream >> 32)};
  return Rng(seq);
}

std::uint64_t substream(std::uint64_t replicate, std::uint64_t year, std::uint64_t month) {
  return (replicate << 24) ^ (year << 4) ^ month;
}

namespace {

// Uniform structure over all variants: rates in force for one storm.
struct StormRates {
  double eta;    // cell duration rate
  double beta;   // cell arrival rate
  double gamma;  // cell generation termination rate
  double xi;     // pulse rate (instantaneous variants)
  double mean;   // mean intensity (mm/h) or pulse depth (mm)
};

class StormSampler {
 public:
  StormSampler(const ValidatedParams& p, const SimulationOptions& opts) : params_(p.params()), opts_(opts) {
    std::visit(
        [this](const auto& q) {
          using T = std::decay_t<decltype(q)>;
          lambda_ = q.lambda;
          if constexpr (std::is_same_v<T, BlrpParams> || std::is_same_v<T, BlipParams>) {
            random_eta_ = false;
          } else {
            random_eta_ = true;
            eta_law_ = std::gamma_distribution<double>(q.alpha, 1.0 / q.nu);
          }
        },
        params_);
  }

  double lambda() const { return lambda_; }

  StormRates draw(Rng& rng) {
    double eta = 0.0;
    if (random_eta_) {
      do {
        eta = eta_law_(rng);
      } while (eta <= opts_.eta_floor);
    }
    return std::visit(
        [eta](const auto& q) -> StormRates {
          using T = std::decay_t<decltype(q)>;
          if constexpr (std::is_same_v<T, BlrpParams>) {
            return {q.eta, q.beta, q.gamma, 0.0, q.mu_x};
          } else if constexpr (std::is_same_v<T, BlipParams>) {
            return {q.eta, q.beta, q.gamma, q.xi, q.mu_x};
          } else if constexpr (std::is_same_v<T, BlrprParams>) {
            return {eta, q.kappa * eta, q.phi * eta, 0.0, q.mu_x};
          } else if constexpr (std::is_same_v<T, BlrprXParams>) {
            return {eta, q.kappa * eta, q.phi * eta, 0.0, q.iota * eta};
          } else {
            return {eta, q.kappa * eta, q.phi * eta, q.omega * eta, q.mu_x};
          }
        },
        params_);
  }

 private:
  const ModelParams& params_;
  const SimulationOptions& opts_;
  double lambda_ = 0.0;
  bool random_eta_ = false;
  std::gamma_distribution<double> eta_law_;
};

double exponential(Rng& rng, double rate) {
  return std::exponential_distribution<double>(rate)(rng);
}

double sample_depth(const IntensityLaw& law, double mean, Rng& rng) {
  if (mean <= 0.0) return 0.0;
  switch (law.family) {
    case IntensityFamily::Exponential:
      return std::exponential_distribution<double>(1.0 / mean)(rng);
    case IntensityFamily::Gamma:
      return std::gamma_distribution<double>(law.shape, mean / law.shape)(rng);
    case IntensityFamily::Weibull: {
      const double scale = mean / std::exp(std::lgamma(1.0 + 1.0 / law.shape));
      return std::weibull_distribution<double>(law.shape, scale)(rng);
    }
  }
  return 0.0;
}

constexpr int kMaxRedraws = 10000;

// Draws from `draw` until `ok` holds; returns nullopt after kMaxRedraws.
template <class Draw, class Ok>
std::optional<double> redraw_until(Draw&& draw, Ok&& ok, bool& redrawn) {
  for (int i = 0; i < kMaxRedraws; ++i) {
    const double x = draw();
    if (ok(x)) return x;
    redrawn = true;
  }
  return std::nullopt;
}

}  // namespace

double warmup_length(const ValidatedParams& vp, const SimulationOptions& opts) {
  const double eps = opts.warmup_tail_mass;
  const Variant v = vp.variant();
  double w = 0.0;
  std::visit(
      [&](const auto& q) {
        using T = std::decay_t<decltype(q)>;
        if constexpr (std::is_same_v<T, BlrpParams> || std::is_same_v<T, BlipParams>) {
          // Exponential tails: activity mass beyond age W is exp(-rate W).
          w = std::log(1.0 / eps) / q.gamma;
          if (!is_instantaneous(v)) w += std::log(1.0 / eps) / q.eta;
        } else {
          // Mass beyond age W of an Exp(c eta) lifetime, eta ~ Gamma(alpha, nu):
          // (nu / (nu + c W))^(alpha - 1).
          const double scale = q.nu * (std::pow(eps, -1.0 / (q.alpha - 1.0)) - 1.0);
          w = scale / q.phi;
          if (!is_instantaneous(v)) w += scale;
        }
      },
      vp.params());
  return std::min(w, opts.max_warmup);
}

EventSeries simulate(const ValidatedParams& p, const IntensityLaw& law, PulseDepthDependence dep, double horizon,
                     Seed seed, const SimulationOptions& opts, RejectionReport* report) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw Error(ErrorCode::HorizonNonPositive, "horizon", "simulation horizon must be positive");
  }
  EventSeries out;
  out.variant = p.variant();
  out.horizon = horizon;
  out.warmup = warmup_length(p, opts);

  StormSampler sampler(p, opts);
  RejectionReport local;
  if (sampler.lambda() <= 0.0) {
    if (report) *report = local;
    return out;
  }

  Rng rng = make_rng(seed);
  const bool instantaneous = is_instantaneous(out.variant);
  const bool resample = opts.policy == RejectionPolicy::Resample && !opts.limits.empty();
  const auto& lim = opts.limits;

  double t = -out.warmup;
  while (true) {
    t += exponential(rng, sampler.lambda());
    if (t >= horizon) break;
    const double origin = t;
    const bool in_window = origin >= 0.0;
    if (in_window) ++local.storms_considered;

    StormRates rates = sampler.draw(rng);
    double duration = exponential(rng, rates.gamma);
    if (resample && lim.max_storm_duration && duration > *lim.max_storm_duration) {
      bool redrawn = false;
      auto d = redraw_until(
          [&] {
            rates = sampler.draw(rng);
            return exponential(rng, rates.gamma);
          },
          [&](double x) { return x <= *lim.max_storm_duration; }, redrawn);
      if (in_window) ++local.storms_rejected;
      if (!d) continue;
      duration = *d;
    }
    const double end = origin + duration;

    // Warm-up storms whose activity cannot reach the window are skipped.
    // Pulses stop with the storm; rectangular cells outlive it with
    // probability at most exp(-eta (0 - end)) each.
    if (end < 0.0 && (instantaneous || rates.eta * (-end) > 40.0)) continue;

    const std::size_t storm_index = out.storms.size();
    const std::size_t first_cell = out.cells.size();
    out.storms.push_back({origin, rates.eta, end});

    const double gen_end = std::min(end, horizon);
    auto add_cell = [&](double c_origin) {
      double life = exponential(rng, rates.eta);
      if (resample && lim.max_cell_duration && life > *lim.max_cell_duration) {
        bool redrawn = false;
        auto l = redraw_until([&] { return exponential(rng, rates.eta); },
                              [&](double x) { return x <= *lim.max_cell_duration; }, redrawn);
        if (in_window) ++local.cells_rejected;
        if (!l) return;
        life = *l;
      }
      if (in_window) ++local.cells_considered;
      const double c_end = c_origin + life;
      if (!instantaneous) {
        if (c_end <= 0.0) return;
        double x = sample_depth(law, rates.mean, rng);
        if (resample && lim.max_intensity && x > *lim.max_intensity) {
          bool redrawn = false;
          auto y = redraw_until([&] { return sample_depth(law, rates.mean, rng); },
                                [&](double v) { return v <= *lim.max_intensity; }, redrawn);
          ++local.intensities_rejected;
          if (!y) return;
          x = *y;
        }
        out.cells.push_back({storm_index, c_origin, c_end, x});
        return;
      }
      // Pulses on [c_origin, min(c_end, storm end)], restricted to the window.
      const double p_begin = std::max(c_origin, 0.0);
      const double p_end = std::min({c_end, end, horizon});
      if (p_end <= p_begin) return;
      Cell cell{storm_index, c_origin, c_end, 0.0, out.pulses.size(), 0};
      const double common = dep == PulseDepthDependence::Common ? sample_depth(law, rates.mean, rng) : 0.0;
      double s = p_begin;
      while (true) {
        s += exponential(rng, rates.xi);
        if (s >= p_end) break;
        double depth = dep == PulseDepthDependence::Common ? common : sample_depth(law, rates.mean, rng);
        if (resample && lim.max_intensity && depth > *lim.max_intensity) {
          ++local.intensities_rejected;
          if (dep == PulseDepthDependence::Common) continue;
          bool redrawn = false;
          auto y = redraw_until([&] { return sample_depth(law, rates.mean, rng); },
                                [&](double v) { return v <= *lim.max_intensity; }, redrawn);
          if (!y) continue;
          depth = *y;
        }
        out.pulses.push_back({s, depth});
      }
      cell.pulse_count = out.pulses.size() - cell.first_pulse;
      out.cells.push_back(cell);
    };

    // Rectangular variants place a cell at the storm origin.
    if (!instantaneous) add_cell(origin);
    double c = origin;
    while (true) {
      c += exponential(rng, rates.beta);
      if (c > gen_end) break;
      add_cell(c);
    }
    if (out.cells.size() == first_cell && !in_window) out.storms.pop_back();
  }

  if (!resample && !opts.limits.empty()) {
    RejectionReport filtered;
    out = rejection_filter(out, opts.limits, &filtered);
    local.storms_rejected = filtered.storms_rejected;
    local.cells_rejected = filtered.cells_rejected;
    local.intensities_rejected = filtered.intensities_rejected;
  }
  if (report) *report = local;
  return out;
}

EventSeries rejection_filter(const EventSeries& e, const RejectionLimits& limits, RejectionReport* report) {
  RejectionReport r;
  for (const auto& s : e.storms) {
    if (s.origin >= 0.0) ++r.storms_considered;
  }
  for (const auto& c : e.cells) {
    if (e.storms[c.storm].origin >= 0.0) ++r.cells_considered;
  }
  if (limits.empty()) {
    if (report) *report = r;
    return e;
  }

  EventSeries out;
  out.variant = e.variant;
  out.horizon = e.horizon;
  out.warmup = e.warmup;
  const bool instantaneous = is_instantaneous(e.variant);

  std::vector<std::size_t> new_index(e.storms.size(), static_cast<std::size_t>(-1));
  for (std::size_t i = 0; i < e.storms.size(); ++i) {
    const auto& s = e.storms[i];
    if (limits.max_storm_duration && s.end - s.origin > *limits.max_storm_duration) {
      if (s.origin >= 0.0) ++r.storms_rejected;
      continue;
    }
    new_index[i] = out.storms.size();
    out.storms.push_back(s);
  }
  for (const auto& c : e.cells) {
    const std::size_t si = new_index[c.storm];
    if (si == static_cast<std::size_t>(-1)) continue;
    const bool counted = e.storms[c.storm].origin >= 0.0;
    if (limits.max_cell_duration && c.end - c.origin > *limits.max_cell_duration) {
      if (counted) ++r.cells_rejected;
      continue;
    }
    if (!instantaneous && limits.max_intensity && c.intensity > *limits.max_intensity) {
      ++r.intensities_rejected;
      continue;
    }
    Cell nc = c;
    nc.storm = si;
    nc.first_pulse = out.pulses.size();
    if (instantaneous) {
      for (std::size_t k = 0; k < c.pulse_count; ++k) {
        const auto& pulse = e.pulses[c.first_pulse + k];
        if (limits.max_intensity && pulse.depth > *limits.max_intensity) {
          ++r.intensities_rejected;
          continue;
        }
        out.pulses.push_back(pulse);
      }
    }
    nc.pulse_count = out.pulses.size() - nc.first_pulse;
    out.cells.push_back(nc);
  }
  if (report) *report = r;
  return out;
}

AggregatedSeries aggregate(const EventSeries& e, double h) {
  if (!(h > 0.0)) throw Error(ErrorCode::NonDividingBin, "h", "bin width must be positive");
  const double ratio = e.horizon / h;
  const double n_real = std::round(ratio);
  if (n_real < 1.0 || std::abs(ratio - n_real) > 1e-9 * std::max(1.0, ratio)) {
    throw Error(ErrorCode::NonDividingBin, "h",
                "bin width " + std::to_string(h) + " does not divide horizon " + std::to_string(e.horizon));
  }
  const auto n = static_cast<std::size_t>(n_real);
  AggregatedSeries out;
  out.h = h;
  out.depths.assign(n, 0.0);

  if (is_instantaneous(e.variant)) {
    for (const auto& p : e.pulses) {
      if (p.time < 0.0 || p.time >= e.horizon) continue;
      const auto bin = std::min(static_cast<std::size_t>(p.time / h), n - 1);
      out.depths[bin] += p.depth;
    }
    return out;
  }

  for (const auto& c : e.cells) {
    const double a = std::max(c.origin, 0.0);
    const double b = std::min(c.end, e.horizon);
    if (b <= a || c.intensity == 0.0) continue;
    auto first = std::min(static_cast<std::size_t>(a / h), n - 1);
    auto last = std::min(static_cast<std::size_t>(b / h), n - 1);
    for (std::size_t i = first; i <= last; ++i) {
      const double lo = std::max(a, static_cast<double>(i) * h);
      const double hi = std::min(b, static_cast<double>(i + 1) * h);
      if (hi > lo) out.depths[i] += c.intensity * (hi - lo);
    }
  }
  return out;
}

AggregatedSeries coarsen(const AggregatedSeries& s, std::size_t factor) {
  if (factor == 0 || s.depths.size() % factor != 0) {
    throw Error(ErrorCode::NonDividingBin, "factor", "coarsening factor must divide the series length");
  }
  AggregatedSeries out;
  out.h = s.h * static_cast<double>(factor);
  out.start_minute = s.start_minute;
  out.month = s.month;
  out.depths.resize(s.depths.size() / factor, 0.0);
  for (std::size_t i = 0; i < s.depths.size(); ++i) out.depths[i / factor] += s.depths[i];
  return out;
}

}  // namespace blrain
