#include "cli_commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "blrain/error.hpp"
#include "blrain/gauge.hpp"
#include "blrain/moments.hpp"
#include "blrain/parallel.hpp"
#include "blrain/reference_sets.hpp"
#include "blrain/synthetic.hpp"

namespace blrain::cli {

namespace fs = std::filesystem;

namespace {

// Replicate offsets keep the validation and extremes simulations on streams
// distinct from `simulate` replicates with the same seed.
constexpr std::uint64_t kValidateStream = 2'000'000;
constexpr std::uint64_t kExtremesStream = 1'000'000;
// Stream tag for parameter draws.
constexpr std::uint64_t kDrawTag = std::uint64_t{1} << 62;

std::string num(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return format_depth(x);
}

std::string two_digits(int m) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "%02d", m);
  return buf;
}

nlohmann::json provenance(const RunConfig& c) {
  return {{"tool", "blrain"}, {"command", c.command}, {"seed", c.seed}, {"config", c.to_json()}};
}

std::vector<std::string> provenance_lines(const RunConfig& c) {
  return {"blrain " + c.command + " seed=" + std::to_string(c.seed), "config=" + c.to_json().dump()};
}

void write_atomic(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path().empty() ? fs::path(".") : path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw InputError("cannot write '" + tmp.string() + "'");
    out << content;
    if (!out) throw InputError("write failed for '" + tmp.string() + "'");
  }
  fs::rename(tmp, path);
}

void write_json(const fs::path& path, const nlohmann::json& j) { write_atomic(path, j.dump(2) + "\n"); }

std::string csv_preamble(const RunConfig& c) {
  std::string s;
  for (const auto& line : provenance_lines(c)) s += "# " + line + "\n";
  return s;
}

std::vector<GaugeRecord> load_data(const RunConfig& c) {
  if (c.data.empty()) throw InputError("no data file given (--data or config 'data')");
  try {
    return load_series(c.data);
  } catch (const Error& e) {
    throw InputError(e.what());
  }
}

nlohmann::json read_json_file(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw InputError("cannot open '" + p.string() + "'");
  try {
    nlohmann::json j;
    in >> j;
    return j;
  } catch (const nlohmann::json::exception& e) {
    throw InputError("'" + p.string() + "' is not valid JSON: " + e.what());
  }
}

const reference::Table* reference_table(Variant v) {
  switch (v) {
    case Variant::BLRP:
      return &reference::blrp_table();
    case Variant::BLIP:
      return &reference::blip_table();
    case Variant::BLIPR:
      return &reference::blipr_table();
    case Variant::BLRPR_X:
      return &reference::blrprx_table();
    default:
      return nullptr;
  }
}

// Parameter (or fit result) documents for `v`, keyed by month; month 0
// documents apply to every month. "reference" selects the built-in table.
std::map<int, FitResult> load_params(const RunConfig& c, Variant v) {
  if (c.params.empty()) throw InputError("no parameter file given (--params or config 'params')");
  if (c.params == "reference") {
    const auto* t = reference_table(v);
    if (!t) throw InputError("no reference parameters for " + std::string(to_string(v)));
    std::map<int, FitResult> out;
    for (const auto& row : t->rows) {
      out[row.month].theta = reference::row_params(*t, row.month);
      out[row.month].month = row.month;
    }
    return out;
  }
  if (!fs::exists(c.params)) throw InputError("parameter path '" + c.params.string() + "' does not exist");
  std::vector<fs::path> files;
  if (fs::is_directory(c.params)) {
    for (const auto& e : fs::directory_iterator(c.params)) {
      if (e.path().extension() == ".json") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
  } else {
    files.push_back(c.params);
  }
  std::map<int, FitResult> out;
  for (const auto& f : files) {
    const auto j = read_json_file(f);
    std::vector<nlohmann::json> docs;
    if (j.is_array()) {
      docs.assign(j.begin(), j.end());
    } else {
      docs.push_back(j);
    }
    for (const auto& d : docs) {
      if (!d.is_object() || !d.contains("variant")) continue;
      try {
        if (parse_variant(d.at("variant").get<std::string>()) != v) continue;
        auto r = fit_result_from_json(d);
        out[r.month] = std::move(r);
      } catch (const Error& e) {
        throw InputError("invalid parameter document '" + f.string() + "': " + e.what());
      } catch (const nlohmann::json::exception& e) {
        throw InputError("invalid parameter document '" + f.string() + "': " + e.what());
      }
    }
  }
  if (out.empty()) {
    throw InputError("no " + std::string(to_string(v)) + " parameters in '" + c.params.string() + "'");
  }
  return out;
}

const FitResult& params_for(const std::map<int, FitResult>& p, int month, Variant v) {
  if (auto it = p.find(month); it != p.end()) return it->second;
  if (auto it = p.find(0); it != p.end()) return it->second;
  throw InputError("no " + std::string(to_string(v)) + " parameters for month " + std::to_string(month));
}

ConstraintSet simulation_constraints(const RunConfig& c) {
  ConstraintSet cs;
  cs.alpha_min = std::min(c.alpha_min, 1.0);
  cs.allow_degenerate = true;
  return cs;
}

ValidatedParams validated(const ModelParams& p, const RunConfig& c) {
  try {
    return validate_params(p, simulation_constraints(c));
  } catch (const Error& e) {
    throw InputError(std::string("invalid parameters: ") + e.what());
  }
}

std::mt19937_64 draw_rng(const RunConfig& c, std::uint64_t replicate, int month) {
  return make_rng(Seed{c.seed, substream(replicate, 0, static_cast<std::uint64_t>(month)) ^ kDrawTag});
}

// Parameters for one replicate of one month: the document's values, or a
// draw from its asymptotic covariance with --uncertainty.
ModelParams replicate_params(const RunConfig& c, const FitResult& doc, std::uint64_t replicate, int month) {
  if (!c.uncertainty) return doc.theta;
  if (!doc.covariance) {
    throw InputError("--uncertainty needs fit results with a covariance (month " + std::to_string(month) + ")");
  }
  auto rng = draw_rng(c, replicate, month);
  FitResult base = doc;
  base.alpha_min = std::max(doc.alpha_min, 1.0);
  return ParameterSampler(base, *doc.covariance).draw(rng);
}

StatsOptions stats_options(const RunConfig& c) { return {c.averaging, c.max_missing_fraction}; }

struct MonthStats {
  std::optional<StatisticVector> sv;
  std::string error;
};

std::map<int, MonthStats> gather_statistics(const RunConfig& c) {
  std::map<int, MonthStats> out;
  if (!c.statistics.empty()) {
    if (!fs::is_directory(c.statistics)) throw InputError("statistics directory not found: " + c.statistics.string());
    for (int m : c.months) {
      const fs::path p = c.statistics / ("stats_" + two_digits(m) + ".json");
      if (!fs::exists(p)) {
        out[m].error = "missing " + p.string();
        continue;
      }
      auto j = read_json_file(p);
      try {
        out[m].sv = statistic_vector_from_json(j.contains("statistics") ? j.at("statistics") : j);
      } catch (const Error& e) {
        throw InputError(p.string() + ": " + e.what());
      }
    }
    return out;
  }
  const auto rec = load_data(c);
  std::vector<MonthStats> slots(c.months.size());
  parallel_for(c.months.size(), c.threads, [&](std::size_t i) {
    try {
      slots[i].sv = monthly_statistics(rec, c.months[i], stats_options(c));
    } catch (const Error& e) {
      slots[i].error = e.what();
    }
  });
  for (std::size_t i = 0; i < c.months.size(); ++i) out[c.months[i]] = std::move(slots[i]);
  return out;
}

ObjectiveSpec make_spec(const RunConfig& c, Variant v, const StatisticVector& sv) {
  ObjectiveSpec spec;
  spec.variant = v;
  spec.law = c.law;
  spec.dep = c.dep;
  spec.target = sv;
  spec.constraints.alpha_min = c.alpha_min;
  spec.fixed = c.fixed_for(v);
  return spec;
}

ModelParams start_params(const RunConfig& c, Variant v, int month) {
  RunConfig sc = c;
  sc.params = c.start;
  return params_for(load_params(sc, v), month, v).theta;
}

struct ProfileOutput {
  std::vector<ConfidenceInterval> intervals;
  std::vector<std::pair<std::string, std::string>> csv;  // file name, content
  std::vector<double> scales;
};

ProfileOutput profile_all(const RunConfig& c, const ObjectiveSpec& spec, const FitResult& fr, const std::string& stem) {
  ProfileOutput out;
  const auto names = field_names(spec.variant);
  FitOptions po = c.fit;
  po.threads = 1;
  for (std::size_t i = 0; i < names.size(); ++i) {
    const std::string name(names[i]);
    if (spec.fixed.count(name)) continue;
    double scale = 1.0, width = 0.5;
    if (fr.covariance) {
      for (std::size_t k = 0; k < fr.covariance->size(); ++k) {
        if (fr.covariance->names[k] != name) continue;
        width = std::clamp(2.5 * fr.covariance->standard_error(k), 0.02, 2.0);
        if (c.ci_adjust) scale = profile_scale(*fr.covariance, name);
      }
    }
    const double offset = 3.841 / 2.0;
    const auto curve = auto_profile(spec, fr, i, po, width, 8, 4.0, offset / scale);
    const auto scaled = scale_profile(curve, scale);
    out.intervals.push_back(confidence_interval(scaled, offset));
    out.scales.push_back(scale);
    std::ostringstream csv;
    csv << csv_preamble(c) << "# scale=" << num(scale) << "\n";
    write_profile_csv(csv, curve);
    out.csv.emplace_back(stem + "_" + name + ".csv", csv.str());
  }
  return out;
}

nlohmann::json intervals_json(const std::vector<ConfidenceInterval>& cis, const std::vector<double>& scales,
                              bool adjusted) {
  nlohmann::json j = nlohmann::json::object();
  for (std::size_t i = 0; i < cis.size(); ++i) {
    const auto& ci = cis[i];
    j[ci.name] = {{"estimate", ci.estimate},
                  {"lo", ci.lo},
                  {"hi", ci.hi},
                  {"lower_bracketed", ci.lower_bracketed},
                  {"upper_bracketed", ci.upper_bracketed},
                  {"scale", scales[i]},
                  {"adjusted", adjusted}};
  }
  return j;
}

std::string stem_for(Variant v, int month) { return std::string(to_string(v)) + "_" + two_digits(month); }

// Quantile of sorted data, linear interpolation between order statistics.
double quantile_sorted(const std::vector<double>& s, double p) {
  if (s.empty()) return std::numeric_limits<double>::quiet_NaN();
  const double pos = p * static_cast<double>(s.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, s.size() - 1);
  return s[lo] + (pos - static_cast<double>(lo)) * (s[hi] - s[lo]);
}

std::size_t factor_of(double h) { return static_cast<std::size_t>(std::llround(h * 12.0)); }

}  // namespace

// ---------------------------------------------------------------------------

int cmd_stats(const RunConfig& c) {
  const auto rec = load_data(c);
  std::vector<MonthStats> slots(c.months.size());
  parallel_for(c.months.size(), c.threads, [&](std::size_t i) {
    try {
      slots[i].sv = monthly_statistics(rec, c.months[i], stats_options(c));
    } catch (const Error& e) {
      slots[i].error = e.what();
    }
  });
  const auto names = property_names();
  std::ostringstream lng, wide;
  lng << csv_preamble(c) << "month,property,value,variance,weight,years_used\n";
  wide << csv_preamble(c) << "month,status,years_used";
  for (auto n : names) wide << ',' << n;
  wide << '\n';
  int failed = 0;
  for (std::size_t i = 0; i < c.months.size(); ++i) {
    const int m = c.months[i];
    if (!slots[i].sv) {
      ++failed;
      std::cerr << "month " << m << ": " << slots[i].error << '\n';
      wide << m << ",failed,0";
      for (std::size_t k = 0; k < names.size(); ++k) wide << ',';
      wide << '\n';
      continue;
    }
    const auto& sv = *slots[i].sv;
    nlohmann::json j = {{"provenance", provenance(c)}, {"statistics", to_json(sv)}};
    write_json(c.out / ("stats_" + two_digits(m) + ".json"), j);
    wide << m << ",ok," << sv.years_used;
    for (std::size_t k = 0; k < sv.size(); ++k) {
      lng << m << ',' << names[k] << ',' << num(sv.values[k]) << ',' << num(sv.variances[k]) << ','
          << num(sv.weights[k]) << ',' << sv.years_used << '\n';
      wide << ',' << num(sv.values[k]);
    }
    wide << '\n';
  }
  write_atomic(c.out / "stats.csv", lng.str());
  write_atomic(c.out / "stats_wide.csv", wide.str());
  return failed ? 1 : 0;
}

int cmd_fit(const RunConfig& c) {
  for (auto v : c.models) {
    if (!has_closed_form(v)) throw InputError("cannot fit " + std::string(to_string(v)) + ": no closed-form moments");
  }
  const auto stats = gather_statistics(c);
  struct Task {
    Variant v;
    int month;
    std::optional<FitResult> result;
    std::string error;
  };
  std::vector<Task> tasks;
  for (int m : c.months) {
    for (auto v : c.models) tasks.push_back({v, m, std::nullopt, {}});
  }
  // starts are resolved up front so file problems surface as input errors
  std::vector<ModelParams> starts;
  for (const auto& t : tasks) starts.push_back(start_params(c, t.v, t.month));

  parallel_for(tasks.size(), c.threads, [&](std::size_t i) {
    auto& t = tasks[i];
    const auto& ms = stats.at(t.month);
    if (!ms.sv) {
      t.error = ms.error;
      return;
    }
    try {
      const auto spec = make_spec(c, t.v, *ms.sv);
      FitOptions fo = c.fit;
      fo.threads = 1;
      auto fr = fit(spec, starts[i], fo);
      nlohmann::json notes = nlohmann::json::array();
      try {
        fr.covariance = parameter_covariance(spec, fr);
      } catch (const Error& e) {
        notes.push_back(e.what());
      }
      ProfileOutput po;
      if (c.profile) {
        po = profile_all(c, spec, fr, "profile_" + stem_for(t.v, t.month));
        fr.intervals = po.intervals;
        for (const auto& [name, content] : po.csv) write_atomic(c.out / name, content);
      }
      auto j = to_json(fr);
      if (c.profile) j["intervals"] = intervals_json(po.intervals, po.scales, c.ci_adjust);
      j["notes"] = notes;
      j["provenance"] = provenance(c);
      write_json(c.out / ("fit_" + stem_for(t.v, t.month) + ".json"), j);
      t.result = std::move(fr);
    } catch (const Error& e) {
      t.error = e.what();
    }
  });

  std::ostringstream csv, table;
  csv << csv_preamble(c) << "month";
  table << "Minimum objective function value S\n" << "Month";
  for (auto v : c.models) {
    csv << ",S_" << to_string(v);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%14s", std::string(to_string(v)).c_str());
    table << buf;
  }
  csv << '\n';
  table << '\n';
  int failed = 0;
  std::size_t i = 0;
  for (int m : c.months) {
    csv << m;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%5d", m);
    table << buf;
    for (std::size_t k = 0; k < c.models.size(); ++k, ++i) {
      const auto& t = tasks[i];
      if (t.result) {
        csv << ',' << num(t.result->objective);
        std::snprintf(buf, sizeof buf, "%14.4f", t.result->objective);
      } else {
        ++failed;
        csv << ",failed";
        std::snprintf(buf, sizeof buf, "%14s", "failed");
        std::cerr << to_string(t.v) << " month " << m << ": " << t.error << '\n';
      }
      table << buf;
    }
    csv << '\n';
    table << '\n';
  }
  write_atomic(c.out / "fit_summary.csv", csv.str());
  write_atomic(c.out / "fit_summary.txt", table.str());
  std::cout << table.str();
  return failed ? 1 : 0;
}

int cmd_profile(const RunConfig& c) {
  const auto stats = gather_statistics(c);
  int failed = 0;
  for (auto v : c.models) {
    const auto params = load_params(c, v);
    std::vector<std::string> errors(c.months.size());
    parallel_for(c.months.size(), c.threads, [&](std::size_t i) {
      const int m = c.months[i];
      try {
        const auto& ms = stats.at(m);
        if (!ms.sv) throw Error(ErrorCode::InvalidArgument, "statistics", ms.error);
        FitResult fr = params_for(params, m, v);
        fr.month = m;
        const auto spec = make_spec(c, v, *ms.sv);
        fr.objective = objective(fr.theta, spec);
        if (!fr.covariance) fr.covariance = parameter_covariance(spec, fr);
        const auto po = profile_all(c, spec, fr, "profile_" + stem_for(v, m));
        for (const auto& [name, content] : po.csv) write_atomic(c.out / name, content);
        write_json(c.out / ("intervals_" + stem_for(v, m) + ".json"),
                   {{"provenance", provenance(c)},
                    {"variant", std::string(to_string(v))},
                    {"month", m},
                    {"objective", fr.objective},
                    {"intervals", intervals_json(po.intervals, po.scales, c.ci_adjust)}});
      } catch (const InputError&) {
        throw;
      } catch (const Error& e) {
        errors[i] = e.what();
      }
    });
    for (std::size_t i = 0; i < c.months.size(); ++i) {
      if (errors[i].empty()) continue;
      ++failed;
      std::cerr << to_string(v) << " month " << c.months[i] << ": " << errors[i] << '\n';
    }
  }
  return failed ? 1 : 0;
}

int cmd_simulate(const RunConfig& c) {
  const Variant v = c.model();
  const auto params = load_params(c, v);
  std::map<int, const FitResult*> docs;
  for (int m : c.months) docs[m] = &params_for(params, m, v);

  const auto reps = static_cast<std::size_t>(c.replicates);
  std::vector<nlohmann::json> drawn(reps);
  parallel_for(reps, c.threads, [&](std::size_t r) {
    SeasonalParams sp;
    nlohmann::json used = nlohmann::json::object();
    for (int m : c.months) {
      const auto p = replicate_params(c, *docs[m], r, m);
      sp[static_cast<std::size_t>(m - 1)] = validated(p, c);
      used[two_digits(m)] = to_json(ParamDocument{p, m}).at("params");
    }
    const auto rec = simulate_record(sp, c.law, c.dep, c.first_year, c.years, c.seed, r, {}, false);
    char name[32];
    std::snprintf(name, sizeof name, "sim_r%03zu.csv", r);
    auto comments = provenance_lines(c);
    comments.push_back("replicate=" + std::to_string(r) + " params=" + used.dump());
    std::ostringstream out;
    write_series(out, rec, comments);
    write_atomic(c.out / name, out.str());
    drawn[r] = {{"file", name}, {"replicate", r}, {"params", used}};
  });
  write_json(c.out / "simulate_manifest.json", {{"provenance", provenance(c)}, {"replicates", drawn}});
  return 0;
}

int cmd_validate(const RunConfig& c) {
  const Variant v = c.model();
  const auto rec = load_data(c);
  const auto params = load_params(c, v);
  for (int m : c.months) params_for(params, m, v);

  struct Row {
    std::string property;
    double h, observed, modeled, se;
  };
  std::vector<std::vector<Row>> rows(c.months.size());
  std::vector<std::string> errors(c.months.size());

  parallel_for(c.months.size(), c.threads, [&](std::size_t i) {
    const int m = c.months[i];
    try {
      const auto& doc = params_for(params, m, v);
      const auto vp = validated(doc.theta, c);
      std::vector<MonthBlock> obs;
      for (auto& b : month_blocks(rec, m)) {
        if (b.missing_fraction <= c.max_missing_fraction) obs.push_back(std::move(b));
      }
      if (obs.empty()) throw Error(ErrorCode::InsufficientYears, "month", "no usable observation years");
      const int sim_years = c.replicates * static_cast<int>(obs.size());
      const auto sim = simulate_month_blocks(vp, c.law, c.dep, m, sim_years, c.seed, kValidateStream, c.first_year);

      // pooled wet/dry probability and the SE of its per-year spread
      auto wet_dry = [&](const std::vector<MonthBlock>& blocks, std::size_t factor) {
        WetDryAccumulator all(c.threshold_mm);
        std::array<std::vector<double>, 3> per_year;
        for (const auto& b : blocks) {
          const auto bins = aggregate_bins(b.depths, factor);
          all.add_block(bins);
          const auto y = wet_dry_from_bins(bins, c.threshold_mm);
          per_year[0].push_back(y.p_dry);
          if (y.p_ww) per_year[1].push_back(*y.p_ww);
          if (y.p_dd) per_year[2].push_back(*y.p_dd);
        }
        const auto r = all.result();
        std::array<std::pair<double, double>, 3> out;
        const std::array<std::optional<double>, 3> vals{r.p_dry, r.p_ww, r.p_dd};
        for (std::size_t k = 0; k < 3; ++k) {
          const auto& x = per_year[k];
          double se = std::numeric_limits<double>::quiet_NaN();
          if (x.size() >= 2) {
            double mean = 0.0, var = 0.0;
            for (double a : x) mean += a / static_cast<double>(x.size());
            for (double a : x) var += (a - mean) * (a - mean);
            se = std::sqrt(var / static_cast<double>(x.size() - 1) / static_cast<double>(x.size()));
          }
          out[k] = {vals[k].value_or(std::numeric_limits<double>::quiet_NaN()), se};
        }
        return out;
      };
      static const char* kWetDry[] = {"p_dry", "p_ww", "p_dd"};
      for (double h : c.timescales) {
        const auto o = wet_dry(obs, factor_of(h));
        const auto s = wet_dry(sim, factor_of(h));
        for (std::size_t k = 0; k < 3; ++k) {
          rows[i].push_back({kWetDry[k], h, o[k].first, s[k].first, std::hypot(o[k].second, s[k].second)});
        }
      }
      // fitted moments: observed statistics against the model's
      const auto sv = monthly_statistics(std::span<const MonthBlock>(obs), m, stats_options(c));
      std::vector<double> tau;
      std::vector<double> tau_var(kPropertyCount, 0.0);
      if (has_closed_form(v)) {
        const auto t = model_fitting_properties(vp.params(), c.law, c.dep).to_array();
        tau.assign(t.begin(), t.end());
      } else {
        const auto st = monthly_statistics(std::span<const MonthBlock>(sim), m, stats_options(c));
        tau = st.values;
        tau_var = st.variances;
      }
      const auto names = property_names();
      for (std::size_t k = 0; k < kPropertyCount; ++k) {
        const double h = k == 0 ? 1.0 : kTimescales[(k - 1) / 3];
        std::string prop(names[k]);
        prop = prop.substr(0, prop.find('_'));
        rows[i].push_back({prop, h, sv.values[k], tau[k], std::sqrt(sv.variances[k] + tau_var[k])});
      }
    } catch (const InputError&) {
      throw;
    } catch (const Error& e) {
      errors[i] = e.what();
    }
  });

  std::ostringstream csv;
  csv << csv_preamble(c) << "month,property,h,observed,modeled,difference,se,z\n";
  int failed = 0;
  for (std::size_t i = 0; i < c.months.size(); ++i) {
    if (!errors[i].empty()) {
      ++failed;
      std::cerr << "month " << c.months[i] << ": " << errors[i] << '\n';
      csv << c.months[i] << ",failed,,,,,,\n";
      continue;
    }
    for (const auto& r : rows[i]) {
      const double d = r.modeled - r.observed;
      csv << c.months[i] << ',' << r.property << ',' << num(r.h) << ',' << num(r.observed) << ',' << num(r.modeled)
          << ',' << num(d) << ',' << num(r.se) << ',' << num(r.se > 0 ? d / r.se : std::nan("")) << '\n';
    }
  }
  write_atomic(c.out / ("validate_" + std::string(to_string(v)) + ".csv"), csv.str());
  return failed ? 1 : 0;
}

int cmd_extremes(const RunConfig& c) {
  const Variant v = c.model();
  const auto rec = load_data(c);
  const auto params = load_params(c, v);
  const double h = c.extremes_h;
  const int month = c.extremes_month;
  AnnualMaxima observed;
  try {
    observed = annual_maxima(rec, h, month, c.max_missing_fraction);
  } catch (const Error& e) {
    throw InputError(e.what());
  }
  std::vector<int> months;
  if (month == 0) {
    for (int m = 1; m <= 12; ++m) months.push_back(m);
  } else {
    months.push_back(month);
  }
  std::map<int, const FitResult*> docs;
  for (int m : months) docs[m] = &params_for(params, m, v);

  const std::size_t n = observed.maxima.size();
  const std::size_t factor = factor_of(h);
  const auto reps = static_cast<std::size_t>(c.replicates);
  std::vector<std::vector<double>> sim(reps);
  parallel_for(reps, c.threads, [&](std::size_t r) {
    std::vector<double> year_max(n, 0.0);
    for (int m : months) {
      const auto p = replicate_params(c, *docs[m], r, m);
      const auto blocks = simulate_month_blocks(validated(p, c), c.law, c.dep, m, static_cast<int>(n), c.seed,
                                                kExtremesStream + r, c.first_year);
      for (std::size_t y = 0; y < n; ++y) year_max[y] = std::max(year_max[y], block_maximum(blocks[y].depths, factor));
    }
    std::sort(year_max.begin(), year_max.end());
    sim[r] = std::move(year_max);
  });

  const auto points = gumbel_plot(observed.maxima);
  std::ostringstream csv;
  csv << csv_preamble(c) << "# h=" << num(h) << " month=" << month << " years=" << n << '\n'
      << "rank,probability,return_period,reduced_variate,observed,sim_q025,sim_q50,sim_q975\n";
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> at_rank;
    for (const auto& s : sim) at_rank.push_back(s[i]);
    std::sort(at_rank.begin(), at_rank.end());
    const auto& p = points[i];
    csv << p.rank << ',' << num(p.probability) << ',' << num(p.return_period) << ',' << num(p.reduced_variate) << ','
        << num(p.value) << ',' << num(quantile_sorted(at_rank, 0.025)) << ',' << num(quantile_sorted(at_rank, 0.5))
        << ',' << num(quantile_sorted(at_rank, 0.975)) << '\n';
  }
  write_atomic(c.out / ("extremes_" + std::string(to_string(v)) + ".csv"), csv.str());
  return 0;
}

}  // namespace blrain::cli
