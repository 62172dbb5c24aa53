#include "cli_config.hpp"

#include <fstream>
#include <sstream>

#include "blrain/error.hpp"

namespace blrain::cli {

namespace {

std::string_view averaging_name(AveragingMode m) { return m == AveragingMode::Pooled ? "pooled" : "per_year"; }

std::filesystem::path resolve_path(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  if (path.is_absolute() || base.empty()) return path;
  return (base / path).lexically_normal();
}

std::vector<Variant> parse_models(const std::string& text) {
  std::vector<Variant> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(parse_variant(item));
  }
  if (out.empty()) throw InputError("no model given");
  return out;
}

template <class T>
void read_if(const nlohmann::json& j, const char* key, T& target) {
  if (j.contains(key)) target = j.at(key).get<T>();
}

void apply_json(RunConfig& c, const nlohmann::json& j, const std::filesystem::path& base) {
  static const std::vector<std::string> kKnown = {
      "data",      "statistics", "params",   "output",       "model",        "intensity",  "pulse_depths",
      "alpha_min", "fixed",      "timescales", "months",     "seed",         "replicates", "years",
      "first_year", "threshold_mm", "averaging", "max_missing_fraction", "start", "fit", "profile",
      "ci_adjustment", "uncertainty", "threads", "extremes"};
  for (const auto& [key, value] : j.items()) {
    if (std::find(kKnown.begin(), kKnown.end(), key) == kKnown.end()) {
      throw InputError("unknown config key '" + key + "'");
    }
  }
  if (j.contains("data")) c.data = resolve_path(base, j.at("data").get<std::string>());
  if (j.contains("statistics")) c.statistics = resolve_path(base, j.at("statistics").get<std::string>());
  if (j.contains("params")) {
    const auto s = j.at("params").get<std::string>();
    c.params = s == "reference" ? std::filesystem::path(s) : resolve_path(base, s);
  }
  if (j.contains("output")) c.out = resolve_path(base, j.at("output").get<std::string>());
  if (j.contains("model")) {
    const auto& m = j.at("model");
    if (m.is_array()) {
      c.models.clear();
      for (const auto& x : m) c.models.push_back(parse_variant(x.get<std::string>()));
    } else {
      c.models = parse_models(m.get<std::string>());
    }
  }
  if (j.contains("intensity")) {
    const auto& in = j.at("intensity");
    c.law.family = parse_intensity_family(in.value("family", std::string("exponential")));
    c.law.shape = in.value("shape", 1.0);
  }
  if (j.contains("pulse_depths")) c.dep = parse_dependence(j.at("pulse_depths").get<std::string>());
  read_if(j, "alpha_min", c.alpha_min);
  if (j.contains("fixed")) {
    c.fixed = j.at("fixed").get<std::map<std::string, double>>();
    c.fixed_given = true;
  }
  read_if(j, "timescales", c.timescales);
  // values such as 0.0833333 snap to the 5-minute lattice
  for (double& h : c.timescales) {
    const double f = std::round(h * 12.0);
    if (std::abs(h * 12.0 - f) <= 1e-6) h = f / 12.0;
  }
  if (j.contains("months")) {
    const auto& m = j.at("months");
    c.months = m.is_string() ? parse_months(m.get<std::string>()) : m.get<std::vector<int>>();
  }
  read_if(j, "seed", c.seed);
  read_if(j, "replicates", c.replicates);
  read_if(j, "years", c.years);
  read_if(j, "first_year", c.first_year);
  read_if(j, "threshold_mm", c.threshold_mm);
  if (j.contains("averaging")) {
    const auto a = j.at("averaging").get<std::string>();
    if (a == "per_year") {
      c.averaging = AveragingMode::PerYear;
    } else if (a == "pooled") {
      c.averaging = AveragingMode::Pooled;
    } else {
      throw InputError("averaging must be 'per_year' or 'pooled'");
    }
  }
  read_if(j, "max_missing_fraction", c.max_missing_fraction);
  if (j.contains("start")) {
    const auto s = j.at("start").get<std::string>();
    c.start = s == "reference" ? s : resolve_path(base, s).string();
  }
  if (j.contains("fit")) {
    const auto& f = j.at("fit");
    read_if(f, "starts", c.fit.n_starts);
    read_if(f, "sigma", c.fit.perturb_sigma);
    read_if(f, "refinements", c.fit.n_refine);
    read_if(f, "tolerance", c.fit.rel_tol);
    read_if(f, "max_iter", c.fit.max_iter);
    read_if(f, "project_start", c.fit.project_start);
  }
  read_if(j, "profile", c.profile);
  if (j.contains("ci_adjustment")) {
    const auto a = j.at("ci_adjustment").get<std::string>();
    if (a != "sandwich" && a != "none") throw InputError("ci_adjustment must be 'sandwich' or 'none'");
    c.ci_adjust = a == "sandwich";
  }
  read_if(j, "uncertainty", c.uncertainty);
  read_if(j, "threads", c.threads);
  if (j.contains("extremes")) {
    const auto& e = j.at("extremes");
    read_if(e, "h", c.extremes_h);
    read_if(e, "month", c.extremes_month);
  }
}

void check(const RunConfig& c) {
  for (int m : c.months) {
    if (m < 1 || m > 12) throw InputError("month " + std::to_string(m) + " is not in 1..12");
  }
  if (c.months.empty()) throw InputError("no months selected");
  if (c.replicates < 1) throw InputError("replicates must be at least 1");
  if (c.years < 1) throw InputError("years must be at least 1");
  if (!(c.alpha_min >= 0.0)) throw InputError("alpha_min must be non-negative");
  if (c.extremes_month < 0 || c.extremes_month > 12) throw InputError("extremes.month must be 0..12");
  for (double h : c.timescales) {
    const double f = h * 12.0;
    if (!(std::round(f) >= 1.0) || std::abs(f - std::round(f)) > 1e-6) {
      throw InputError("timescales must be positive multiples of 5 minutes");
    }
  }
}

}  // namespace

std::vector<int> parse_months(const std::string& text) {
  if (text == "all") return {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12};
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  try {
    while (std::getline(ss, item, ',')) {
      const auto dash = item.find('-');
      if (dash == std::string::npos) {
        out.push_back(std::stoi(item));
      } else {
        const int a = std::stoi(item.substr(0, dash)), b = std::stoi(item.substr(dash + 1));
        for (int m = a; m <= b; ++m) out.push_back(m);
      }
    }
  } catch (const std::exception&) {
    throw InputError("cannot parse months '" + text + "'");
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::map<std::string, double> RunConfig::fixed_for(Variant v) const {
  if (fixed_given) {
    std::map<std::string, double> out;
    for (const auto& [k, x] : fixed) {
      if (field_index(v, k)) out[k] = x;
    }
    return out;
  }
  if (v == Variant::BLIPR) return {{"mu_x", 0.001}};
  return {};
}

nlohmann::json RunConfig::to_json() const {
  nlohmann::json models_j = nlohmann::json::array();
  for (auto v : models) models_j.push_back(std::string(to_string(v)));
  return {
      {"command", command},
      {"data", data.string()},
      {"statistics", statistics.string()},
      {"params", params.string()},
      {"output", out.string()},
      {"model", models_j},
      {"intensity", {{"family", std::string(to_string(law.family))}, {"shape", law.shape}}},
      {"pulse_depths", std::string(to_string(dep))},
      {"alpha_min", alpha_min},
      {"fixed", fixed},
      {"timescales", timescales},
      {"months", months},
      {"seed", seed},
      {"replicates", replicates},
      {"years", years},
      {"first_year", first_year},
      {"threshold_mm", threshold_mm},
      {"averaging", std::string(averaging_name(averaging))},
      {"max_missing_fraction", max_missing_fraction},
      {"start", start},
      {"fit",
       {{"starts", fit.n_starts},
        {"sigma", fit.perturb_sigma},
        {"refinements", fit.n_refine},
        {"tolerance", fit.rel_tol},
        {"max_iter", fit.max_iter},
        {"project_start", fit.project_start}}},
      {"profile", profile},
      {"ci_adjustment", ci_adjust ? "sandwich" : "none"},
      {"uncertainty", uncertainty},
      {"extremes", {{"h", extremes_h}, {"month", extremes_month}}},
  };
}

RunConfig resolve_config(const std::string& command, const FlagOverrides& flags) {
  RunConfig c;
  c.command = command;
  try {
    if (flags.config) {
      const std::filesystem::path path(*flags.config);
      std::ifstream in(path);
      if (!in) throw InputError("cannot open config '" + path.string() + "'");
      nlohmann::json j;
      try {
        in >> j;
      } catch (const nlohmann::json::exception& e) {
        throw InputError("config '" + path.string() + "' is not valid JSON: " + e.what());
      }
      apply_json(c, j, path.parent_path());
    }
    if (flags.model) c.models = parse_models(*flags.model);
    if (flags.months) c.months = parse_months(*flags.months);
    if (flags.seed) c.seed = *flags.seed;
    if (flags.alpha_min) c.alpha_min = *flags.alpha_min;
    if (flags.uncertainty) c.uncertainty = true;
    if (flags.replicates) c.replicates = *flags.replicates;
    if (flags.out) c.out = *flags.out;
    if (flags.data) c.data = *flags.data;
    if (flags.params) c.params = *flags.params;
    if (flags.statistics) c.statistics = *flags.statistics;
    if (flags.years) c.years = *flags.years;
    if (flags.threads) c.threads = *flags.threads;
  } catch (const Error& e) {
    throw InputError(e.what());
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("bad config value: ") + e.what());
  }
  c.fit.seed = c.seed;
  check(c);
  return c;
}

}  // namespace blrain::cli
