#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "blrain/empirical.hpp"
#include "blrain/fitter.hpp"
#include "blrain/model.hpp"
#include "json.hpp"

namespace blrain::cli {

/// Thrown for unusable input (bad config, missing or malformed files);
/// maps to exit code 2.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Everything a command needs, resolved from the config file and flags.
struct RunConfig {
  std::string command;
  std::filesystem::path data;        // gauge CSV
  std::filesystem::path statistics;  // directory of stats_MM.json
  std::filesystem::path params;      // parameter or fit document(s), or "reference"
  std::filesystem::path out = "out";
  std::vector<Variant> models{Variant::BLRPR_X};
  IntensityLaw law{};
  PulseDepthDependence dep = PulseDepthDependence::Common;
  double alpha_min = 1.0;
  std::map<std::string, double> fixed;
  bool fixed_given = false;
  std::vector<double> timescales{1.0 / 12.0, 1.0, 6.0, 24.0};
  std::vector<int> months{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12};
  std::uint64_t seed = 0;
  int replicates = 1;
  int years = 1;
  int first_year = 2001;
  double threshold_mm = 0.0;
  AveragingMode averaging = AveragingMode::PerYear;
  double max_missing_fraction = 0.05;
  std::string start = "reference";  // or a parameter document path
  FitOptions fit{};
  bool profile = true;
  bool ci_adjust = true;
  bool uncertainty = false;
  unsigned threads = 0;
  double extremes_h = 1.0;
  int extremes_month = 0;  // 0 = annual maxima

  Variant model() const { return models.front(); }
  /// Resolved configuration, recorded in every output.
  nlohmann::json to_json() const;
  /// Fixed parameters for `v`: the configured ones, or mu_x = 0.001 for
  /// BLIPR when none are configured.
  std::map<std::string, double> fixed_for(Variant v) const;
};

/// Flag values; unset ones leave the config file value in place.
struct FlagOverrides {
  std::optional<std::string> config;
  std::optional<std::string> model;
  std::optional<std::string> months;
  std::optional<std::uint64_t> seed;
  std::optional<double> alpha_min;
  bool uncertainty = false;
  std::optional<int> replicates;
  std::optional<std::string> out;
  std::optional<std::string> data;
  std::optional<std::string> params;
  std::optional<std::string> statistics;
  std::optional<int> years;
  std::optional<unsigned> threads;
};

RunConfig resolve_config(const std::string& command, const FlagOverrides& flags);

/// "1,7", "1-3,12" or "all".
std::vector<int> parse_months(const std::string& text);

}  // namespace blrain::cli
