#include <iostream>

#include "CLI11.hpp"
#include "blrain/error.hpp"
#include "cli_commands.hpp"

using namespace blrain::cli;

namespace {

void add_shared(CLI::App* sub, FlagOverrides& f) {
  sub->add_option("--config", f.config, "JSON run configuration");
  sub->add_option("--model", f.model, "model variant(s), comma separated");
  sub->add_option("--months", f.months, "months: 1,7 or 1-3,12 or all");
  sub->add_option("--seed", f.seed, "base RNG seed");
  sub->add_option("--alpha-min", f.alpha_min, "lower bound on alpha");
  sub->add_flag("--uncertainty", f.uncertainty, "draw parameters from the fit covariance");
  sub->add_option("--replicates", f.replicates, "number of simulated replicates");
  sub->add_option("--out", f.out, "output directory");
  sub->add_option("--data", f.data, "gauge CSV");
  sub->add_option("--params", f.params, "parameter or fit document, or a directory of them");
  sub->add_option("--statistics", f.statistics, "directory of stats_MM.json");
  sub->add_option("--years", f.years, "simulated years");
  sub->add_option("--threads", f.threads, "worker threads (0 = all cores)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bartlett-Lewis rainfall model toolkit"};
  app.require_subcommand(1);
  FlagOverrides flags;
  const std::vector<std::pair<const char*, const char*>> commands = {
      {"stats", "monthly fitting statistics from a gauge record"},
      {"fit", "fit model parameters to monthly statistics"},
      {"profile", "profile likelihood intervals for fitted parameters"},
      {"simulate", "synthetic 5-minute records"},
      {"validate", "compare wet/dry and moment properties with observations"},
      {"extremes", "annual maxima against simulated envelopes"},
  };
  for (const auto& [name, help] : commands) add_shared(app.add_subcommand(name, help), flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    const auto config = resolve_config(command, flags);
    if (command == "stats") return cmd_stats(config);
    if (command == "fit") return cmd_fit(config);
    if (command == "profile") return cmd_profile(config);
    if (command == "simulate") return cmd_simulate(config);
    if (command == "validate") return cmd_validate(config);
    if (command == "extremes") return cmd_extremes(config);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const blrain::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.code() == blrain::ErrorCode::IoError || e.code() == blrain::ErrorCode::ParseError ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
