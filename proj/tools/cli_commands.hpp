#pragma once

#include "cli_config.hpp"

namespace blrain::cli {

/// Each command returns its exit code: 0 success, 1 when some months or
/// replicates failed. Input problems throw InputError.
int cmd_stats(const RunConfig& c);
int cmd_fit(const RunConfig& c);
int cmd_profile(const RunConfig& c);
int cmd_simulate(const RunConfig& c);
int cmd_validate(const RunConfig& c);
int cmd_extremes(const RunConfig& c);

}  // namespace blrain::cli
