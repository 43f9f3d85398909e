#pragma once

#include <string>

#include "bayespred/run_config.hpp"

namespace bayespred {

/// Runs one subcommand and returns its table. `threads` only affects speed.
/// Errors on a grid point are rethrown with the point named.
Table run_command(const RunConfig& config, unsigned threads);

Table cmd_risk(const RunConfig& config, unsigned threads);
Table cmd_alpha_search(const RunConfig& config);
Table cmd_expansion_check(const RunConfig& config, unsigned threads);
Table cmd_dominance(const RunConfig& config, unsigned threads);
Table cmd_laplacian_scan(const RunConfig& config);
Table cmd_identities(const RunConfig& config, unsigned threads);

/// Subcommands that draw random numbers under this config and so need --seed.
bool needs_seed(const RunConfig& config);

/// Components joined by ','.
std::string format_point(const Vector& v);

}  // namespace bayespred
