#pragma once

#include <string>
#include <vector>

#include "sbsvie/run_config.hpp"

namespace sbsvie {

// process exit codes of the CLI contract
enum ExitCode : int {
    exit_ok = 0,
    exit_diverged = 2,
    exit_assumption = 3,
    exit_usage = 64,
};

// solve a scenario, write solution/trace/audit artifacts under cfg.out_dir
int run_solve(const RunConfig& cfg);
// sweep N, M or alpha and write a convergence table
int run_study(const RunConfig& cfg);
// assumption checks, constants, bound audits; writes audits.json
int run_audit(const RunConfig& cfg);
// export the path ensemble as columnar CSV
int run_paths(const RunConfig& cfg);
// list scenarios (optionally filtered by tag) to stdout
int run_list(const RunConfig& cfg);

// Resolution order: defaults, then the scenario's preferred values, then the
// flat key = value config file, then explicit flags (`provided` holds the long
// names of user-supplied options). Throws std::invalid_argument for an
// unreadable file or an unknown key.
RunConfig resolve_config(const RunConfig& flags, const std::vector<std::string>& provided,
                         const std::string& config_path);

} // namespace sbsvie
