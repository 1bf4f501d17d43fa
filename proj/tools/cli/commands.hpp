#pragma once

// Subcommand implementations and the command-line entry point.

#include <ostream>
#include <string>
#include <vector>

#include "cli/config.hpp"
#include "cli/report.hpp"

namespace platoon::cli {

enum ExitCode : int { kOk = 0, kFailure = 1, kConfigError = 2, kDomainError = 3 };

Report cmd_spectrum(const RunConfig& cfg);
Report cmd_stability(const RunConfig& cfg);
Report cmd_risk(const RunConfig& cfg);
Report cmd_joint_risk(const RunConfig& cfg);
Report cmd_limits(const RunConfig& cfg);
Report cmd_tradeoff(const RunConfig& cfg);
Report cmd_sweep(const RunConfig& cfg);
Report cmd_fit_approx(const RunConfig& cfg);
/// Closed form vs Monte Carlo; the "all_passed" summary entry is 1 or 0.
Report cmd_validate(const RunConfig& cfg);

/// Column-name fragment for an event, e.g. "collision_eps0.01".
std::string event_label(const EventSpec& spec);

/// Parses `args` (without the program name), runs the subcommand and returns
/// the process exit code. Reports go to `out` unless --out is given.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace platoon::cli
