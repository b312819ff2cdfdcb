#pragma once

#include <iosfwd>
#include <string>

#include "layercon/config.hpp"

namespace layercon {

enum ExitCode : int { exit_ok = 0, exit_config = 1, exit_runtime = 2, exit_verify = 3 };

struct CommandOptions {
  std::string config;  // path; empty selects default_config() for eigen and steady
  std::string out;     // overrides output.directory
  std::string resume;  // checkpoint to continue from (run only)
  bool quiet = false;
};

/// Two layers of thickness 1/2, bD = 1 over bD = 2, C0 = 0, C1 = 1, no
/// buoyancy.
RunConfig default_config();

/// eigen: spectrum.csv and eigenfunctions_m0.csv.
/// steady: steady.csv.
/// run: config.resolved, timeseries.csv, snapshot_<step>.vtk,
///      checkpoint_<step>.chk and summary.json, as selected by output.formats.
/// verify: the acceptance suite plus trajectory checks on the configured
///      run, written to verify.json.
/// Returns an ExitCode; errors are reported on `err`, progress on `log`.
int run_command(const std::string& name, const CommandOptions& options, std::ostream& log, std::ostream& err);

}  // namespace layercon
