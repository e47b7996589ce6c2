#pragma once

// Executes a resolved RunConfig: solves, simulates, estimates, sweeps; writes
// comma-separated artifact tables plus a JSON run manifest into the output
// directory.  Exit codes: 0 success, 1 a requested check ran and failed
// (oracle-check misses its tolerance), 2 configuration/validation failure,
// 3 solver divergence.

#include <iosfwd>

#include "algae/runconfig.hpp"

namespace algae {

inline constexpr const char* kToolVersion = "1.0.0";
// closed-form oracle acceptance band (max relative slope error)
inline constexpr double kOracleTol = 0.02;

// Runs the mode, writing artifacts and diagnostics; errors are reported on
// err (standard error by default) and folded into the exit code.
int run(const RunConfig& cfg, bool quiet = false, std::ostream* err = nullptr);

// Full command-line entry point (argument parsing + config resolution + run);
// the algaectl binary forwards to this, and tests drive it in-process.
int cli_main(int argc, const char* const* argv);

}  // namespace algae
