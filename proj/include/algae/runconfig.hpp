#pragma once

// Run configuration for the batch front end: a flat key-value file (or a JSON
// mirror with the same nested names) resolved into one immutable RunConfig.
// Parsing is strict: unknown keys, malformed values, and missing mode-required
// keys are rejected with the offending field path in the message.  The
// canonical key set of a resolved config is hashed (FNV-1a, 64-bit) and every
// artifact names that hash.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "algae/hjb.hpp"
#include "algae/model.hpp"
#include "algae/reduced.hpp"

namespace algae {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class RunMode {
  solve_flexible,
  solve_inflexible,
  voi,
  simulate,
  estimate_chain,
  oracle_check,
  sweep,
};

std::string to_string(RunMode mode);
RunMode run_mode_from(const std::string& name);  // throws ConfigError

// Where the regime chain comes from: the synthetic birth-death ladder, a rate
// matrix file (the estimator's output format), or discharges + rates inline.
struct ChainSpec {
  enum class Source { synthetic, file, inline_matrix };
  Source source = Source::synthetic;
  // synthetic ladder (defaults give the 41-regime configuration)
  int top = 40;
  double q0 = 0.5, dq = 1.25, up0 = 0.3, up_decay = 0.15, down = 0.5;
  std::string file;
  std::vector<double> discharge;  // inline
  std::vector<double> rates;      // inline, row-major (top+1)^2

  RegimeChain build() const;  // throws on malformed data / unreadable file
};

struct SimSpec {
  int start_regime = 0;
  double start_population = 0.5;
  double horizon = 100.0;
  long paths = 100000;
  std::string policy = "field";      // field | constant
  std::string system = "flexible";   // flexible | inflexible
  bool cut = false, dense = false;   // constant-policy actions
  bool event_log = false;            // write the first path's event log
  bool use_rk4 = false;
  double substep = 1e-3;
};

struct EstimateSpec {
  std::string input;            // discharge series file
  int regimes = 0;              // size of the default discharge grid ...
  std::vector<double> levels;   // ... unless explicit levels are given
  double sample_interval = 0.0; // days; 0 infers the minimum spacing
};

struct SweepSpec {
  std::string axis;             // a model.* or grid.* key, e.g. model.P
  std::vector<double> values;
  std::string mode = "voi";     // voi | solve-flexible | solve-inflexible
};

struct RunConfig {
  RunMode mode = RunMode::solve_flexible;
  ModelParams model;
  ChainSpec chain;
  Grid grid;
  SimSpec sim;
  ReducedParams reduced;
  int reduced_nodes = 401;
  EstimateSpec est;
  SweepSpec sweep;
  std::uint64_t seed = 1;
  std::string out_dir = ".";
  int threads = 0;  // command-line only; not part of the canonical keys
};

using KeyValues = std::map<std::string, std::string>;

// "key = value" lines, '#' comments, duplicates rejected; origin names the
// source in error messages.
KeyValues parse_flat_config(std::istream& in, const std::string& origin);
// Dispatches on the .json extension; JSON objects flatten with '.' separators
// and numeric arrays become space-separated lists.
KeyValues load_config_keys(const std::string& path);

// Strict resolution: consumes exactly the keys the mode uses.  "mode" must be
// present (the CLI injects the subcommand's mode when the file omits it).
RunConfig config_from_keys(const KeyValues& kv);

// Sets one model.* or grid.* field by key path; throws ConfigError for
// unsupported axes.  Used by sweep mode.
void apply_sweep_axis(RunConfig& cfg, const std::string& axis, double value);

// The resolved keys the run depends on, in sorted order; input of the hash
// and of write_config.  config_from_keys(canonical_keys(c)) reproduces c.
KeyValues canonical_keys(const RunConfig& cfg);

std::uint64_t config_hash(const KeyValues& keys);  // FNV-1a 64 over "k=v\n"
std::string config_hash_hex(const RunConfig& cfg);

void write_config(std::ostream& out, const RunConfig& cfg);

// The full-resolution baseline configuration: the 41-regime synthetic ladder,
// N = 401, dt = 3e-4, T = 365/4, mode solve-flexible.
RunConfig default_run_config();

}  // namespace algae
