#include "algae/runconfig.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "algae/estimator.hpp"

namespace algae {
namespace {

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string join17(const std::vector<double>& vs) {
  std::string out;
  for (std::size_t k = 0; k < vs.size(); ++k) {
    if (k) out += ' ';
    out += fmt17(vs[k]);
  }
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void fail(const std::string& msg) { throw ConfigError(msg); }

double parse_number(const std::string& key, const std::string& value) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(value.c_str(), &end);
  if (end == value.c_str() || *end != '\0' || errno == ERANGE)
    fail(key + ": expected a number, got '" + value + "'");
  return v;
}

long parse_integer(const std::string& key, const std::string& value) {
  errno = 0;
  char* end = nullptr;
  const long v = std::strtol(value.c_str(), &end, 10);
  if (end == value.c_str() || *end != '\0' || errno == ERANGE)
    fail(key + ": expected an integer, got '" + value + "'");
  return v;
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  errno = 0;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(value.c_str(), &end, 10);
  if (end == value.c_str() || *end != '\0' || errno == ERANGE || value.find('-') != std::string::npos)
    fail(key + ": expected an unsigned integer, got '" + value + "'");
  return v;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  fail(key + ": expected true or false, got '" + value + "'");
}

std::vector<double> parse_list(const std::string& key, const std::string& value) {
  std::istringstream is(value);
  std::vector<double> vs;
  std::string tok;
  while (is >> tok) vs.push_back(parse_number(key, tok));
  if (vs.empty()) fail(key + ": expected a space-separated list of numbers");
  return vs;
}

// Tracks which keys a mode consumed so leftovers can be rejected.
struct Reader {
  const KeyValues& kv;
  std::set<std::string> used;
  std::string mode_name;

  const std::string* find(const std::string& key) {
    const auto it = kv.find(key);
    if (it == kv.end()) return nullptr;
    used.insert(key);
    return &it->second;
  }
  const std::string& require(const std::string& key) {
    const std::string* v = find(key);
    if (!v) fail(key + ": required for mode " + mode_name);
    return *v;
  }
  double number(const std::string& key) { return parse_number(key, require(key)); }
  double number_or(const std::string& key, double fallback) {
    const std::string* v = find(key);
    return v ? parse_number(key, *v) : fallback;
  }
  long integer(const std::string& key) { return parse_integer(key, require(key)); }
  long integer_or(const std::string& key, long fallback) {
    const std::string* v = find(key);
    return v ? parse_integer(key, *v) : fallback;
  }
  bool flag_or(const std::string& key, bool fallback) {
    const std::string* v = find(key);
    return v ? parse_bool(key, *v) : fallback;
  }
  std::string text_or(const std::string& key, const std::string& fallback) {
    const std::string* v = find(key);
    return v ? *v : fallback;
  }
};

bool needs_model(RunMode m) { return m != RunMode::estimate_chain && m != RunMode::oracle_check; }

bool needs_grid(const RunConfig& c) {
  switch (c.mode) {
    case RunMode::solve_flexible:
    case RunMode::solve_inflexible:
    case RunMode::voi:
    case RunMode::sweep:
      return true;
    case RunMode::simulate:
      return c.sim.policy == "field";
    default:
      return false;
  }
}

void flatten_json(const nlohmann::json& node, const std::string& prefix, KeyValues& out) {
  if (node.is_object()) {
    for (const auto& [k, v] : node.items()) {
      const std::string key = prefix.empty() ? k : prefix + "." + k;
      flatten_json(v, key, out);
    }
    return;
  }
  std::string value;
  if (node.is_string()) {
    value = node.get<std::string>();
  } else if (node.is_boolean()) {
    value = node.get<bool>() ? "true" : "false";
  } else if (node.is_number_integer()) {
    value = std::to_string(node.get<long long>());
  } else if (node.is_number_unsigned()) {
    value = std::to_string(node.get<unsigned long long>());
  } else if (node.is_number_float()) {
    value = fmt17(node.get<double>());
  } else if (node.is_array()) {
    std::vector<double> vs;
    for (const auto& el : node) {
      if (!el.is_number()) fail(prefix + ": arrays must contain numbers only");
      vs.push_back(el.get<double>());
    }
    value = join17(vs);
  } else {
    fail(prefix + ": unsupported value type in JSON config");
  }
  if (!out.emplace(prefix, value).second) fail(prefix + ": duplicate key");
}

}  // namespace

std::string to_string(RunMode mode) {
  switch (mode) {
    case RunMode::solve_flexible: return "solve-flexible";
    case RunMode::solve_inflexible: return "solve-inflexible";
    case RunMode::voi: return "voi";
    case RunMode::simulate: return "simulate";
    case RunMode::estimate_chain: return "estimate-chain";
    case RunMode::oracle_check: return "oracle-check";
    case RunMode::sweep: return "sweep";
  }
  return "unknown";
}

RunMode run_mode_from(const std::string& name) {
  for (RunMode m : {RunMode::solve_flexible, RunMode::solve_inflexible, RunMode::voi,
                    RunMode::simulate, RunMode::estimate_chain, RunMode::oracle_check,
                    RunMode::sweep}) {
    if (to_string(m) == name) return m;
  }
  fail("mode: unknown mode '" + name + "'");
}

RegimeChain ChainSpec::build() const {
  switch (source) {
    case Source::synthetic:
      return birth_death_chain(top, q0, dq, up0, up_decay, down);
    case Source::file:
      return load_chain_matrix(file);
    case Source::inline_matrix: {
      RegimeChain c;
      c.discharge = discharge;
      c.switch_rate = rates;
      const std::size_t n = discharge.size();
      if (rates.size() != n * n)
        fail("chain.rates: expected " + std::to_string(n * n) + " entries for " +
             std::to_string(n) + " regimes, got " + std::to_string(rates.size()));
      for (std::size_t i = 0; i < n; ++i) c.switch_rate[i * n + i] = 0.0;
      c.validate();
      return c;
    }
  }
  fail("chain.source: unknown source");
}

KeyValues parse_flat_config(std::istream& in, const std::string& origin) {
  KeyValues kv;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      fail(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty()) fail(origin + ":" + std::to_string(lineno) + ": empty key");
    if (!kv.emplace(key, value).second)
      fail(origin + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
  }
  return kv;
}

KeyValues load_config_keys(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open config: " + path);
  if (path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0) {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      fail(path + ": " + e.what());
    }
    if (!doc.is_object()) fail(path + ": top-level JSON value must be an object");
    KeyValues kv;
    flatten_json(doc, "", kv);
    return kv;
  }
  return parse_flat_config(in, path);
}

RunConfig config_from_keys(const KeyValues& kv) {
  Reader r{kv, {}, ""};
  RunConfig cfg;

  const std::string* mode = r.find("mode");
  if (!mode) fail("mode: required (one of solve-flexible, solve-inflexible, voi, simulate, estimate-chain, oracle-check, sweep)");
  cfg.mode = run_mode_from(*mode);
  r.mode_name = to_string(cfg.mode);

  cfg.seed = r.find("seed") ? parse_u64("seed", kv.at("seed")) : cfg.seed;
  cfg.out_dir = r.text_or("output.dir", cfg.out_dir);

  if (cfg.mode == RunMode::simulate) {
    SimSpec& s = cfg.sim;
    s.start_regime = static_cast<int>(r.integer_or("sim.start_regime", s.start_regime));
    s.start_population = r.number_or("sim.start_population", s.start_population);
    s.horizon = r.number_or("sim.horizon", s.horizon);
    s.paths = r.integer_or("sim.paths", s.paths);
    s.policy = r.text_or("sim.policy", s.policy);
    s.system = r.text_or("sim.system", s.system);
    if (s.policy != "field" && s.policy != "constant")
      fail("sim.policy: expected field or constant, got '" + s.policy + "'");
    if (s.system != "flexible" && s.system != "inflexible")
      fail("sim.system: expected flexible or inflexible, got '" + s.system + "'");
    s.cut = r.flag_or("sim.cut", s.cut);
    s.dense = r.flag_or("sim.dense", s.dense);
    s.event_log = r.flag_or("sim.event_log", s.event_log);
    s.use_rk4 = r.flag_or("sim.use_rk4", s.use_rk4);
    s.substep = r.number_or("sim.substep", s.substep);
  }

  if (needs_model(cfg.mode)) {
    ModelParams& m = cfg.model;
    m.mu = r.number("model.mu");
    m.eta = r.number("model.eta");
    m.a = r.number("model.a");
    m.b = r.number("model.b");
    m.delta = r.number("model.delta");
    m.d = r.number("model.d");
    m.K0 = r.number("model.K0");
    m.K1 = r.number("model.K1");
    m.P = r.number("model.P");
    m.flood_threshold = static_cast<int>(r.integer("model.flood_threshold"));
    m.zbar = r.number("model.zbar");
    m.lambda_hi = r.number("model.lambda_hi");
    m.lambda_lo = r.number("model.lambda_lo");
    m.m = r.number("model.m");

    ChainSpec& c = cfg.chain;
    const std::string source = r.require("chain.source");
    if (source == "synthetic") {
      c.source = ChainSpec::Source::synthetic;
      c.top = static_cast<int>(r.integer_or("chain.top", c.top));
      c.q0 = r.number_or("chain.q0", c.q0);
      c.dq = r.number_or("chain.dq", c.dq);
      c.up0 = r.number_or("chain.up0", c.up0);
      c.up_decay = r.number_or("chain.up_decay", c.up_decay);
      c.down = r.number_or("chain.down", c.down);
    } else if (source == "file") {
      c.source = ChainSpec::Source::file;
      c.file = r.require("chain.file");
    } else if (source == "inline") {
      c.source = ChainSpec::Source::inline_matrix;
      c.discharge = parse_list("chain.discharge", r.require("chain.discharge"));
      c.rates = parse_list("chain.rates", r.require("chain.rates"));
    } else {
      fail("chain.source: expected synthetic, file, or inline, got '" + source + "'");
    }
  }

  if (needs_grid(cfg)) {
    cfg.grid.nodes = static_cast<int>(r.integer("grid.nodes"));
    cfg.grid.dt = r.number("grid.dt");
    cfg.grid.horizon = r.number("grid.horizon");
    cfg.grid.tol_ss = r.number_or("grid.tol_ss", cfg.grid.tol_ss);
  }

  if (cfg.mode == RunMode::estimate_chain) {
    EstimateSpec& e = cfg.est;
    e.input = r.require("est.input");
    e.sample_interval = r.number_or("est.sample_interval", e.sample_interval);
    const std::string* levels = r.find("est.levels");
    const std::string* regimes = r.find("est.regimes");
    if (levels && regimes) fail("est.regimes: superseded by est.levels; give only one");
    if (levels) {
      e.levels = parse_list("est.levels", *levels);
    } else if (regimes) {
      e.regimes = static_cast<int>(parse_integer("est.regimes", *regimes));
      if (e.regimes < 1) fail("est.regimes: must be >= 1");
    } else {
      fail("est.levels or est.regimes: one is required for mode estimate-chain");
    }
  }

  if (cfg.mode == RunMode::oracle_check) {
    ReducedParams& q = cfg.reduced;
    q.f0 = r.number("reduced.f0");
    q.f1 = r.number("reduced.f1");
    q.w01 = r.number("reduced.w01");
    q.w10 = r.number("reduced.w10");
    q.delta = r.number("reduced.delta");
    q.r = r.number("reduced.r");
    q.zbar = r.number("reduced.zbar");
    q.K = r.number("reduced.K");
    q.P = r.number("reduced.P");
    cfg.reduced_nodes = static_cast<int>(r.integer_or("reduced.nodes", cfg.reduced_nodes));
  }

  if (cfg.mode == RunMode::sweep) {
    SweepSpec& s = cfg.sweep;
    s.axis = r.require("sweep.axis");
    s.values = parse_list("sweep.values", r.require("sweep.values"));
    s.mode = r.text_or("sweep.mode", s.mode);
    if (s.mode != "voi" && s.mode != "solve-flexible" && s.mode != "solve-inflexible")
      fail("sweep.mode: expected voi, solve-flexible, or solve-inflexible, got '" + s.mode + "'");
    RunConfig scratch = cfg;  // rejects unsupported axes up front
    apply_sweep_axis(scratch, s.axis, s.values.front());
  }

  std::string leftover;
  for (const auto& [key, value] : kv) {
    (void)value;
    if (!r.used.count(key)) {
      if (!leftover.empty()) leftover += ", ";
      leftover += key;
    }
  }
  if (!leftover.empty())
    fail("unknown or unused key(s) for mode " + to_string(cfg.mode) + ": " + leftover);
  return cfg;
}

void apply_sweep_axis(RunConfig& cfg, const std::string& axis, double value) {
  ModelParams& m = cfg.model;
  if (axis == "model.mu") m.mu = value;
  else if (axis == "model.eta") m.eta = value;
  else if (axis == "model.a") m.a = value;
  else if (axis == "model.b") m.b = value;
  else if (axis == "model.delta") m.delta = value;
  else if (axis == "model.d") m.d = value;
  else if (axis == "model.K0") m.K0 = value;
  else if (axis == "model.K1") m.K1 = value;
  else if (axis == "model.P") m.P = value;
  else if (axis == "model.flood_threshold") m.flood_threshold = static_cast<int>(value);
  else if (axis == "model.zbar") m.zbar = value;
  else if (axis == "model.lambda_hi") m.lambda_hi = value;
  else if (axis == "model.lambda_lo") m.lambda_lo = value;
  else if (axis == "model.m") m.m = value;
  else if (axis == "grid.nodes") cfg.grid.nodes = static_cast<int>(value);
  else if (axis == "grid.dt") cfg.grid.dt = value;
  else if (axis == "grid.horizon") cfg.grid.horizon = value;
  else if (axis == "grid.tol_ss") cfg.grid.tol_ss = value;
  else fail("sweep.axis: unsupported axis '" + axis + "' (use a model.* or grid.* key)");
}

KeyValues canonical_keys(const RunConfig& cfg) {
  KeyValues kv;
  kv["mode"] = to_string(cfg.mode);
  kv["seed"] = std::to_string(cfg.seed);
  // output.dir and --threads are accepted but stay out of the canonical set:
  // the hash identifies the computation, not where it lands or how many cores
  // ran it, so re-running into another directory reproduces tables byte for
  // byte.

  if (cfg.mode == RunMode::simulate) {
    const SimSpec& s = cfg.sim;
    kv["sim.start_regime"] = std::to_string(s.start_regime);
    kv["sim.start_population"] = fmt17(s.start_population);
    kv["sim.horizon"] = fmt17(s.horizon);
    kv["sim.paths"] = std::to_string(s.paths);
    kv["sim.policy"] = s.policy;
    kv["sim.system"] = s.system;
    kv["sim.cut"] = s.cut ? "true" : "false";
    kv["sim.dense"] = s.dense ? "true" : "false";
    kv["sim.event_log"] = s.event_log ? "true" : "false";
    kv["sim.use_rk4"] = s.use_rk4 ? "true" : "false";
    kv["sim.substep"] = fmt17(s.substep);
  }

  if (needs_model(cfg.mode)) {
    const ModelParams& m = cfg.model;
    kv["model.mu"] = fmt17(m.mu);
    kv["model.eta"] = fmt17(m.eta);
    kv["model.a"] = fmt17(m.a);
    kv["model.b"] = fmt17(m.b);
    kv["model.delta"] = fmt17(m.delta);
    kv["model.d"] = fmt17(m.d);
    kv["model.K0"] = fmt17(m.K0);
    kv["model.K1"] = fmt17(m.K1);
    kv["model.P"] = fmt17(m.P);
    kv["model.flood_threshold"] = std::to_string(m.flood_threshold);
    kv["model.zbar"] = fmt17(m.zbar);
    kv["model.lambda_hi"] = fmt17(m.lambda_hi);
    kv["model.lambda_lo"] = fmt17(m.lambda_lo);
    kv["model.m"] = fmt17(m.m);

    const ChainSpec& c = cfg.chain;
    switch (c.source) {
      case ChainSpec::Source::synthetic:
        kv["chain.source"] = "synthetic";
        kv["chain.top"] = std::to_string(c.top);
        kv["chain.q0"] = fmt17(c.q0);
        kv["chain.dq"] = fmt17(c.dq);
        kv["chain.up0"] = fmt17(c.up0);
        kv["chain.up_decay"] = fmt17(c.up_decay);
        kv["chain.down"] = fmt17(c.down);
        break;
      case ChainSpec::Source::file:
        kv["chain.source"] = "file";
        kv["chain.file"] = c.file;
        break;
      case ChainSpec::Source::inline_matrix:
        kv["chain.source"] = "inline";
        kv["chain.discharge"] = join17(c.discharge);
        kv["chain.rates"] = join17(c.rates);
        break;
    }
  }

  if (needs_grid(cfg)) {
    kv["grid.nodes"] = std::to_string(cfg.grid.nodes);
    kv["grid.dt"] = fmt17(cfg.grid.dt);
    kv["grid.horizon"] = fmt17(cfg.grid.horizon);
    kv["grid.tol_ss"] = fmt17(cfg.grid.tol_ss);
  }

  if (cfg.mode == RunMode::estimate_chain) {
    kv["est.input"] = cfg.est.input;
    kv["est.sample_interval"] = fmt17(cfg.est.sample_interval);
    if (!cfg.est.levels.empty())
      kv["est.levels"] = join17(cfg.est.levels);
    else
      kv["est.regimes"] = std::to_string(cfg.est.regimes);
  }

  if (cfg.mode == RunMode::oracle_check) {
    const ReducedParams& q = cfg.reduced;
    kv["reduced.f0"] = fmt17(q.f0);
    kv["reduced.f1"] = fmt17(q.f1);
    kv["reduced.w01"] = fmt17(q.w01);
    kv["reduced.w10"] = fmt17(q.w10);
    kv["reduced.delta"] = fmt17(q.delta);
    kv["reduced.r"] = fmt17(q.r);
    kv["reduced.zbar"] = fmt17(q.zbar);
    kv["reduced.K"] = fmt17(q.K);
    kv["reduced.P"] = fmt17(q.P);
    kv["reduced.nodes"] = std::to_string(cfg.reduced_nodes);
  }

  if (cfg.mode == RunMode::sweep) {
    kv["sweep.axis"] = cfg.sweep.axis;
    kv["sweep.values"] = join17(cfg.sweep.values);
    kv["sweep.mode"] = cfg.sweep.mode;
  }
  return kv;
}

std::uint64_t config_hash(const KeyValues& keys) {
  std::uint64_t h = 14695981039346656037ULL;
  const auto mix = [&h](const std::string& s) {
    for (const unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ULL;
    }
  };
  for (const auto& [key, value] : keys) {
    mix(key);
    mix("=");
    mix(value);
    mix("\n");
  }
  return h;
}

std::string config_hash_hex(const RunConfig& cfg) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(config_hash(canonical_keys(cfg))));
  return buf;
}

void write_config(std::ostream& out, const RunConfig& cfg) {
  out << "# algaectl configuration\n";
  for (const auto& [key, value] : canonical_keys(cfg)) out << key << " = " << value << "\n";
}

RunConfig default_run_config() { return RunConfig{}; }

}  // namespace algae
