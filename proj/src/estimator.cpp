#include "algae/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "algae/rng.hpp"

namespace algae {

namespace {

[[noreturn]] void invalid(const std::string& msg) { throw std::invalid_argument(msg); }
[[noreturn]] void ioerror(const std::string& msg) { throw std::runtime_error(msg); }

// civil <-> serial day conversions (proleptic Gregorian, day 0 = 1970-01-01)
long days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const long era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<long>(doe) - 719468;
}

void civil_from_days(long z, int& y, int& m, int& d) {
  z += 719468;
  const long era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const long yy = static_cast<long>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
  m = static_cast<int>(mp < 10 ? mp + 3 : mp - 9);
  y = static_cast<int>(yy + (m <= 2));
}

bool parse_timestamp(const std::string& s, double& days) {
  int y = 0, mo = 0, d = 0, h = 0, mi = 0;
  double sec = 0.0;
  char sep = 'T';
  const int n = std::sscanf(s.c_str(), "%d-%d-%d%c%d:%d:%lf", &y, &mo, &d, &sep, &h, &mi, &sec);
  if (n != 3 && n < 6) return false;
  if (n >= 6 && sep != 'T' && sep != ' ' && sep != 't') return false;
  if (mo < 1 || mo > 12 || d < 1 || d > 31) return false;
  if (h < 0 || h > 23 || mi < 0 || mi > 59 || sec < 0.0 || sec >= 61.0) return false;
  days = static_cast<double>(days_from_civil(y, mo, d)) + (h * 3600.0 + mi * 60.0 + sec) / 86400.0;
  return true;
}

std::string format_timestamp(double t) {
  double day = std::floor(t);
  long long secs = std::llround((t - day) * 86400.0);
  if (secs >= 86400) {
    secs -= 86400;
    day += 1.0;
  }
  int y = 0, m = 0, d = 0;
  civil_from_days(static_cast<long>(day), y, m, d);
  char buf[40];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d", y, m, d,
                static_cast<int>(secs / 3600), static_cast<int>(secs / 60 % 60),
                static_cast<int>(secs % 60));
  return buf;
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

void check_levels(std::span<const double> levels) {
  if (levels.empty()) invalid("estimator: need at least one discharge level");
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (!std::isfinite(levels[i])) invalid("estimator: discharge levels must be finite");
    if (i > 0 && !(levels[i] > levels[i - 1]))
      invalid("estimator: discharge levels must be strictly increasing");
  }
}

int nearest_level(double q, std::span<const double> levels) {
  const auto it = std::lower_bound(levels.begin(), levels.end(), q);
  if (it == levels.begin()) return 0;
  if (it == levels.end()) return static_cast<int>(levels.size()) - 1;
  const auto lo = it - 1;
  // tie prefers the lower index
  return (q - *lo <= *it - q) ? static_cast<int>(lo - levels.begin())
                              : static_cast<int>(it - levels.begin());
}

}  // namespace

void DischargeSeries::validate() const {
  if (!(sample_interval > 0.0) || !std::isfinite(sample_interval))
    invalid("series: sample_interval must be positive");
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const DischargeSample& s = samples[k];
    if (!std::isfinite(s.t)) invalid("series: timestamps must be finite");
    if (k > 0 && !(s.t > samples[k - 1].t))
      invalid("series: timestamps must be strictly increasing");
    if (!s.gap && (!std::isfinite(s.q) || s.q < 0.0))
      invalid("series: discharges must be finite and >= 0");
  }
}

std::vector<double> default_discharge_grid(int regimes) {
  if (regimes < 1) invalid("estimator: regime count must be >= 1");
  std::vector<double> q(regimes);
  for (int i = 0; i < regimes; ++i) q[i] = 0.5 + 1.25 * i;
  return q;
}

std::vector<int> assign_regimes(const DischargeSeries& series, std::span<const double> levels) {
  series.validate();
  check_levels(levels);
  if (series.samples.empty()) invalid("estimator: empty series");
  std::vector<int> idx(series.samples.size());
  for (std::size_t k = 0; k < series.samples.size(); ++k)
    idx[k] = series.samples[k].gap ? -1 : nearest_level(series.samples[k].q, levels);
  return idx;
}

ChainEstimate estimate_chain(const DischargeSeries& series, std::span<const double> levels) {
  const std::vector<int> idx = assign_regimes(series, levels);
  const int R = static_cast<int>(levels.size());
  const double delta = series.sample_interval;

  ChainEstimate est;
  est.regimes = R;
  est.sample_interval = delta;
  est.prob.assign(static_cast<std::size_t>(R) * R, 0.0);
  est.rate.assign(static_cast<std::size_t>(R) * R, 0.0);
  est.occupancy.assign(R, 0.0);
  est.row_pairs.assign(R, 0);
  est.visited.assign(R, 0);

  std::vector<long> count(static_cast<std::size_t>(R) * R, 0);
  long occupied = 0;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    if (idx[k] < 0) continue;
    est.occupancy[idx[k]] += 1.0;
    ++occupied;
    if (k + 1 >= idx.size() || idx[k + 1] < 0) continue;
    // count only contiguous pairs: gaps and timestamp jumps break the chain
    const double dt = series.samples[k + 1].t - series.samples[k].t;
    if (std::abs(dt - delta) > 0.25 * delta) continue;
    ++count[static_cast<std::size_t>(idx[k]) * R + idx[k + 1]];
    ++est.row_pairs[idx[k]];
    ++est.usable_pairs;
  }
  if (est.usable_pairs < 2) invalid("estimator: need at least 2 usable sample pairs");
  for (int i = 0; i < R; ++i) {
    if (est.row_pairs[i] == 0) continue;  // unvisited row: all-zero probabilities
    est.visited[i] = 1;
    for (int j = 0; j < R; ++j) {
      const double p = static_cast<double>(count[static_cast<std::size_t>(i) * R + j]) /
                       static_cast<double>(est.row_pairs[i]);
      est.prob[static_cast<std::size_t>(i) * R + j] = p;
      if (i != j) est.rate[static_cast<std::size_t>(i) * R + j] = p / delta;
    }
  }
  if (occupied > 0)
    for (double& o : est.occupancy) o /= static_cast<double>(occupied);
  est.entropy = transition_entropy(est);
  return est;
}

double transition_entropy(const ChainEstimate& est) {
  double h = 0.0;
  for (int i = 0; i < est.regimes; ++i) {
    double row = 0.0;
    for (int j = 0; j < est.regimes; ++j) {
      const double p = est.prob[static_cast<std::size_t>(i) * est.regimes + j];
      if (p > 0.0) row -= p * std::log(p);
    }
    h += est.occupancy[i] * row;
  }
  return h;
}

DischargeSeries synthesize_series(const RegimeChain& chain, double duration_days,
                                  double delta_days, std::uint64_t seed, int start_regime) {
  chain.validate();
  if (!(duration_days > 0.0)) invalid("estimator: duration must be > 0");
  if (!(delta_days > 0.0)) invalid("estimator: delta must be > 0");
  const int R = chain.regimes();
  if (start_regime < 0 || start_regime >= R) invalid("estimator: start regime out of range");

  // per-regime jump weights with the diagonal zeroed
  std::vector<std::vector<double>> row(R);
  std::vector<double> exit(R);
  for (int i = 0; i < R; ++i) {
    row[i].assign(R, 0.0);
    for (int j = 0; j < R; ++j)
      if (j != i) row[i][j] = chain.rate(i, j);
    exit[i] = chain.exit_rate(i);
  }

  PathRng rng(seed);
  DischargeSeries out;
  out.sample_interval = delta_days;
  const long n = static_cast<long>(std::floor(duration_days / delta_days + 1e-9));
  out.samples.reserve(n + 1);

  int cur = start_regime;
  double next_switch = rng.exponential(exit[cur]);
  for (long k = 0; k <= n; ++k) {
    const double t = static_cast<double>(k) * delta_days;
    while (next_switch <= t) {
      cur = rng.pick(row[cur], exit[cur]);
      next_switch += rng.exponential(exit[cur]);
    }
    out.samples.push_back({t, chain.discharge[cur], false});
  }
  return out;
}

RegimeChain chain_from_estimate(const ChainEstimate& est, std::span<const double> levels) {
  check_levels(levels);
  if (static_cast<int>(levels.size()) != est.regimes)
    invalid("estimator: level count does not match the estimate");
  RegimeChain chain;
  chain.discharge.assign(levels.begin(), levels.end());
  chain.switch_rate = est.rate;
  for (int i = 0; i < est.regimes; ++i)
    chain.switch_rate[static_cast<std::size_t>(i) * est.regimes + i] = 0.0;
  chain.validate();
  return chain;
}

DischargeSeries load_discharge_series(const std::string& path, double sample_interval) {
  std::ifstream in(path);
  if (!in) ioerror("cannot open discharge series: " + path);
  DischargeSeries series;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto comma = t.find(',');
    if (comma == std::string::npos)
      ioerror(path + ":" + std::to_string(lineno) + ": expected 'timestamp, discharge'");
    const std::string ts = trim(t.substr(0, comma));
    const std::string qs = trim(t.substr(comma + 1));
    DischargeSample s;
    if (!parse_timestamp(ts, s.t))
      ioerror(path + ":" + std::to_string(lineno) + ": bad timestamp '" + ts + "'");
    if (qs.empty() || qs == "NA" || qs == "na" || qs == "NaN" || qs == "nan") {
      s.gap = true;
    } else {
      char* end = nullptr;
      s.q = std::strtod(qs.c_str(), &end);
      if (end == qs.c_str() || *end != '\0' || !std::isfinite(s.q))
        ioerror(path + ":" + std::to_string(lineno) + ": bad discharge '" + qs + "'");
    }
    series.samples.push_back(s);
  }
  if (sample_interval > 0.0) {
    series.sample_interval = sample_interval;
  } else {
    // infer the sampling interval as the smallest spacing (robust to gaps)
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k < series.samples.size(); ++k)
      best = std::min(best, series.samples[k].t - series.samples[k - 1].t);
    if (!std::isfinite(best) || !(best > 0.0))
      ioerror(path + ": cannot infer sample interval from fewer than 2 samples");
    series.sample_interval = best;
  }
  series.validate();
  return series;
}

void save_discharge_series(const std::string& path, const DischargeSeries& series) {
  series.validate();
  std::ofstream out(path);
  if (!out) ioerror("cannot write discharge series: " + path);
  out << "# discharge series: ISO-8601 timestamp, discharge (m^3/s); NA marks a gap\n";
  out << "# sample_interval_days: " << fmt17(series.sample_interval) << "\n";
  for (const DischargeSample& s : series.samples) {
    out << format_timestamp(s.t) << ", ";
    if (s.gap)
      out << "NA\n";
    else
      out << fmt17(s.q) << "\n";
  }
  if (!out) ioerror("failed writing discharge series: " + path);
}

void write_chain_matrix(const std::string& path, const RegimeChain& chain,
                        double sample_interval, double entropy) {
  chain.validate();
  std::ofstream out(path);
  if (!out) ioerror("cannot write chain matrix: " + path);
  const int R = chain.regimes();
  out << "# regime-switching rate matrix w_ij (1/day), diagonal zero\n";
  out << "# regimes: " << R << "\n";
  out << "# levels:";
  for (double q : chain.discharge) out << ' ' << fmt17(q);
  out << "\n";
  out << "# sample_interval_days: " << fmt17(sample_interval) << "\n";
  out << "# entropy_nats: " << fmt17(entropy) << "\n";
  for (int i = 0; i < R; ++i) {
    for (int j = 0; j < R; ++j) {
      if (j) out << ' ';
      out << fmt17(i == j ? 0.0 : chain.rate(i, j));
    }
    out << "\n";
  }
  if (!out) ioerror("failed writing chain matrix: " + path);
}

RegimeChain load_chain_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) ioerror("cannot open chain matrix: " + path);
  RegimeChain chain;
  std::vector<double> rows;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (t[0] == '#') {
      const std::string key = "# levels:";
      if (t.compare(0, key.size(), key) == 0) {
        std::istringstream is(t.substr(key.size()));
        double q = 0.0;
        while (is >> q) chain.discharge.push_back(q);
      }
      continue;
    }
    std::istringstream is(t);
    double v = 0.0;
    while (is >> v) rows.push_back(v);
  }
  const std::size_t R = chain.discharge.size();
  if (R == 0) ioerror(path + ": missing '# levels:' metadata");
  if (rows.size() != R * R)
    ioerror(path + ": expected " + std::to_string(R * R) + " matrix entries, found " +
            std::to_string(rows.size()));
  chain.switch_rate = std::move(rows);
  for (std::size_t i = 0; i < R; ++i) chain.switch_rate[i * R + i] = 0.0;
  chain.validate();
  return chain;
}

}  // namespace algae
