#pragma once

// Regime-chain estimation from discharge time series: nearest-level regime
// assignment, embedded transition-count estimation with rate conversion
// w = p/Delta, occupancy-weighted row entropy, and a synthetic-series
// generator for round-trip testing.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "algae/model.hpp"

namespace algae {

struct DischargeSample {
  double t = 0.0;    // timestamp, days (absolute civil days + fraction)
  double q = 0.0;    // discharge, m^3/s; meaningless when gap
  bool gap = false;  // explicitly missing record
};

struct DischargeSeries {
  std::vector<DischargeSample> samples;
  double sample_interval = 1.0 / 24.0;  // Delta, days (1/24 = hourly)

  // throws std::invalid_argument: timestamps must be strictly increasing,
  // non-gap discharges finite and >= 0, sample_interval > 0
  void validate() const;
};

// Estimated chain: embedded transition probabilities of the Delta-sampled
// series, the implied switch rates, occupancy, and the entropy diagnostic.
struct ChainEstimate {
  int regimes = 0;
  std::vector<double> prob;           // regimes x regimes, rows sum to 1 over visited rows
  std::vector<double> rate;           // regimes x regimes, off-diagonal p/Delta, diagonal 0
  std::vector<double> occupancy;      // fraction of non-gap samples per regime, sums to 1
  std::vector<long> row_pairs;        // outgoing transition pairs counted per regime
  std::vector<std::uint8_t> visited;  // row has at least one outgoing pair
  double sample_interval = 0.0;
  double entropy = 0.0;  // nats
  long usable_pairs = 0;
};

// Representative discharge levels Q_i = 0.5 + 1.25 i.
std::vector<double> default_discharge_grid(int regimes);

// Nearest-level regime per sample (ties to the lower index, out-of-range
// clamped); gap samples map to -1.  levels must be strictly increasing.
std::vector<int> assign_regimes(const DischargeSeries& series, std::span<const double> levels);

// Transition-count estimate over consecutive non-gap pairs exactly one
// sample_interval apart; pairs across gaps or timestamp jumps are excluded.
// Throws std::invalid_argument if fewer than 2 usable pairs remain.
ChainEstimate estimate_chain(const DischargeSeries& series, std::span<const double> levels);

// H = -sum_i pi_i sum_j p_ij ln p_ij, with 0 ln 0 = 0.
double transition_entropy(const ChainEstimate& est);

// Markov-chain sample path emitted as a discharge series: regime sampled
// every delta days over [0, duration], discharge Q_regime.  Deterministic in
// the seed.
DischargeSeries synthesize_series(const RegimeChain& chain, double duration_days,
                                  double delta_days, std::uint64_t seed, int start_regime = 0);

// Packages an estimate as a solver-ready chain (rates off the estimate,
// levels as discharges).
RegimeChain chain_from_estimate(const ChainEstimate& est, std::span<const double> levels);

// Text I/O.  Series files: one record per line, "ISO-8601 timestamp, discharge",
// blank or NA discharge marking a gap, '#' comments.  Chain files: '#' metadata
// (regimes, levels, sample interval, entropy) followed by the rate matrix,
// one space-separated row per regime.
DischargeSeries load_discharge_series(const std::string& path, double sample_interval = 0.0);
void save_discharge_series(const std::string& path, const DischargeSeries& series);
void write_chain_matrix(const std::string& path, const RegimeChain& chain,
                        double sample_interval, double entropy);
RegimeChain load_chain_matrix(const std::string& path);

}  // namespace algae
