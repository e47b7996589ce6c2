#pragma once

// Pointwise model functions and shared parameter records for a managed
// benthic-algae stock in a dam-downstream river whose discharge switches
// between a ladder of flow regimes.
//
// Conventions used throughout the library:
//   - population x lives on [0,1] (fraction of the largest sustainable stock)
//   - time unit is days; all rates (growth, switching, observation, discount)
//     are per day
//   - regimes are indexed 0..top by strictly increasing discharge Q_0 < ... < Q_top

#include <cstddef>
#include <vector>

namespace algae {

// Continuous-time Markov chain of flow regimes.
struct RegimeChain {
  std::vector<double> discharge;    // Q_i (m^3/s), strictly increasing, > 0
  std::vector<double> switch_rate;  // row-major (top+1)^2, [i][j] = rate i->j (1/day), diagonal ignored

  int regimes() const { return static_cast<int>(discharge.size()); }
  int top() const { return regimes() - 1; }

  double rate(int i, int j) const {
    return switch_rate[static_cast<std::size_t>(i) * discharge.size() + static_cast<std::size_t>(j)];
  }
  // total rate of leaving regime i
  double exit_rate(int i) const;
  double max_exit_rate() const;

  // throws std::invalid_argument on malformed data
  void validate() const;
};

// Growth, cost, observation, and disutility parameters.
struct ModelParams {
  // population dynamics
  double mu = 0.5;        // intrinsic growth rate
  double eta = 0.07;      // detachment coefficient (per unit discharge)
  double a = 0.2 / 50.5;  // capacity-vs-discharge slope
  double b = 0.8;         // capacity-vs-discharge intercept
  // economics
  double delta = 0.2;        // discount rate
  double d = 0.1;            // cost per observation
  double K0 = 0.15;          // fixed cost of a nonzero harvest
  double K1 = 0.25;          // cost per unit of harvested stock
  double P = 50.0;           // cost multiplier when harvesting above the flood threshold
  int flood_threshold = 16;  // L: regimes with index > L pay the multiplier
  // controls
  double zbar = 0.5;             // the single admissible nonzero harvest fraction
  double lambda_hi = 1.0 / 3.0;  // dense observation rate
  double lambda_lo = 0.1;        // coarse observation rate
  // preferences
  double m = 2.0;  // disutility exponent: h(x) = x^m

  // throws std::invalid_argument naming the offending field
  void validate() const;
};

// Population values drifting outside [0,1] by no more than this are clamped;
// larger violations are rejected as caller bugs.
inline constexpr double kUnitSlack = 1e-12;

// Clamp x into [0,1]; throws std::domain_error if it is further than kUnitSlack outside.
double clamp_unit(double x);

// Normalized carrying capacity c_i = (a Q_i + b)/(a Q_top + b); equals 1 at the top regime.
double capacity(const RegimeChain& chain, const ModelParams& p, int i);

// Drift f(i,x) = mu x (1 - x/c_i) - eta Q_i x.
double growth_rate(const RegimeChain& chain, const ModelParams& p, int i, double x);

// Interior equilibrium c_i (1 - eta Q_i / mu), clamped at 0 when decay dominates.
double equilibrium_population(const RegimeChain& chain, const ModelParams& p, int i);

// Instantaneous disutility h(x) = x^m.
double stock_disutility(const ModelParams& p, double x);

// Cost of harvesting fraction z of stock x in regime i:
//   0 for z = 0; K0 + K1 x z for i <= L; P (K0 + K1 x z) above the threshold.
// z must be 0 or zbar.
double harvest_cost(const ModelParams& p, int i, double x, double z);

// Chain builders used by tests and the synthetic-chain configuration.
RegimeChain two_state_chain(double q0, double q1, double w01, double w10);

// Birth-death ladder concentrated on the low regimes: up-rate up0 * exp(-up_decay * i),
// constant down-rate, discharges Q_i = q0 + dq * i.
RegimeChain birth_death_chain(int top, double q0, double dq, double up0, double up_decay, double down);

}  // namespace algae
