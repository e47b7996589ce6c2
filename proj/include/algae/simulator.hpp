#pragma once

// Event-driven Monte Carlo simulation of the controlled process: regime
// switches (continuous-time Markov chain), deterministic logistic-with-decay
// growth between events, Poisson-timed observations with controlled intensity,
// and proportional impulse harvests at observations.  Estimates the discounted
// performance index of any policy, including policies read off solver fields.

#include <cstdint>
#include <vector>

#include "algae/hjb.hpp"
#include "algae/model.hpp"
#include "algae/rng.hpp"

namespace algae {

struct SimConfig {
  int start_regime = 0;
  double start_population = 0.5;
  double horizon = 100.0;     // T, days; discounting makes the tail negligible
  long paths = 100000;
  std::uint64_t seed = 1;     // path k uses PathRng(seed + k)
  double ode_substep = 1e-3;  // RK4 cross-check resolution (days)
  bool use_rk4 = false;       // integrate segments with RK4 instead of the closed form
  int threads = 0;            // 0 = parallel default, 1 = serial

  // throws std::invalid_argument; horizon must discount to <= 1e-8
  void validate(const RegimeChain& chain, const ModelParams& p) const;
};

// Flexible control: at each observation the harvest is decided from the
// pre-harvest state and the next intensity from the post-harvest state (the
// initial intensity comes from the same rule at the start state, with no
// harvest and no cost at time 0).
class FlexiblePolicy {
 public:
  virtual ~FlexiblePolicy() = default;
  virtual bool harvest(int regime, double x) const = 0;  // x pre-harvest
  virtual bool intense(int regime, double x) const = 0;  // x post-harvest
};

// Inflexible control: the harvest applied at an observation was committed at
// the previous one; commit() is queried at the post-harvest state to fix the
// next harvest and the intensity for the coming interval.  The initial
// commitment is commit() at the start state.
class InflexiblePolicy {
 public:
  virtual ~InflexiblePolicy() = default;
  virtual void commit(int regime, double x, bool& harvest_next, bool& intense_now) const = 0;
};

struct ConstantFlexiblePolicy final : FlexiblePolicy {
  bool cut = false;
  bool dense = false;
  ConstantFlexiblePolicy(bool cut_, bool dense_) : cut(cut_), dense(dense_) {}
  bool harvest(int, double) const override { return cut; }
  bool intense(int, double) const override { return dense; }
};

struct ConstantInflexiblePolicy final : InflexiblePolicy {
  bool cut = false;
  bool dense = false;
  ConstantInflexiblePolicy(bool cut_, bool dense_) : cut(cut_), dense(dense_) {}
  void commit(int, double, bool& h, bool& d) const override {
    h = cut;
    d = dense;
  }
};

// Policies read off solver fields: the decision comparisons are re-evaluated
// at the exact (off-grid) state using linear interpolation of Phi and Psi.
class FieldFlexiblePolicy final : public FlexiblePolicy {
 public:
  FieldFlexiblePolicy(const Solution& sol, const RegimeChain& chain, const ModelParams& p);
  bool harvest(int regime, double x) const override;
  bool intense(int regime, double x) const override;

 private:
  ValueField phi_;
  SlotField psi_;
  ModelParams params_;
};

class FieldInflexiblePolicy final : public InflexiblePolicy {
 public:
  explicit FieldInflexiblePolicy(const Solution& sol);
  void commit(int regime, double x, bool& harvest_next, bool& intense_now) const override;

 private:
  SlotField psi_;
};

// One draw of the switching clock: sojourn ~ exponential(total exit rate),
// next state proportional to the individual rates.  Zero exit rate gives an
// infinite sojourn (next = current).
struct SwitchDraw {
  double sojourn = 0.0;
  int next = 0;
};
SwitchDraw ctmc_next_switch(const RegimeChain& chain, int regime, PathRng& rng);

// Population after dt days in a fixed regime, by the closed-form solution of
// x' = (mu - eta Q_i) x - (mu / c_i) x^2, clamped to [0,1].
double ode_segment(const RegimeChain& chain, const ModelParams& p, int i, double x0, double dt);
// Independent RK4 integrator over the same segment (cross-check / fallback).
double ode_segment_rk4(const RegimeChain& chain, const ModelParams& p, int i, double x0,
                       double dt, double substep);

// Integral of h(x(s)) e^{-delta (t0 + s)} over s in [0, dt] along the in-regime
// flow from x0, by adaptive Simpson quadrature (absolute tolerance 1e-10).
double discounted_disutility(const RegimeChain& chain, const ModelParams& p, int i, double x0,
                             double t0, double dt, bool use_rk4 = false, double substep = 1e-3);

struct SimEvent {
  double t = 0.0;
  char kind = 'o';  // 's' switch, 'o' observation
  int regime = 0;   // regime after the event
  double x_before = 0.0;
  double x_after = 0.0;
  double z = 0.0;            // harvest fraction applied (observations)
  double lambda_next = 0.0;  // intensity committed for the next interval
};

// Discounted cost components of one path; the total is their sum by
// construction.
struct PathResult {
  double disutility = 0.0;
  double observation = 0.0;
  double harvest = 0.0;
  long observations = 0;
  long switches = 0;
  long harvests = 0;
  double total() const { return disutility + observation + harvest; }
};

PathResult simulate_flexible_path(const RegimeChain& chain, const ModelParams& p,
                                  const FlexiblePolicy& pol, const SimConfig& cfg,
                                  std::uint64_t path_seed, std::vector<SimEvent>* log = nullptr);
PathResult simulate_inflexible_path(const RegimeChain& chain, const ModelParams& p,
                                    const InflexiblePolicy& pol, const SimConfig& cfg,
                                    std::uint64_t path_seed, std::vector<SimEvent>* log = nullptr);

struct Estimate {
  double mean = 0.0;  // defined as the sum of the component means
  double se = 0.0;    // standard error of the per-path totals
  double disutility = 0.0;
  double observation = 0.0;
  double harvest = 0.0;
  long paths = 0;
  double truncation_bound = 0.0;  // value cap x e^{-delta horizon}
};

// Averages independent paths with per-path seeds seed + k; the reduction is
// serial over the path index, so results do not depend on thread scheduling.
// per_path (optional) receives each path's components.
Estimate estimate_flexible(const RegimeChain& chain, const ModelParams& p,
                           const FlexiblePolicy& pol, const SimConfig& cfg,
                           std::vector<PathResult>* per_path = nullptr);
Estimate estimate_inflexible(const RegimeChain& chain, const ModelParams& p,
                             const InflexiblePolicy& pol, const SimConfig& cfg,
                             std::vector<PathResult>* per_path = nullptr);

}  // namespace algae
