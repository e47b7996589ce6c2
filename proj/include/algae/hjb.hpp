#pragma once

// Explicit pseudo-time marching for the coupled optimality systems of the
// randomly-observed harvesting problem.
//
// Flexible system: one auxiliary value Psi(i, x, r) per admissible observation
// intensity r; the harvest decision is taken at the observation itself, so the
// source term couples to the intervention minimum M Phi.  Inflexible system:
// the harvest fraction applied at the next observation is committed one
// observation early, giving four commitment slots (z_next, lambda).  Both are
// marched by forward Euler with a WENO3 / local Lax-Friedrichs advection
// discretization until the residual stalls below tolerance or the pseudo-time
// horizon is reached; the value function is Phi = min over slots of Psi.

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "algae/model.hpp"
#include "algae/weno.hpp"

namespace algae {

struct Grid {
  int nodes = 401;       // N, uniform nodes on [0,1]
  double dt = 3e-4;      // pseudo-time step (days)
  double horizon = 120;  // pseudo-time horizon (days); reaches tol_ss from a cold start
  double tol_ss = 1e-9;  // early-exit residual ||dPsi/dt||_inf

  double dx() const { return 1.0 / (nodes - 1); }
  double x(int j) const { return static_cast<double>(j) / (nodes - 1); }
  long max_steps() const;
  void validate() const;  // throws std::invalid_argument
};

// Everything the marching kernels read, tabulated on the grid.  Keeping the
// kernels table-driven decouples them from ModelParams: tests and the reduced
// oracle configuration can supply drift/cost tables of any shape.
struct StageTables {
  int regimes = 0;
  int nodes = 0;
  double delta = 0.0;      // discount rate
  double obs_cost = 0.0;   // d, charged per observation
  double lambda_lo = 0.0;  // admissible observation intensities
  double lambda_hi = 0.0;
  double zbar = 0.0;       // nonzero harvest fraction

  std::vector<double> drift;         // regimes x nodes: f(i, x_j)
  std::vector<double> disutility;    // nodes: h(x_j)
  std::vector<double> harvest_cost;  // regimes x nodes: cost of z = zbar at (i, x_j)
  std::vector<double> switch_rate;   // regimes x regimes, diagonal ignored

  double exit_rate(int i) const;
  double max_exit_rate() const;
  double max_abs_drift() const;
  // upper bound for the value function: max h / delta + d lambda_hi / delta
  double value_cap() const;
  // dt * ( max|f|/dx + delta + lambda_hi + max exit rate ); must be <= 1
  double stability_number(const Grid& g) const;
  void validate(const Grid& g) const;  // throws std::invalid_argument
};

StageTables make_tables(const RegimeChain& chain, const ModelParams& p, const Grid& g);

struct ValueField {
  int regimes = 0, nodes = 0;
  std::vector<double> v;  // [i * nodes + j]

  static ValueField zeros(int regimes, int nodes);
  double at(int i, int j) const { return v[static_cast<std::size_t>(i) * nodes + j]; }
  double& at(int i, int j) { return v[static_cast<std::size_t>(i) * nodes + j]; }
  const double* row(int i) const { return v.data() + static_cast<std::size_t>(i) * nodes; }
};

// Slot-indexed companion of ValueField.  Flexible solves carry one slot per
// intensity, in the order {lambda_lo, lambda_hi}; inflexible solves carry one
// per commitment pair, in the order (z=0,lo), (z=0,hi), (z=zbar,lo),
// (z=zbar,hi).  Ascending slot order is also the tie-breaking preference.
inline constexpr int kFlexSlots = 2;
inline constexpr int kCommitSlots = 4;

struct SlotField {
  int regimes = 0, nodes = 0, slots = 0;
  std::vector<double> v;  // [(i * slots + s) * nodes + j]

  static SlotField zeros(int regimes, int nodes, int slots);
  std::size_t idx(int i, int s, int j) const {
    return (static_cast<std::size_t>(i) * slots + s) * nodes + j;
  }
  double at(int i, int s, int j) const { return v[idx(i, s, j)]; }
  double& at(int i, int s, int j) { return v[idx(i, s, j)]; }
};

// Per-(regime, node) optimal actions.  harvest: cut zbar at the observation
// (flexible) or commit zbar for the next observation (inflexible).  intense:
// run the dense observation intensity until the next observation.
struct PolicyField {
  int regimes = 0, nodes = 0;
  std::vector<std::uint8_t> harvest;
  std::vector<std::uint8_t> intense;

  bool harvests(int i, int j) const { return harvest[static_cast<std::size_t>(i) * nodes + j] != 0; }
  bool intensifies(int i, int j) const { return intense[static_cast<std::size_t>(i) * nodes + j] != 0; }
};

struct SolveDiagnostics {
  long steps = 0;
  double final_residual = 0.0;
  bool converged = false;          // residual fell below tol_ss before the horizon
  double stability_number = 0.0;   // precomputed guard value, <= 1
  double value_cap = 0.0;          // bound used for the boundedness check
  double max_bound_violation = 0.0;         // worst excursion of Phi outside [0, cap] over all steps
  double max_monotonicity_violation = 0.0;  // max Phi(i,j) - Phi(i,j+1) on the final field
  double max_consistency_gap = 0.0;         // max |Phi - min_s Psi| on the final field
  double max_intervention_gap = 0.0;        // max M Phi - (Phi + d) on the final field
  double phi_at_origin = 0.0;               // max_i |Phi(i, 0)| on the final field
  double wall_seconds = 0.0;
};

struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
// stability guard refused the configuration
struct StabilityError : SolverError {
  using SolverError::SolverError;
};
// NaN/Inf mid-march or persistently growing residual
struct DivergenceError : SolverError {
  using SolverError::SolverError;
};

enum class SystemKind { flexible, inflexible };

struct Solution {
  SystemKind kind = SystemKind::flexible;
  ValueField phi;
  SlotField psi;
  PolicyField policy;
  SolveDiagnostics diag;
};

struct SolveOptions {
  // 1 runs the serial reference kernels; 0 uses the OpenMP default; > 1 pins
  // the OpenMP thread count.  Serial and parallel paths perform identical
  // arithmetic per grid entry and must produce bit-identical fields.
  int threads = 0;
  double weno_eps = kWenoEps;
  // optional initial Psi (e.g. the converged field of a nearby configuration);
  // must match (regimes, nodes, slots)
  const SlotField* warm_start = nullptr;
};

// Interpolation helpers shared by the solver, policy evaluation, and output.
// lerp_pos takes a fractional node index; lerp_unit takes x in [0,1].
inline double lerp_pos(const double* row, int nodes, double pos) {
  if (pos <= 0.0) return row[0];
  if (pos >= nodes - 1) return row[nodes - 1];
  const int k = static_cast<int>(pos);
  const double frac = pos - k;
  return row[k] + frac * (row[k + 1] - row[k]);
}
inline double lerp_unit(const double* row, int nodes, double x) {
  return lerp_pos(row, nodes, x * (nodes - 1));
}

// Intervention minimum M Phi(i, x_j) = min over z in {0, zbar} of
// Phi(i, (1-z) x_j) + d + harvest cost, with linear interpolation off-grid.
// argmin_harvest (optional) records the minimizing z; ties prefer z = 0.
void apply_intervention(const ValueField& phi, const StageTables& t,
                        std::span<double> mphi, std::span<std::uint8_t> argmin_harvest,
                        bool parallel = false);

// One marching instance.  step() performs a single forward-Euler update and
// returns the residual; solve_* below drive it to steady state.
class Marcher {
 public:
  Marcher(SystemKind kind, const StageTables& t, const Grid& g, const SolveOptions& opt = {});

  double step();
  long steps_taken() const { return steps_; }

  ValueField phi_field() const;
  SlotField psi_field() const;

  // marches to the horizon / tolerance and assembles fields + diagnostics
  Solution solve();

 private:
  void refresh_targets();
  void refresh_coupling();
  void reconstruct_rows();
  double update_rows();
  void refresh_phi();

  SystemKind kind_;
  StageTables tab_;
  Grid grid_;
  int R_ = 0, N_ = 0, S_ = 0;
  bool parallel_ = false;
  double eps_ = kWenoEps;
  double cap_ = 0.0;
  double stability_ = 0.0;

  std::vector<double> psi_, psi_next_, phi_;
  std::vector<double> mphi_, tgt_cut_;  // flexible: mphi_; inflexible: phi+d and cut target
  std::vector<double> couple_, pm_, pp_;
  std::vector<double> lambda_slot_, exit_;
  std::vector<double> row_max_, phi_min_i_, phi_max_i_;
  long steps_ = 0;
  double worst_low_ = 0.0, worst_high_ = 0.0;
};

Solution solve_flexible(const StageTables& t, const Grid& g, const SolveOptions& opt = {});
Solution solve_flexible(const RegimeChain& chain, const ModelParams& p, const Grid& g,
                        const SolveOptions& opt = {});
Solution solve_inflexible(const StageTables& t, const Grid& g, const SolveOptions& opt = {});
Solution solve_inflexible(const RegimeChain& chain, const ModelParams& p, const Grid& g,
                          const SolveOptions& opt = {});

PolicyField extract_flexible_policy(const ValueField& phi, const SlotField& psi, const StageTables& t);
PolicyField extract_inflexible_policy(const SlotField& psi);

// V = Phi_inflexible - Phi_flexible, nonnegative up to solver tolerance.
struct VoiField {
  ValueField v;
  double min_value = 0.0;
  double scale = 0.0;  // ||Phi_inflexible||_inf, the slack reference
};
inline constexpr double kVoiSlack = 1e-6;
// throws SolverError if min V < -kVoiSlack * scale: extra information can only
// lower the cost, so a materially negative V indicates a solver bug
VoiField value_of_information(const ValueField& inflex, const ValueField& flex);

}  // namespace algae
