#include "algae/hjb.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "algae/weno.hpp"

namespace algae {

namespace {

[[noreturn]] void invalid(const std::string& msg) { throw std::invalid_argument(msg); }

// Serial and OpenMP execution share one body so both paths perform identical
// arithmetic per index; only the iteration scheduling differs.
template <class F>
void maybe_parallel_for(int n, bool parallel, F&& body) {
  if (parallel) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) body(i);
#else
    for (int i = 0; i < n; ++i) body(i);
#endif
  } else {
    for (int i = 0; i < n; ++i) body(i);
  }
}

void intervention_raw(const double* phi, int regimes, int nodes, const StageTables& t,
                      double* mphi, std::uint8_t* argmin, bool parallel) {
  const double keep_shift = t.obs_cost;
  const double stay = 1.0 - t.zbar;
  maybe_parallel_for(regimes, parallel, [&](int i) {
    const double* row = phi + static_cast<std::size_t>(i) * nodes;
    const double* cost = t.harvest_cost.data() + static_cast<std::size_t>(i) * nodes;
    double* out = mphi + static_cast<std::size_t>(i) * nodes;
    std::uint8_t* am = argmin ? argmin + static_cast<std::size_t>(i) * nodes : nullptr;
    for (int j = 0; j < nodes; ++j) {
      const double keep = row[j] + keep_shift;
      const double cut = lerp_pos(row, nodes, stay * j) + keep_shift + cost[j];
      const bool cutting = cut < keep;  // tie prefers z = 0
      out[j] = cutting ? cut : keep;
      if (am) am[j] = cutting ? 1 : 0;
    }
  });
}

}  // namespace

long Grid::max_steps() const { return static_cast<long>(std::ceil(horizon / dt - 1e-12)); }

void Grid::validate() const {
  if (nodes < 5) invalid("grid: need at least 5 nodes");
  if (!(dt > 0.0) || !std::isfinite(dt)) invalid("grid: dt must be positive and finite");
  if (!(horizon >= dt) || !std::isfinite(horizon)) invalid("grid: horizon must cover at least one step");
  if (!(tol_ss >= 0.0)) invalid("grid: tol_ss must be >= 0");
}

double StageTables::exit_rate(int i) const {
  double s = 0.0;
  for (int k = 0; k < regimes; ++k)
    if (k != i) s += switch_rate[static_cast<std::size_t>(i) * regimes + k];
  return s;
}

double StageTables::max_exit_rate() const {
  double s = 0.0;
  for (int i = 0; i < regimes; ++i) s = std::max(s, exit_rate(i));
  return s;
}

double StageTables::max_abs_drift() const {
  double s = 0.0;
  for (double f : drift) s = std::max(s, std::abs(f));
  return s;
}

double StageTables::value_cap() const {
  double hmax = 0.0;
  for (double h : disutility) hmax = std::max(hmax, h);
  return hmax / delta + obs_cost * lambda_hi / delta;
}

double StageTables::stability_number(const Grid& g) const {
  return g.dt * (max_abs_drift() / g.dx() + delta + lambda_hi + max_exit_rate());
}

void StageTables::validate(const Grid& g) const {
  if (regimes < 1) invalid("tables: need at least one regime");
  if (nodes != g.nodes) invalid("tables: node count does not match the grid");
  const std::size_t rn = static_cast<std::size_t>(regimes) * nodes;
  if (drift.size() != rn) invalid("tables: drift must be regimes x nodes");
  if (disutility.size() != static_cast<std::size_t>(nodes)) invalid("tables: disutility must have one entry per node");
  if (harvest_cost.size() != rn) invalid("tables: harvest cost must be regimes x nodes");
  if (switch_rate.size() != static_cast<std::size_t>(regimes) * regimes)
    invalid("tables: switch-rate matrix must be regimes^2");
  if (!(delta > 0.0)) invalid("tables: delta must be > 0");
  if (!(obs_cost >= 0.0)) invalid("tables: observation cost must be >= 0");
  if (!(lambda_lo > 0.0) || !(lambda_hi >= lambda_lo)) invalid("tables: need 0 < lambda_lo <= lambda_hi");
  if (!(zbar > 0.0 && zbar < 1.0)) invalid("tables: zbar must lie in (0,1)");
  for (double f : drift)
    if (!std::isfinite(f)) invalid("tables: drift entries must be finite");
  for (double h : disutility)
    if (!std::isfinite(h) || h < 0.0) invalid("tables: disutility entries must be finite and >= 0");
  for (double c : harvest_cost)
    if (!std::isfinite(c) || c < 0.0) invalid("tables: harvest-cost entries must be finite and >= 0");
  for (int i = 0; i < regimes; ++i)
    for (int k = 0; k < regimes; ++k) {
      if (i == k) continue;
      const double w = switch_rate[static_cast<std::size_t>(i) * regimes + k];
      if (!std::isfinite(w) || w < 0.0) invalid("tables: switch rates must be finite and >= 0");
    }
}

StageTables make_tables(const RegimeChain& chain, const ModelParams& p, const Grid& g) {
  chain.validate();
  p.validate();
  g.validate();
  StageTables t;
  t.regimes = chain.regimes();
  t.nodes = g.nodes;
  t.delta = p.delta;
  t.obs_cost = p.d;
  t.lambda_lo = p.lambda_lo;
  t.lambda_hi = p.lambda_hi;
  t.zbar = p.zbar;
  t.drift.resize(static_cast<std::size_t>(t.regimes) * t.nodes);
  t.disutility.resize(t.nodes);
  t.harvest_cost.resize(t.drift.size());
  t.switch_rate.assign(static_cast<std::size_t>(t.regimes) * t.regimes, 0.0);
  for (int j = 0; j < t.nodes; ++j) t.disutility[j] = stock_disutility(p, g.x(j));
  for (int i = 0; i < t.regimes; ++i)
    for (int j = 0; j < t.nodes; ++j) {
      const double x = g.x(j);
      t.drift[static_cast<std::size_t>(i) * t.nodes + j] = growth_rate(chain, p, i, x);
      t.harvest_cost[static_cast<std::size_t>(i) * t.nodes + j] = harvest_cost(p, i, x, p.zbar);
    }
  for (int i = 0; i < t.regimes; ++i)
    for (int k = 0; k < t.regimes; ++k)
      if (i != k) t.switch_rate[static_cast<std::size_t>(i) * t.regimes + k] = chain.rate(i, k);
  return t;
}

ValueField ValueField::zeros(int regimes, int nodes) {
  ValueField f;
  f.regimes = regimes;
  f.nodes = nodes;
  f.v.assign(static_cast<std::size_t>(regimes) * nodes, 0.0);
  return f;
}

SlotField SlotField::zeros(int regimes, int nodes, int slots) {
  SlotField f;
  f.regimes = regimes;
  f.nodes = nodes;
  f.slots = slots;
  f.v.assign(static_cast<std::size_t>(regimes) * nodes * slots, 0.0);
  return f;
}

void apply_intervention(const ValueField& phi, const StageTables& t,
                        std::span<double> mphi, std::span<std::uint8_t> argmin_harvest,
                        bool parallel) {
  if (phi.regimes != t.regimes || phi.nodes != t.nodes) invalid("apply_intervention: field/table shape mismatch");
  const std::size_t rn = static_cast<std::size_t>(t.regimes) * t.nodes;
  if (mphi.size() != rn) invalid("apply_intervention: output size mismatch");
  if (!argmin_harvest.empty() && argmin_harvest.size() != rn)
    invalid("apply_intervention: argmin size mismatch");
  intervention_raw(phi.v.data(), t.regimes, t.nodes, t, mphi.data(),
                   argmin_harvest.empty() ? nullptr : argmin_harvest.data(), parallel);
}

Marcher::Marcher(SystemKind kind, const StageTables& t, const Grid& g, const SolveOptions& opt)
    : kind_(kind), tab_(t), grid_(g) {
  grid_.validate();
  tab_.validate(grid_);
  R_ = tab_.regimes;
  N_ = tab_.nodes;
  S_ = kind_ == SystemKind::flexible ? kFlexSlots : kCommitSlots;
  parallel_ = opt.threads != 1;
  eps_ = opt.weno_eps;
  if (!(eps_ > 0.0)) invalid("solver: weno_eps must be > 0");
#ifdef _OPENMP
  if (opt.threads > 1) omp_set_num_threads(opt.threads);
#endif
  cap_ = tab_.value_cap();
  stability_ = tab_.stability_number(grid_);
  if (!(stability_ <= 1.0)) {
    std::ostringstream os;
    os << "stability number " << stability_ << " exceeds 1 (dt too large for dx, rates)";
    std::fprintf(stderr, "warning: %s\n", os.str().c_str());
    throw StabilityError(os.str());
  }

  const std::size_t total = static_cast<std::size_t>(R_) * S_ * N_;
  const std::size_t rn = static_cast<std::size_t>(R_) * N_;
  if (opt.warm_start) {
    const SlotField& w = *opt.warm_start;
    if (w.regimes != R_ || w.nodes != N_ || w.slots != S_ || w.v.size() != total)
      invalid("solver: warm start shape mismatch");
    psi_ = w.v;
  } else {
    psi_.assign(total, 0.0);
  }
  psi_next_.assign(total, 0.0);
  phi_.assign(rn, 0.0);
  mphi_.assign(rn, 0.0);
  if (kind_ == SystemKind::inflexible) tgt_cut_.assign(rn, 0.0);
  couple_.assign(total, 0.0);
  pm_.assign(total, 0.0);
  pp_.assign(total, 0.0);
  lambda_slot_.resize(S_);
  for (int s = 0; s < S_; ++s) {
    const bool hi = kind_ == SystemKind::flexible ? s == 1 : (s & 1) != 0;
    lambda_slot_[s] = hi ? tab_.lambda_hi : tab_.lambda_lo;
  }
  exit_.resize(R_);
  for (int i = 0; i < R_; ++i) exit_[i] = tab_.exit_rate(i);
  row_max_.assign(static_cast<std::size_t>(R_) * S_, 0.0);
  phi_min_i_.assign(R_, 0.0);
  phi_max_i_.assign(R_, 0.0);

  // Phi of the initial Psi (min over slots), so the first target pass is consistent.
  for (int i = 0; i < R_; ++i)
    for (int j = 0; j < N_; ++j) {
      double mn = psi_[(static_cast<std::size_t>(i) * S_) * N_ + j];
      for (int s = 1; s < S_; ++s)
        mn = std::min(mn, psi_[(static_cast<std::size_t>(i) * S_ + s) * N_ + j]);
      phi_[static_cast<std::size_t>(i) * N_ + j] = mn;
    }
}

void Marcher::refresh_targets() {
  if (kind_ == SystemKind::flexible) {
    intervention_raw(phi_.data(), R_, N_, tab_, mphi_.data(), nullptr, parallel_);
    return;
  }
  // Inflexible commitment targets: keep-slot target Phi + d, cut-slot target
  // Phi((1-zbar)x) + d + cost; the committed z admits no inner minimum.
  const double stay = 1.0 - tab_.zbar;
  maybe_parallel_for(R_, parallel_, [&](int i) {
    const double* row = phi_.data() + static_cast<std::size_t>(i) * N_;
    const double* cost = tab_.harvest_cost.data() + static_cast<std::size_t>(i) * N_;
    double* keep = mphi_.data() + static_cast<std::size_t>(i) * N_;
    double* cut = tgt_cut_.data() + static_cast<std::size_t>(i) * N_;
    for (int j = 0; j < N_; ++j) {
      keep[j] = row[j] + tab_.obs_cost;
      cut[j] = lerp_pos(row, N_, stay * j) + tab_.obs_cost + cost[j];
    }
  });
}

void Marcher::refresh_coupling() {
  const std::size_t block = static_cast<std::size_t>(S_) * N_;
  maybe_parallel_for(R_, parallel_, [&](int i) {
    double* out = couple_.data() + i * block;
    std::fill(out, out + block, 0.0);
    for (int k = 0; k < R_; ++k) {
      if (k == i) continue;
      const double w = tab_.switch_rate[static_cast<std::size_t>(i) * R_ + k];
      if (w == 0.0) continue;
      const double* src = psi_.data() + k * block;
      for (std::size_t t = 0; t < block; ++t) out[t] += w * src[t];
    }
  });
}

void Marcher::reconstruct_rows() {
  const double dx = grid_.dx();
  maybe_parallel_for(R_ * S_, parallel_, [&](int r) {
    const std::size_t base = static_cast<std::size_t>(r) * N_;
    weno3_derivatives({psi_.data() + base, static_cast<std::size_t>(N_)}, dx,
                      {pm_.data() + base, static_cast<std::size_t>(N_)},
                      {pp_.data() + base, static_cast<std::size_t>(N_)}, eps_);
  });
}

double Marcher::update_rows() {
  const double dt = grid_.dt;
  maybe_parallel_for(R_ * S_, parallel_, [&](int r) {
    const int i = r / S_;
    const int s = r % S_;
    const std::size_t base = static_cast<std::size_t>(r) * N_;
    const double* f = tab_.drift.data() + static_cast<std::size_t>(i) * N_;
    const double* h = tab_.disutility.data();
    const double* target = kind_ == SystemKind::flexible || s < 2
                               ? mphi_.data() + static_cast<std::size_t>(i) * N_
                               : tgt_cut_.data() + static_cast<std::size_t>(i) * N_;
    const double lam = lambda_slot_[s];
    const double w_exit = exit_[i];
    double local = 0.0;
    for (int j = 0; j < N_; ++j) {
      const double ps = psi_[base + j];
      const double ham = llf_hamiltonian(f[j], pm_[base + j], pp_[base + j]);
      const double upd = -tab_.delta * ps - ham - (w_exit * ps - couple_[base + j]) + h[j] -
                         lam * (ps - target[j]);
      psi_next_[base + j] = ps + dt * upd;
      local = std::max(local, std::abs(upd));
    }
    row_max_[r] = local;
  });
  double res = 0.0;
  for (double m : row_max_) res = std::max(res, m);
  return res;
}

void Marcher::refresh_phi() {
  maybe_parallel_for(R_, parallel_, [&](int i) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (int j = 0; j < N_; ++j) {
      double mn = psi_next_[(static_cast<std::size_t>(i) * S_) * N_ + j];
      for (int s = 1; s < S_; ++s)
        mn = std::min(mn, psi_next_[(static_cast<std::size_t>(i) * S_ + s) * N_ + j]);
      phi_[static_cast<std::size_t>(i) * N_ + j] = mn;
      lo = std::min(lo, mn);
      hi = std::max(hi, mn);
    }
    phi_min_i_[i] = lo;
    phi_max_i_[i] = hi;
  });
  for (int i = 0; i < R_; ++i) {
    worst_low_ = std::max(worst_low_, -phi_min_i_[i]);
    worst_high_ = std::max(worst_high_, phi_max_i_[i] - cap_);
  }
}

double Marcher::step() {
  refresh_targets();
  refresh_coupling();
  reconstruct_rows();
  const double res = update_rows();
  refresh_phi();
  std::swap(psi_, psi_next_);
  ++steps_;
  return res;
}

ValueField Marcher::phi_field() const {
  ValueField f;
  f.regimes = R_;
  f.nodes = N_;
  f.v = phi_;
  return f;
}

SlotField Marcher::psi_field() const {
  SlotField f;
  f.regimes = R_;
  f.nodes = N_;
  f.slots = S_;
  f.v = psi_;
  return f;
}

Solution Marcher::solve() {
  const auto t0 = std::chrono::steady_clock::now();
  const long limit = grid_.max_steps();
  double res = std::numeric_limits<double>::infinity();
  double prev = res;
  bool converged = false;
  int growing = 0;
  // A genuine blowup amplifies every step and rapidly dwarfs the value scale.
  // Sustained growth below this floor is legitimate: a warm start
  // re-equilibrating toward a new steady state raises the residual for long
  // stretches, but only up to the size of the parameter perturbation.
  const double divergence_floor = 0.05 * cap_;
  for (long k = 0; k < limit; ++k) {
    res = step();
    if (!std::isfinite(res)) {
      std::ostringstream os;
      os << "non-finite residual at step " << steps_ << " (stability number " << stability_ << ")";
      throw DivergenceError(os.str());
    }
    if (res < grid_.tol_ss) {
      converged = true;
      break;
    }
    if (res > prev) {
      if (++growing >= 1000 && res > divergence_floor) {
        std::ostringstream os;
        os << "residual grew for " << growing << " consecutive steps (now " << res << ")";
        throw DivergenceError(os.str());
      }
    } else {
      growing = 0;
    }
    prev = res;
  }

  Solution sol;
  sol.kind = kind_;
  sol.phi = phi_field();
  sol.psi = psi_field();
  sol.policy = kind_ == SystemKind::flexible ? extract_flexible_policy(sol.phi, sol.psi, tab_)
                                             : extract_inflexible_policy(sol.psi);

  SolveDiagnostics& d = sol.diag;
  d.steps = steps_;
  d.final_residual = res;
  d.converged = converged;
  d.stability_number = stability_;
  d.value_cap = cap_;
  d.max_bound_violation = std::max({worst_low_, worst_high_, 0.0});
  for (int i = 0; i < R_; ++i)
    for (int j = 0; j + 1 < N_; ++j)
      d.max_monotonicity_violation =
          std::max(d.max_monotonicity_violation, sol.phi.at(i, j) - sol.phi.at(i, j + 1));
  for (int i = 0; i < R_; ++i)
    for (int j = 0; j < N_; ++j) {
      double mn = sol.psi.at(i, 0, j);
      for (int s = 1; s < S_; ++s) mn = std::min(mn, sol.psi.at(i, s, j));
      d.max_consistency_gap = std::max(d.max_consistency_gap, std::abs(sol.phi.at(i, j) - mn));
    }
  {
    std::vector<double> m(static_cast<std::size_t>(R_) * N_);
    intervention_raw(sol.phi.v.data(), R_, N_, tab_, m.data(), nullptr, false);
    double gap = -std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < m.size(); ++t) gap = std::max(gap, m[t] - (sol.phi.v[t] + tab_.obs_cost));
    d.max_intervention_gap = std::max(gap, 0.0);
  }
  for (int i = 0; i < R_; ++i) d.phi_at_origin = std::max(d.phi_at_origin, std::abs(sol.phi.at(i, 0)));
  d.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return sol;
}

Solution solve_flexible(const StageTables& t, const Grid& g, const SolveOptions& opt) {
  return Marcher(SystemKind::flexible, t, g, opt).solve();
}

Solution solve_flexible(const RegimeChain& chain, const ModelParams& p, const Grid& g,
                        const SolveOptions& opt) {
  return solve_flexible(make_tables(chain, p, g), g, opt);
}

Solution solve_inflexible(const StageTables& t, const Grid& g, const SolveOptions& opt) {
  return Marcher(SystemKind::inflexible, t, g, opt).solve();
}

Solution solve_inflexible(const RegimeChain& chain, const ModelParams& p, const Grid& g,
                          const SolveOptions& opt) {
  return solve_inflexible(make_tables(chain, p, g), g, opt);
}

PolicyField extract_flexible_policy(const ValueField& phi, const SlotField& psi, const StageTables& t) {
  PolicyField pol;
  pol.regimes = phi.regimes;
  pol.nodes = phi.nodes;
  const std::size_t rn = static_cast<std::size_t>(pol.regimes) * pol.nodes;
  pol.harvest.assign(rn, 0);
  pol.intense.assign(rn, 0);
  std::vector<double> scratch(rn);
  apply_intervention(phi, t, scratch, pol.harvest, false);
  for (int i = 0; i < psi.regimes; ++i)
    for (int j = 0; j < psi.nodes; ++j)
      pol.intense[static_cast<std::size_t>(i) * psi.nodes + j] =
          psi.at(i, 1, j) < psi.at(i, 0, j) ? 1 : 0;  // tie prefers lambda_lo
  return pol;
}

PolicyField extract_inflexible_policy(const SlotField& psi) {
  PolicyField pol;
  pol.regimes = psi.regimes;
  pol.nodes = psi.nodes;
  const std::size_t rn = static_cast<std::size_t>(pol.regimes) * pol.nodes;
  pol.harvest.assign(rn, 0);
  pol.intense.assign(rn, 0);
  for (int i = 0; i < psi.regimes; ++i)
    for (int j = 0; j < psi.nodes; ++j) {
      int best = 0;
      double bv = psi.at(i, 0, j);
      for (int s = 1; s < psi.slots; ++s) {
        const double v = psi.at(i, s, j);
        if (v < bv) {  // ascending slot order encodes the tie preference (0, lambda_lo)
          bv = v;
          best = s;
        }
      }
      pol.harvest[static_cast<std::size_t>(i) * psi.nodes + j] = best >= 2 ? 1 : 0;
      pol.intense[static_cast<std::size_t>(i) * psi.nodes + j] = (best & 1) ? 1 : 0;
    }
  return pol;
}

VoiField value_of_information(const ValueField& inflex, const ValueField& flex) {
  if (inflex.regimes != flex.regimes || inflex.nodes != flex.nodes)
    invalid("value_of_information: field shape mismatch");
  VoiField out;
  out.v = ValueField::zeros(inflex.regimes, inflex.nodes);
  out.min_value = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < inflex.v.size(); ++t) {
    out.v.v[t] = inflex.v[t] - flex.v[t];
    out.min_value = std::min(out.min_value, out.v.v[t]);
    out.scale = std::max(out.scale, std::abs(inflex.v[t]));
  }
  if (out.min_value < -kVoiSlack * std::max(out.scale, 1e-300)) {
    std::ostringstream os;
    os << "value of information " << out.min_value << " below -" << kVoiSlack << " x scale "
       << out.scale << ": flexible/inflexible comparison violated";
    throw SolverError(os.str());
  }
  return out;
}

}  // namespace algae
