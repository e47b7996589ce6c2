#include "algae/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace algae {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSimpsonTol = 1e-10;

// Run body(k) for k in [0, n).  Iterations are independent; the parallel and
// serial paths perform identical per-index work.
template <class Body>
void for_each_path(long n, bool parallel, Body&& body) {
#ifdef _OPENMP
  if (parallel) {
#pragma omp parallel for schedule(static)
    for (long k = 0; k < n; ++k) body(k);
    return;
  }
#else
  (void)parallel;
#endif
  for (long k = 0; k < n; ++k) body(k);
}

// Adaptive Simpson refinement with the standard Richardson acceptance test.
template <class F>
double simpson_refine(const F& g, double a, double b, double fa, double fm, double fb,
                      double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = g(lm), frm = g(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double correction = left + right - whole;
  if (depth <= 0 || std::abs(correction) <= 15.0 * tol)
    return left + right + correction / 15.0;
  return simpson_refine(g, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_refine(g, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

template <class F>
double adaptive_simpson(const F& g, double a, double b, double tol) {
  const double fa = g(a), fb = g(b), fm = g(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_refine(g, a, b, fa, fm, fb, whole, tol, 30);
}

}  // namespace

void SimConfig::validate(const RegimeChain& chain, const ModelParams& p) const {
  chain.validate();
  p.validate();
  if (start_regime < 0 || start_regime >= chain.regimes())
    throw std::invalid_argument("sim: start_regime " + std::to_string(start_regime) +
                                " outside [0, " + std::to_string(chain.top()) + "]");
  if (!(start_population >= 0.0 && start_population <= 1.0))
    throw std::invalid_argument("sim: start_population must lie in [0, 1]");
  if (!(horizon > 0.0)) throw std::invalid_argument("sim: horizon must be positive");
  if (std::exp(-p.delta * horizon) > 1e-8)
    throw std::invalid_argument(
        "sim: horizon too short: exp(-delta * horizon) must be <= 1e-8 so the "
        "truncated tail is negligible");
  if (paths < 1) throw std::invalid_argument("sim: paths must be >= 1");
  if (!(ode_substep > 0.0)) throw std::invalid_argument("sim: ode_substep must be positive");
  if (threads < 0) throw std::invalid_argument("sim: threads must be >= 0");
}

SwitchDraw ctmc_next_switch(const RegimeChain& chain, int regime, PathRng& rng) {
  SwitchDraw draw;
  draw.next = regime;
  const double total = chain.exit_rate(regime);
  if (!(total > 0.0)) {
    draw.sojourn = kInf;  // absorbing regime: no draws consumed
    return draw;
  }
  const int n = chain.regimes();
  draw.sojourn = rng.exponential(total);
  const std::span<const double> row(&chain.switch_rate[static_cast<std::size_t>(regime) * n],
                                    static_cast<std::size_t>(n));
  draw.next = static_cast<int>(rng.pick(row, total));
  if (draw.next == regime) {
    // the walk's end-of-row fallback can land on the zero diagonal; take the
    // last genuine destination instead
    for (int k = n - 1; k >= 0; --k) {
      if (k != regime && row[k] > 0.0) {
        draw.next = k;
        break;
      }
    }
  }
  return draw;
}

double ode_segment(const RegimeChain& chain, const ModelParams& p, int i, double x0, double dt) {
  const double x = clamp_unit(x0);
  if (!(dt > 0.0) || x == 0.0) return x;
  // x' = rho x - beta x^2 with rho = mu - eta Q_i, beta = mu / c_i
  const double rho = p.mu - p.eta * chain.discharge[static_cast<std::size_t>(i)];
  const double beta = p.mu / capacity(chain, p, i);
  const double rt = rho * dt;
  double xt;
  if (std::abs(rt) < 1e-8) {
    // expm1(rt)/rho to third order; exact at rho = 0 (pure logistic decay)
    const double s = dt * (1.0 + 0.5 * rt * (1.0 + rt / 3.0));
    xt = x * std::exp(rt) / (1.0 + beta * x * s);
  } else if (rho > 0.0) {
    // overflow-safe form: divide through by e^{rt}
    xt = x / (std::exp(-rt) + beta * x * (-std::expm1(-rt)) / rho);
  } else {
    xt = x * std::exp(rt) / (1.0 + beta * x * std::expm1(rt) / rho);
  }
  return std::clamp(xt, 0.0, 1.0);
}

double ode_segment_rk4(const RegimeChain& chain, const ModelParams& p, int i, double x0,
                       double dt, double substep) {
  double x = clamp_unit(x0);
  if (!(dt > 0.0)) return x;
  if (!(substep > 0.0)) throw std::invalid_argument("sim: ode_substep must be positive");
  const long steps = std::max(1L, static_cast<long>(std::ceil(dt / substep - 1e-12)));
  const double h = dt / static_cast<double>(steps);
  // stage states may poke slightly outside [0,1]; clamp before evaluating
  const auto f = [&](double v) { return growth_rate(chain, p, i, std::clamp(v, 0.0, 1.0)); };
  for (long k = 0; k < steps; ++k) {
    const double k1 = f(x);
    const double k2 = f(x + 0.5 * h * k1);
    const double k3 = f(x + 0.5 * h * k2);
    const double k4 = f(x + h * k3);
    x = std::clamp(x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4), 0.0, 1.0);
  }
  return x;
}

double discounted_disutility(const RegimeChain& chain, const ModelParams& p, int i, double x0,
                             double t0, double dt, bool use_rk4, double substep) {
  if (!(dt > 0.0)) return 0.0;
  const auto g = [&](double s) {
    const double xs = use_rk4 ? ode_segment_rk4(chain, p, i, x0, s, substep)
                              : ode_segment(chain, p, i, x0, s);
    return stock_disutility(p, xs) * std::exp(-p.delta * s);
  };
  return std::exp(-p.delta * t0) * adaptive_simpson(g, 0.0, dt, kSimpsonTol);
}

FieldFlexiblePolicy::FieldFlexiblePolicy(const Solution& sol, const RegimeChain& chain,
                                         const ModelParams& p)
    : phi_(sol.phi), psi_(sol.psi), params_(p) {
  if (sol.kind != SystemKind::flexible)
    throw std::invalid_argument("sim: FieldFlexiblePolicy needs a flexible solution");
  if (psi_.slots != kFlexSlots || phi_.regimes != chain.regimes() || phi_.nodes < 2)
    throw std::invalid_argument("sim: solution fields do not match the chain");
}

bool FieldFlexiblePolicy::harvest(int regime, double x) const {
  const double* row = phi_.row(regime);
  const double keep = lerp_unit(row, phi_.nodes, x);
  const double cut = lerp_unit(row, phi_.nodes, (1.0 - params_.zbar) * x) +
                     harvest_cost(params_, regime, x, params_.zbar);
  return cut < keep;  // ties keep the stock
}

bool FieldFlexiblePolicy::intense(int regime, double x) const {
  const double* lo = psi_.v.data() + psi_.idx(regime, 0, 0);
  const double* hi = psi_.v.data() + psi_.idx(regime, 1, 0);
  return lerp_unit(hi, psi_.nodes, x) < lerp_unit(lo, psi_.nodes, x);  // ties stay coarse
}

FieldInflexiblePolicy::FieldInflexiblePolicy(const Solution& sol) : psi_(sol.psi) {
  if (sol.kind != SystemKind::inflexible || psi_.slots != kCommitSlots)
    throw std::invalid_argument("sim: FieldInflexiblePolicy needs an inflexible solution");
}

void FieldInflexiblePolicy::commit(int regime, double x, bool& harvest_next,
                                   bool& intense_now) const {
  int best = 0;
  double best_value = kInf;
  for (int s = 0; s < kCommitSlots; ++s) {
    const double* row = psi_.v.data() + psi_.idx(regime, s, 0);
    const double value = lerp_unit(row, psi_.nodes, x);
    if (value < best_value) {  // ascending slot order breaks ties
      best_value = value;
      best = s;
    }
  }
  harvest_next = best >= 2;
  intense_now = (best & 1) != 0;
}

namespace {

// Shared event loop.  The decision hooks differ between the two systems:
// flexible policies choose the harvest at the observation itself (from the
// pre-harvest state) and the intensity from the post-harvest state; inflexible
// policies committed the harvest at the previous observation and commit the
// next one (plus the intensity) from the post-harvest state.
//
// Clock discipline, frozen so seeded runs are reproducible:
//   - t = 0 is a free decision epoch: no cost, no harvest; the initial
//     intensity (and inflexible commitment) is taken at the start state
//   - draw order: observation clock first, then the switch draw
//     (sojourn, destination); an absorbing regime consumes no draws
//   - at a switch only the switch clock is redrawn; the observation clock
//     keeps running
//   - at an observation only the observation clock is redrawn, from the
//     freshly committed intensity
//   - simultaneous events resolve the switch first
template <class DecideHarvest, class CommitNext>
PathResult run_path(const RegimeChain& chain, const ModelParams& p, const SimConfig& cfg,
                    std::uint64_t path_seed, std::vector<SimEvent>* log,
                    DecideHarvest&& decide_harvest, CommitNext&& commit_next) {
  PathRng rng(path_seed);
  PathResult res;
  double t = 0.0;
  int i = cfg.start_regime;
  double x = clamp_unit(cfg.start_population);

  double lambda = commit_next(i, x);
  double next_obs = rng.exponential(lambda);
  SwitchDraw sw = ctmc_next_switch(chain, i, rng);
  double next_switch = sw.sojourn;
  if (log) {
    log->clear();
    log->push_back({0.0, 'o', i, x, x, 0.0, lambda});
  }

  while (true) {
    const double t_next = std::min(next_switch, next_obs);
    if (t_next >= cfg.horizon) {
      res.disutility +=
          discounted_disutility(chain, p, i, x, t, cfg.horizon - t, cfg.use_rk4, cfg.ode_substep);
      break;
    }
    const double seg = t_next - t;
    res.disutility += discounted_disutility(chain, p, i, x, t, seg, cfg.use_rk4, cfg.ode_substep);
    x = cfg.use_rk4 ? ode_segment_rk4(chain, p, i, x, seg, cfg.ode_substep)
                    : ode_segment(chain, p, i, x, seg);
    t = t_next;

    if (next_switch <= next_obs) {
      i = sw.next;
      ++res.switches;
      sw = ctmc_next_switch(chain, i, rng);
      next_switch = t + sw.sojourn;
      if (log) log->push_back({t, 's', i, x, x, 0.0, lambda});
    } else {
      ++res.observations;
      const double disc = std::exp(-p.delta * t);
      const bool cut = decide_harvest(i, x);
      const double z = cut ? p.zbar : 0.0;
      res.observation += disc * p.d;
      if (cut) {
        res.harvest += disc * harvest_cost(p, i, x, p.zbar);
        ++res.harvests;
      }
      const double x_pre = x;
      x = (1.0 - z) * x;
      lambda = commit_next(i, x);
      next_obs = t + rng.exponential(lambda);
      if (log) log->push_back({t, 'o', i, x_pre, x, z, lambda});
    }
  }
  return res;
}

template <class PathFn>
Estimate estimate_paths(const RegimeChain& chain, const ModelParams& p, const SimConfig& cfg,
                        std::vector<PathResult>* per_path, PathFn&& one_path) {
  cfg.validate(chain, p);
  const long n = cfg.paths;
  std::vector<PathResult> results(static_cast<std::size_t>(n));
#ifdef _OPENMP
  if (cfg.threads > 1) omp_set_num_threads(cfg.threads);
#endif
  for_each_path(n, cfg.threads != 1, [&](long k) {
    results[static_cast<std::size_t>(k)] = one_path(cfg.seed + static_cast<std::uint64_t>(k));
  });

  // serial reduction over the path index: results are independent of thread
  // count and scheduling
  Estimate est;
  est.paths = n;
  double sum_dis = 0.0, sum_obs = 0.0, sum_harv = 0.0, sum_total = 0.0;
  for (const PathResult& r : results) {
    sum_dis += r.disutility;
    sum_obs += r.observation;
    sum_harv += r.harvest;
    sum_total += r.total();
  }
  const double dn = static_cast<double>(n);
  est.disutility = sum_dis / dn;
  est.observation = sum_obs / dn;
  est.harvest = sum_harv / dn;
  est.mean = est.disutility + est.observation + est.harvest;
  if (n > 1) {
    const double mean_total = sum_total / dn;
    double ss = 0.0;
    for (const PathResult& r : results) {
      const double dev = r.total() - mean_total;
      ss += dev * dev;
    }
    est.se = std::sqrt(ss / (dn * (dn - 1.0)));
  }
  double cost_cap = 0.0;
  for (int i = 0; i < chain.regimes(); ++i)
    cost_cap = std::max(cost_cap, harvest_cost(p, i, 1.0, p.zbar));
  est.truncation_bound = (stock_disutility(p, 1.0) + p.lambda_hi * (p.d + cost_cap)) / p.delta *
                         std::exp(-p.delta * cfg.horizon);
  if (per_path) *per_path = std::move(results);
  return est;
}

}  // namespace

PathResult simulate_flexible_path(const RegimeChain& chain, const ModelParams& p,
                                  const FlexiblePolicy& pol, const SimConfig& cfg,
                                  std::uint64_t path_seed, std::vector<SimEvent>* log) {
  return run_path(
      chain, p, cfg, path_seed, log,
      [&](int i, double x) { return pol.harvest(i, x); },
      [&](int i, double x) { return pol.intense(i, x) ? p.lambda_hi : p.lambda_lo; });
}

PathResult simulate_inflexible_path(const RegimeChain& chain, const ModelParams& p,
                                    const InflexiblePolicy& pol, const SimConfig& cfg,
                                    std::uint64_t path_seed, std::vector<SimEvent>* log) {
  // the harvest applied at an observation was committed at the previous one
  bool committed = false;
  return run_path(
      chain, p, cfg, path_seed, log,
      [&committed](int, double) { return committed; },
      [&](int i, double x) {
        bool harvest_next = false, intense_now = false;
        pol.commit(i, x, harvest_next, intense_now);
        committed = harvest_next;
        return intense_now ? p.lambda_hi : p.lambda_lo;
      });
}

Estimate estimate_flexible(const RegimeChain& chain, const ModelParams& p,
                           const FlexiblePolicy& pol, const SimConfig& cfg,
                           std::vector<PathResult>* per_path) {
  return estimate_paths(chain, p, cfg, per_path, [&](std::uint64_t seed) {
    return simulate_flexible_path(chain, p, pol, cfg, seed, nullptr);
  });
}

Estimate estimate_inflexible(const RegimeChain& chain, const ModelParams& p,
                             const InflexiblePolicy& pol, const SimConfig& cfg,
                             std::vector<PathResult>* per_path) {
  return estimate_paths(chain, p, cfg, per_path, [&](std::uint64_t seed) {
    return simulate_inflexible_path(chain, p, pol, cfg, seed, nullptr);
  });
}

}  // namespace algae
