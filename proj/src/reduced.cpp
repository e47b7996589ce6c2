#include "algae/reduced.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace algae {

namespace {

[[noreturn]] void invalid(const std::string& msg) { throw std::invalid_argument(msg); }

// Residual of the defining linear system
//   a0 c0 - w01 c1 = 1 + r K zbar
//   -w10 c0 + a1 c1 = 1
// for candidate slopes (c0, c1), in the max norm.
double system_residual(const ReducedParams& p, double c0, double c1) {
  const double rhs0 = 1.0 + p.r * p.K * p.zbar;
  const double r0 = p.a0() * c0 - p.w01 * c1 - rhs0;
  const double r1 = -p.w10 * c0 + p.a1() * c1 - 1.0;
  return std::max(std::abs(r0), std::abs(r1));
}

}  // namespace

void ReducedParams::validate() const {
  const auto finite = [](double v) { return std::isfinite(v); };
  if (!finite(f0) || !finite(f1)) invalid("reduced: drift slopes must be finite");
  if (!(delta > 0.0) || !finite(delta)) invalid("reduced: delta must be > 0");
  if (!(r > 0.0) || !finite(r)) invalid("reduced: observation intensity r must be > 0");
  if (!(w01 >= 0.0) || !(w10 >= 0.0)) invalid("reduced: switch rates must be >= 0");
  if (!(zbar >= 0.0 && zbar < 1.0)) invalid("reduced: zbar must lie in [0,1)");
  if (!(K > 0.0)) invalid("reduced: cost coefficient K must be > 0");
  if (!(P > 1.0)) invalid("reduced: flood multiplier P must be > 1");
  if (!(a0() > 0.0)) invalid("reduced: delta - f0 + w01 + r zbar must be > 0");
  if (!(a1() > 0.0)) invalid("reduced: delta - f1 + w10 must be > 0");
  if (!(det() > 0.0)) invalid("reduced: system determinant must be > 0");
}

ReducedSolution closed_form_coefficients(const ReducedParams& p) {
  p.validate();
  const double a0 = p.a0(), a1 = p.a1(), L = p.det();
  const double g = 1.0 + p.r * p.K * p.zbar;

  ReducedSolution sol;
  sol.det = L;
  sol.c0 = (a1 * g + p.w01) / L;
  sol.c1 = (a0 + p.w10 * g) / L;
  sol.residual = system_residual(p, sol.c0, sol.c1);

  const double scale = std::max({1.0, g, a0 * std::abs(sol.c0), a1 * std::abs(sol.c1)});
  if (sol.residual > 1e-10 * scale) {
    // The explicit formulas disagree with the defining system; trust the
    // system and solve it by elimination with partial pivoting instead.
    double m[2][3] = {{a0, -p.w01, g}, {-p.w10, a1, 1.0}};
    if (std::abs(m[1][0]) > std::abs(m[0][0])) std::swap(m[0], m[1]);
    const double mult = m[1][0] / m[0][0];
    m[1][1] -= mult * m[0][1];
    m[1][2] -= mult * m[0][2];
    sol.c1 = m[1][2] / m[1][1];
    sol.c0 = (m[0][2] - m[0][1] * sol.c1) / m[0][0];
    sol.from_direct_solve = true;
    sol.residual = system_residual(p, sol.c0, sol.c1);
    if (sol.residual > 1e-12 * scale) {
      std::ostringstream os;
      os << "reduced: coefficients fail the defining system, residual " << sol.residual;
      throw std::runtime_error(os.str());
    }
  }

  sol.report = check_threshold_conditions(p, sol.c0, sol.c1);
  sol.pattern_valid = sol.report.harvest_pays_low && sol.report.implied_cap_flood;
  return sol;
}

ThresholdReport check_threshold_conditions(const ReducedParams& p, double c0, double c1) {
  ThresholdReport rep;
  rep.harvest_pays_low = c0 > p.K;
  rep.printed_cap_flood = c0 <= p.P * p.K;
  rep.implied_cap_flood = c1 <= p.P * p.K;
  // C0 > K rearranged so K appears once: (L - a1 r zbar) K < a1 + w01.
  rep.small_cost_form = (p.det() - p.a1() * p.r * p.zbar) * p.K < p.a1() + p.w01;
  rep.min_flood_multiplier = c1 / p.K;
  return rep;
}

ReducedConfig reduced_numeric_config(const ReducedParams& p, int nodes) {
  ReducedConfig cfg;
  cfg.exact = closed_form_coefficients(p);
  if (!cfg.exact.pattern_valid)
    invalid("reduced: harvest pattern infeasible for these parameters");
  if (!(p.zbar > 0.0)) invalid("reduced: numeric configuration needs zbar > 0");

  Grid& g = cfg.grid;
  g.nodes = nodes;
  const double max_f = std::max(std::abs(p.f0), std::abs(p.f1));
  const double rate_sum = max_f / g.dx() + p.delta + p.r + std::max(p.w01, p.w10);
  // Forward Euler with the biased third-order reconstruction needs headroom
  // well below the formal bound of 1: near 0.8 the march settles into a small
  // boundary limit cycle instead of steady state, at 0.4 it reaches round-off.
  g.dt = 0.4 / rate_sum;
  g.horizon = 150.0;
  g.tol_ss = 1e-9;
  g.validate();

  StageTables& t = cfg.tables;
  t.regimes = 2;
  t.nodes = nodes;
  t.delta = p.delta;
  t.obs_cost = 0.0;
  t.lambda_lo = p.r;
  t.lambda_hi = p.r;
  t.zbar = p.zbar;
  t.drift.resize(2 * static_cast<std::size_t>(nodes));
  t.disutility.resize(nodes);
  t.harvest_cost.resize(t.drift.size());
  t.switch_rate = {0.0, p.w01, p.w10, 0.0};
  for (int j = 0; j < nodes; ++j) {
    const double x = g.x(j);
    t.disutility[j] = x;
    t.drift[j] = p.f0 * x;
    t.drift[nodes + j] = p.f1 * x;
    t.harvest_cost[j] = p.K * p.zbar * x;
    t.harvest_cost[nodes + j] = p.P * p.K * p.zbar * x;
  }
  t.validate(g);
  return cfg;
}

}  // namespace algae
