#pragma once

// Exact solution of the two-regime reduced problem: linear drift f_i x,
// disutility h(x) = x, free observations (d = 0), no fixed harvest cost, one
// admissible observation intensity r, and harvest cost proportional to the
// state, K z x (times the flood multiplier P in regime 1).  Under the pattern
// "cut zbar in regime 0, never cut in regime 1" the value function is linear,
// Phi_i(x) = C_i x, and the slopes solve a 2x2 linear system in closed form.
// Serves as an independent oracle for the marching solver.

#include "algae/hjb.hpp"

namespace algae {

struct ReducedParams {
  double f0 = -0.05;     // drift slope of regime 0: f(0, x) = f0 x (1/day)
  double f1 = -0.5;      // drift slope of regime 1
  double w01 = 0.5;      // switch rate 0 -> 1 (1/day)
  double w10 = 0.5;      // switch rate 1 -> 0
  double delta = 0.2;    // discount rate (1/day)
  double r = 1.0 / 3.0;  // the single observation intensity (1/day)
  double zbar = 0.5;     // harvest fraction; 0 gives the no-control limit
  double K = 0.5;        // proportional cost coefficient, cost = K z x
  double P = 10.0;       // flood multiplier on the cost in regime 1

  // row coefficients of the linear system for (C0, C1)
  double a0() const { return delta - f0 + w01 + r * zbar; }
  double a1() const { return delta - f1 + w10; }
  double det() const { return a0() * a1() - w01 * w10; }

  void validate() const;  // throws std::invalid_argument (incl. det <= 0)
};

// Boolean report on the harvest-pattern threshold conditions.  The cap on the
// flood regime is evaluated both as printed in the source derivation (on C0)
// and in the form implied by the minimal-multiplier bound (on C1); the two can
// disagree, so both are reported and pattern_valid uses the implied form.
struct ThresholdReport {
  bool harvest_pays_low = false;   // C0 > K: cutting pays in regime 0
  bool printed_cap_flood = false;  // C0 <= P K (printed variant)
  bool implied_cap_flood = false;  // C1 <= P K (implied variant)
  bool small_cost_form = false;    // rearranged form of C0 > K:
                                   // (L - a1 r zbar) K < a1 + w01
  double min_flood_multiplier = 0.0;  // least P with C1 <= P K
};

struct ReducedSolution {
  double c0 = 0.0;         // Phi_0(x) = c0 x
  double c1 = 0.0;
  double det = 0.0;        // determinant of the 2x2 system
  double residual = 0.0;   // max row residual of the returned coefficients
  bool from_direct_solve = false;  // printed formulas disagreed; dense solve won
  bool pattern_valid = false;      // harvest_pays_low && implied_cap_flood
  ThresholdReport report;
};

// Closed-form slopes plus the threshold report.  The explicit formulas are
// verified against the defining linear system on every call; if their residual
// exceeds 1e-10 a direct 2x2 solve replaces them (flagged), and a residual
// above 1e-12 after that throws.
ReducedSolution closed_form_coefficients(const ReducedParams& p);

ThresholdReport check_threshold_conditions(const ReducedParams& p, double c0, double c1);

// Grid + stage tables realizing the reduced problem numerically on [0,1]:
// linear drift, h = x, zero observation cost, both intensity slots pinned to
// r.  dt is chosen for a stability number of ~0.4 (forward Euler with the
// biased reconstruction needs headroom below the formal bound); horizon and
// tolerance are defaults the caller may tighten.  Requires pattern_valid and
// zbar > 0.
struct ReducedConfig {
  StageTables tables;
  Grid grid;
  ReducedSolution exact;
};

ReducedConfig reduced_numeric_config(const ReducedParams& p, int nodes);

}  // namespace algae
