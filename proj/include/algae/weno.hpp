#pragma once

// Third-order weighted-ENO derivative reconstruction on a uniform grid and
// the local Lax-Friedrichs numerical Hamiltonian used by the marching solver.

#include <cmath>
#include <span>

namespace algae {

inline constexpr double kWenoEps = 1e-6;

// One-sided derivative estimates at every node of a uniform grid.
// pm[j] is biased to data left of node j, pp[j] to data right of it.
//
// Interior nodes blend a fully one-sided slope candidate with a central one;
// the weights start from the (1/3, 2/3) optimal split and are damped by the
// squared undivided second differences of each stencil, so the scheme is
// third-order on smooth data and falls back toward the one-sided branch at
// kinks.  The two nodes nearest each boundary degrade gracefully instead of
// using ghost values: the outermost node takes a first-order difference, the
// next-to-outermost a second-order one-sided difference (both biases equal
// there).  Requires n >= 5.
void weno3_derivatives(std::span<const double> u, double dx,
                       std::span<double> pm, std::span<double> pp,
                       double eps = kWenoEps);

// Monotone flux for the linear Hamiltonian H(p) = -f p.  Reduces to exact
// upwinding: -f pp when f > 0, -f pm when f < 0, 0 when f = 0.
inline double llf_hamiltonian(double f, double pm, double pp) {
  return -0.5 * f * (pm + pp) - 0.5 * std::abs(f) * (pp - pm);
}

}  // namespace algae
