#include "algae/weno.hpp"

#include <stdexcept>

namespace algae {

namespace {

// Left-biased estimate from the three consecutive undivided differences
// d1 = u[j-1]-u[j-2], d2 = u[j]-u[j-1], d3 = u[j+1]-u[j].  Candidates are the
// one-sided parabola through {j-2, j-1, j} and the central one through
// {j-1, j, j+1}; smoothness is the squared second difference of each stencil.
inline double left_biased(double d1, double d2, double d3, double inv2dx, double eps) {
  const double sb = (d2 - d1) * (d2 - d1);
  const double sc = (d3 - d2) * (d3 - d2);
  const double ab = (1.0 / 3.0) / ((eps + sb) * (eps + sb));
  const double ac = (2.0 / 3.0) / ((eps + sc) * (eps + sc));
  const double wb = ab / (ab + ac);
  return ((3.0 * d2 - d1) * wb + (d2 + d3) * (1.0 - wb)) * inv2dx;
}

}  // namespace

void weno3_derivatives(std::span<const double> u, double dx,
                       std::span<double> pm, std::span<double> pp, double eps) {
  const std::size_t n = u.size();
  if (n < 5) throw std::invalid_argument("weno3_derivatives: need at least 5 nodes");
  if (pm.size() != n || pp.size() != n) throw std::invalid_argument("weno3_derivatives: output size mismatch");
  if (!(dx > 0.0) || !(eps > 0.0)) throw std::invalid_argument("weno3_derivatives: dx and eps must be > 0");

  const double inv = 1.0 / dx;
  const double inv2 = 0.5 / dx;

  pm[0] = pp[0] = (u[1] - u[0]) * inv;
  pm[1] = pp[1] = (-3.0 * u[1] + 4.0 * u[2] - u[3]) * inv2;
  pm[n - 2] = pp[n - 2] = (3.0 * u[n - 2] - 4.0 * u[n - 3] + u[n - 4]) * inv2;
  pm[n - 1] = pp[n - 1] = (u[n - 1] - u[n - 2]) * inv;

  for (std::size_t j = 2; j + 2 < n; ++j) {
    pm[j] = left_biased(u[j - 1] - u[j - 2], u[j] - u[j - 1], u[j + 1] - u[j], inv2, eps);
    // Right bias is the left bias of the reversed, negated data.
    pp[j] = -left_biased(u[j + 1] - u[j + 2], u[j] - u[j + 1], u[j - 1] - u[j], inv2, eps);
  }
}

}  // namespace algae
