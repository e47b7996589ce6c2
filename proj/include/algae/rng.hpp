#pragma once

// Deterministic random streams shared by the simulator and the synthetic-data
// generator.  Only the raw mt19937_64 output is consumed; all transforms are
// written out here so that sequences are identical across standard libraries
// (std::*_distribution implementations differ between vendors).

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>

namespace algae {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

class PathRng {
 public:
  explicit PathRng(std::uint64_t seed) : eng_(splitmix64(seed)) {}

  // uniform on [0, 1) with 53 random bits
  double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  // exponential waiting time; rate 0 means "never" (+inf)
  double exponential(double rate) {
    if (!(rate > 0.0)) return std::numeric_limits<double>::infinity();
    return -std::log1p(-uniform01()) / rate;
  }

  // index drawn proportionally to weight[k]; total must be the exact sum
  int pick(std::span<const double> weight, double total) {
    double u = uniform01() * total;
    for (std::size_t k = 0; k + 1 < weight.size(); ++k) {
      u -= weight[k];
      if (u < 0.0) return static_cast<int>(k);
    }
    return static_cast<int>(weight.size()) - 1;
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace algae
