#include "algae/model.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace algae {

namespace {

[[noreturn]] void invalid(const std::string& msg) { throw std::invalid_argument(msg); }

void require(bool ok, const char* msg) {
  if (!ok) invalid(msg);
}

}  // namespace

double RegimeChain::exit_rate(int i) const {
  double s = 0.0;
  for (int j = 0; j < regimes(); ++j)
    if (j != i) s += rate(i, j);
  return s;
}

double RegimeChain::max_exit_rate() const {
  double s = 0.0;
  for (int i = 0; i < regimes(); ++i) s = std::max(s, exit_rate(i));
  return s;
}

void RegimeChain::validate() const {
  require(!discharge.empty(), "chain: at least one regime required");
  const std::size_t n = discharge.size();
  require(switch_rate.size() == n * n, "chain: switch-rate matrix must be (top+1)^2");
  for (std::size_t i = 0; i < n; ++i) {
    require(std::isfinite(discharge[i]) && discharge[i] > 0.0, "chain: discharges must be positive and finite");
    if (i > 0) require(discharge[i] > discharge[i - 1], "chain: discharges must be strictly increasing");
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double w = switch_rate[i * n + j];
      require(std::isfinite(w) && w >= 0.0, "chain: off-diagonal switch rates must be >= 0 and finite");
    }
}

void ModelParams::validate() const {
  require(mu > 0.0, "mu must be > 0");
  require(eta > 0.0, "eta must be > 0");
  require(a >= 0.0, "a must be >= 0");
  require(b > 0.0, "b must be > 0");
  require(delta > 0.0, "delta must be > 0");
  require(d > 0.0, "d must be > 0");
  require(K0 >= 0.0, "K0 must be >= 0");
  require(K1 > 0.0, "K1 must be > 0");
  require(P > 1.0, "P must be > 1");
  require(flood_threshold >= 0, "flood_threshold must be >= 0");
  require(zbar > 0.0 && zbar < 1.0, "zbar must lie in (0,1)");
  require(lambda_lo > 0.0 && lambda_lo < lambda_hi, "need 0 < lambda_lo < lambda_hi");
  require(m > 0.0, "m must be > 0");
}

double clamp_unit(double x) {
  if (x >= 0.0 && x <= 1.0) return x;
  if (x < 0.0 && x >= -kUnitSlack) return 0.0;
  if (x > 1.0 && x <= 1.0 + kUnitSlack) return 1.0;
  std::ostringstream os;
  os << "population " << x << " outside [0,1]";
  throw std::domain_error(os.str());
}

namespace {

void check_regime(const RegimeChain& chain, int i) {
  if (i < 0 || i >= chain.regimes()) invalid("regime index out of range");
}

}  // namespace

double capacity(const RegimeChain& chain, const ModelParams& p, int i) {
  check_regime(chain, i);
  return (p.a * chain.discharge[i] + p.b) / (p.a * chain.discharge[chain.top()] + p.b);
}

double growth_rate(const RegimeChain& chain, const ModelParams& p, int i, double x) {
  check_regime(chain, i);
  x = clamp_unit(x);
  const double c = capacity(chain, p, i);
  return p.mu * x * (1.0 - x / c) - p.eta * chain.discharge[i] * x;
}

double equilibrium_population(const RegimeChain& chain, const ModelParams& p, int i) {
  check_regime(chain, i);
  const double xstar = capacity(chain, p, i) * (1.0 - p.eta * chain.discharge[i] / p.mu);
  return xstar > 0.0 ? xstar : 0.0;
}

double stock_disutility(const ModelParams& p, double x) {
  x = clamp_unit(x);
  if (p.m == 1.0) return x;
  if (p.m == 2.0) return x * x;
  return std::pow(x, p.m);
}

double harvest_cost(const ModelParams& p, int i, double x, double z) {
  if (z == 0.0) return 0.0;
  if (std::abs(z - p.zbar) > kUnitSlack) invalid("harvest fraction must be 0 or zbar");
  x = clamp_unit(x);
  const double base = p.K0 + p.K1 * x * p.zbar;
  return i > p.flood_threshold ? p.P * base : base;
}

RegimeChain two_state_chain(double q0, double q1, double w01, double w10) {
  RegimeChain c;
  c.discharge = {q0, q1};
  c.switch_rate = {0.0, w01, w10, 0.0};
  c.validate();
  return c;
}

RegimeChain birth_death_chain(int top, double q0, double dq, double up0, double up_decay, double down) {
  RegimeChain c;
  const int n = top + 1;
  c.discharge.resize(n);
  c.switch_rate.assign(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) c.discharge[i] = q0 + dq * i;
  for (int i = 0; i < n; ++i) {
    if (i < top) c.switch_rate[static_cast<std::size_t>(i) * n + (i + 1)] = up0 * std::exp(-up_decay * i);
    if (i > 0) c.switch_rate[static_cast<std::size_t>(i) * n + (i - 1)] = down;
  }
  c.validate();
  return c;
}

}  // namespace algae
