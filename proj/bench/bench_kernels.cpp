// Timing harness comparing the serial reference kernels against the OpenMP
// ones, plus a WENO microbenchmark.  The two code paths must agree bit for
// bit, so besides throughput this doubles as a cheap cross-check on the
// parallel kernels; mismatches abort with a nonzero exit.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "algae/hjb.hpp"
#include "algae/simulator.hpp"
#include "algae/weno.hpp"

using namespace algae;

namespace {

double now() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

void require(bool ok, const char* what) {
  if (!ok) {
    std::fprintf(stderr, "bench: serial/parallel mismatch in %s\n", what);
    std::exit(1);
  }
}

double bench_march(SystemKind kind, const StageTables& t, const Grid& g, int threads, long steps,
                   SlotField* out) {
  SolveOptions opt;
  opt.threads = threads;
  Marcher m(kind, t, g, opt);
  const double t0 = now();
  for (long s = 0; s < steps; ++s) m.step();
  const double dt = now() - t0;
  if (out) *out = m.psi_field();
  return steps / dt;
}

}  // namespace

int main(int argc, char** argv) {
  long march_steps = 300;
  long paths = 20000;
  if (argc > 1) march_steps = std::atol(argv[1]);
  if (argc > 2) paths = std::atol(argv[2]);

  ModelParams p;
  const RegimeChain chain = birth_death_chain(40, 0.5, 1.25, 0.3, 0.15, 0.5);
  Grid g;
  g.nodes = 401;
  g.dt = 3e-4;
  const StageTables tables = make_tables(chain, p, g);

  std::printf("marching kernels: %d regimes, %d nodes, %ld steps per run\n", tables.regimes,
              g.nodes, march_steps);
  for (const SystemKind kind : {SystemKind::flexible, SystemKind::inflexible}) {
    const char* name = kind == SystemKind::flexible ? "flexible  " : "inflexible";
    SlotField serial, parallel;
    const double s1 = bench_march(kind, tables, g, 1, march_steps, &serial);
    const double s0 = bench_march(kind, tables, g, 0, march_steps, &parallel);
    require(serial.v == parallel.v, name);
    std::printf("  %s  serial %8.1f steps/s   openmp %8.1f steps/s   speedup %.2fx\n", name, s1,
                s0, s0 / s1);
  }

  std::printf("monte carlo: %ld paths, horizon 100 days\n", paths);
  {
    const RegimeChain two = [] {
      RegimeChain c;
      c.discharge = {0.5, 5.5};
      c.switch_rate = {0.0, 0.3, 0.5, 0.0};
      return c;
    }();
    SimConfig sc;
    sc.paths = paths;
    sc.horizon = 100.0;
    sc.seed = 20260815;
    const ConstantFlexiblePolicy pol(true, false);
    sc.threads = 1;
    double t0 = now();
    const Estimate serial = estimate_flexible(two, p, pol, sc);
    const double r1 = paths / (now() - t0);
    sc.threads = 0;
    t0 = now();
    const Estimate parallel = estimate_flexible(two, p, pol, sc);
    const double r0 = paths / (now() - t0);
    require(serial.mean == parallel.mean && serial.se == parallel.se, "monte carlo");
    std::printf("  paths/s        serial %8.0f           openmp %8.0f           speedup %.2fx\n",
                r1, r0, r0 / r1);
    std::printf("  estimate %.6f +- %.6f\n", serial.mean, serial.se);
  }

  std::printf("weno3 reconstruction, 4096-node row\n");
  {
    const int n = 4096;
    std::vector<double> u(n), pm(n), pp(n);
    for (int j = 0; j < n; ++j) u[j] = std::sin(6.28318530717958647692 * j / (n - 1));
    const long reps = 2000;
    const double t0 = now();
    for (long r = 0; r < reps; ++r)
      weno3_derivatives(u, 1.0 / (n - 1), pm, pp);
    const double per = (now() - t0) / reps;
    std::printf("  %.2f us per row, %.0f Mnode/s\n", per * 1e6, n / per / 1e6);
  }
  return 0;
}
