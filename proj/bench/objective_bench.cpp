// Timing comparison of the parallel objective/gradient kernels against their
// single-threaded reference twins, on a synthesized backbone-scale instance.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>

#include "cachegain/central.hpp"
#include "cachegain/objective.hpp"
#include "cachegain/rng.hpp"
#include "cachegain/topo.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace cachegain;

namespace {

double ms_per_call(int reps, const std::function<void()>& fn) {
  fn();  // warm up
  auto t0 = std::chrono::steady_clock::now();
  for (int r = 0; r < reps; ++r) fn();
  auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

}  // namespace

int main(int argc, char** argv) {
  uint64_t seed = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 7;
  int reps = argc > 2 ? std::atoi(argv[2]) : 50;
  int scale = argc > 3 ? std::atoi(argv[3]) : 20;  // request multiplier

  TopologySpec spec;
  spec.kind = TopologyKind::dtelekom;
  spec.seed = seed;
  InstanceParams prm = default_params(spec.kind);
  prm.requests *= scale;
  Instance inst = synthesize_instance(generate(spec), prm, seed);

  auto rng = make_rng(seed, "bench");
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Matrix raw(inst.net.num_nodes, inst.net.num_items);
  for (int v = 0; v < raw.rows(); ++v)
    for (int i = 0; i < raw.cols(); ++i) raw(v, i) = u(rng);
  Allocation y = project_feasible(inst.net, raw);

  int threads = 1;
#ifdef _OPENMP
  threads = omp_get_max_threads();
#endif
  std::printf("instance: dtelekom seed=%llu, %zu request classes, %d threads\n",
              static_cast<unsigned long long>(seed), inst.demand.entries.size(),
              threads);
  std::printf("%-18s %12s %12s %9s %12s\n", "kernel", "serial ms", "parallel ms",
              "speedup", "rel diff");

  SurrogateParams sp{0.2};
  struct Row {
    const char* name;
    double serial_ms, par_ms, a, b;
  };
  Row rows[] = {
      {"caching_gain",
       ms_per_call(reps, [&] { serial::caching_gain(inst.net, inst.demand, y); }),
       ms_per_call(reps, [&] { caching_gain(inst.net, inst.demand, y); }),
       serial::caching_gain(inst.net, inst.demand, y),
       caching_gain(inst.net, inst.demand, y)},
      {"relaxed_gain",
       ms_per_call(reps, [&] { serial::relaxed_gain(inst.net, inst.demand, y); }),
       ms_per_call(reps, [&] { relaxed_gain(inst.net, inst.demand, y); }),
       serial::relaxed_gain(inst.net, inst.demand, y),
       relaxed_gain(inst.net, inst.demand, y)},
      {"smooth_gain",
       ms_per_call(reps,
                   [&] { serial::smooth_gain(inst.net, inst.demand, y, sp); }),
       ms_per_call(reps, [&] { smooth_gain(inst.net, inst.demand, y, sp); }),
       serial::smooth_gain(inst.net, inst.demand, y, sp),
       smooth_gain(inst.net, inst.demand, y, sp)},
  };
  for (const Row& r : rows) {
    double denom = std::max(1.0, std::abs(r.a));
    std::printf("%-18s %12.3f %12.3f %8.2fx %12.3g\n", r.name, r.serial_ms,
                r.par_ms, r.serial_ms / r.par_ms, std::abs(r.a - r.b) / denom);
  }

  Matrix gs = serial::smooth_gain_grad(inst.net, inst.demand, y, sp);
  Matrix gp = smooth_gain_grad(inst.net, inst.demand, y, sp);
  double diff = 0.0, norm = 1.0;
  for (size_t k = 0; k < gs.size(); ++k) {
    diff = std::max(diff, std::abs(gs.data()[k] - gp.data()[k]));
    norm = std::max(norm, std::abs(gs.data()[k]));
  }
  double t_s = ms_per_call(
      reps, [&] { serial::smooth_gain_grad(inst.net, inst.demand, y, sp); });
  double t_p =
      ms_per_call(reps, [&] { smooth_gain_grad(inst.net, inst.demand, y, sp); });
  std::printf("%-18s %12.3f %12.3f %8.2fx %12.3g\n", "smooth_gain_grad", t_s,
              t_p, t_s / t_p, diff / norm);
  return 0;
}
