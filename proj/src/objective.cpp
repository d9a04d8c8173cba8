#include "cachegain/objective.hpp"

#include <algorithm>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace cachegain {

double sat(double x, const SurrogateParams& p) {
  const double hi = 1.0 + 0.5 * p.alpha;
  if (x >= hi) return 1.0;
  const double lo = 1.0 - 0.5 * p.alpha;
  // strictly above the knot: at x == lo the identity branch is exact while
  // the quadratic evaluates to lo only up to rounding
  if (x > lo) {
    const double d = hi - x;
    return 1.0 - d * d / (2.0 * p.alpha);
  }
  return x;
}

double sat_prime(double x, const SurrogateParams& p) {
  const double hi = 1.0 + 0.5 * p.alpha;
  if (x >= hi) return 0.0;
  const double lo = 1.0 - 0.5 * p.alpha;
  if (x > lo) return (hi - x) / p.alpha;
  return 1.0;
}

namespace {

double entry_path_weight(const Demand::Entry& e) {
  double w = 0.0;
  for (double h : e.hop_w) w += h;
  return w;
}

double entry_gain(const Demand::Entry& e, const Matrix& x) {
  const auto& p = e.req.path;
  double miss = 1.0, g = 0.0;
  for (size_t j = 0; j + 1 < p.size(); ++j) {
    miss *= 1.0 - x(p[j], e.req.item);
    g += e.hop_w[j] * (1.0 - miss);
  }
  return e.rate * g;
}

double entry_relaxed(const Demand::Entry& e, const Matrix& y) {
  const auto& p = e.req.path;
  double s = 0.0, g = 0.0;
  for (size_t j = 0; j + 1 < p.size(); ++j) {
    s += y(p[j], e.req.item);
    g += e.hop_w[j] * std::min(1.0, s);
  }
  return e.rate * g;
}

double entry_smooth(const Demand::Entry& e, const Matrix& y,
                    const SurrogateParams& prm) {
  const auto& p = e.req.path;
  double s = 0.0, g = 0.0;
  for (size_t j = 0; j + 1 < p.size(); ++j) {
    s += y(p[j], e.req.item);
    g += e.hop_w[j] * sat(s, prm);
  }
  return e.rate * g;
}

void entry_grad(const Demand::Entry& e, const Matrix& y,
                const SurrogateParams& prm, Matrix& g) {
  const auto& p = e.req.path;
  if (p.size() < 2) return;
  const ItemId i = e.req.item;
  const int last = static_cast<int>(p.size()) - 2;
  double s = 0.0;
  for (int j = 0; j <= last; ++j) s += y(p[j], i);
  double run = 0.0;
  for (int j = last; j >= 0; --j) {
    run += e.hop_w[j] * sat_prime(s, prm);
    g(p[j], i) += e.rate * run;
    s -= y(p[j], i);
  }
}

// Deterministic parallel reduction: static chunks, partials combined in
// thread-index order.
// Below this many request classes a parallel region costs more than it saves.
constexpr int kParallelCutoff = 256;

template <typename Fn>
double sum_over_entries(const Demand& demand, Fn&& per_entry) {
  const int n = static_cast<int>(demand.entries.size());
#ifdef _OPENMP
  const int nt = omp_get_max_threads();
  if (nt > 1 && n >= kParallelCutoff) {
    std::vector<double> part(nt, 0.0);
#pragma omp parallel num_threads(nt)
    {
      const int t = omp_get_thread_num();
      double acc = 0.0;
#pragma omp for schedule(static) nowait
      for (int r = 0; r < n; ++r) acc += per_entry(demand.entries[r]);
      part[t] = acc;
    }
    double s = 0.0;
    for (double x : part) s += x;
    return s;
  }
#endif
  double s = 0.0;
  for (int r = 0; r < n; ++r) s += per_entry(demand.entries[r]);
  return s;
}

}  // namespace

double baseline_cost(const Network& net, const Demand& demand) {
  (void)net;
  return sum_over_entries(demand, [](const Demand::Entry& e) {
    return e.rate * entry_path_weight(e);
  });
}

double request_cost(const Network& net, const Demand::Entry& entry,
                    const Matrix& x) {
  (void)net;
  const auto& p = entry.req.path;
  double miss = 1.0, c = 0.0;
  for (size_t j = 0; j + 1 < p.size(); ++j) {
    miss *= 1.0 - x(p[j], entry.req.item);
    c += entry.hop_w[j] * miss;
  }
  return c;
}

double caching_gain(const Network& net, const Demand& demand, const Matrix& x) {
  (void)net;
  return sum_over_entries(demand,
                          [&](const Demand::Entry& e) { return entry_gain(e, x); });
}

double relaxed_gain(const Network& net, const Demand& demand, const Matrix& y) {
  (void)net;
  return sum_over_entries(
      demand, [&](const Demand::Entry& e) { return entry_relaxed(e, y); });
}

double smooth_gain(const Network& net, const Demand& demand, const Matrix& y,
                   const SurrogateParams& p) {
  (void)net;
  return sum_over_entries(
      demand, [&](const Demand::Entry& e) { return entry_smooth(e, y, p); });
}

void smooth_gain_grad_into(const Network& net, const Demand& demand,
                           const Matrix& y, const SurrogateParams& p,
                           Matrix& out) {
  out = Matrix(net.num_nodes, net.num_items, 0.0);
  const int n = static_cast<int>(demand.entries.size());
#ifdef _OPENMP
  const int nt = omp_get_max_threads();
  if (nt > 1 && n >= kParallelCutoff) {
    std::vector<Matrix> part(nt, Matrix(net.num_nodes, net.num_items, 0.0));
#pragma omp parallel num_threads(nt)
    {
      Matrix& g = part[omp_get_thread_num()];
#pragma omp for schedule(static) nowait
      for (int r = 0; r < n; ++r) entry_grad(demand.entries[r], y, p, g);
    }
    for (const Matrix& g : part) {
      double* o = out.data();
      const double* q = g.data();
      for (size_t k = 0; k < out.size(); ++k) o[k] += q[k];
    }
    return;
  }
#endif
  for (int r = 0; r < n; ++r) entry_grad(demand.entries[r], y, p, out);
}

Matrix smooth_gain_grad(const Network& net, const Demand& demand,
                        const Matrix& y, const SurrogateParams& p) {
  Matrix g;
  smooth_gain_grad_into(net, demand, y, p, g);
  return g;
}

namespace serial {

double baseline_cost(const Network& net, const Demand& demand) {
  (void)net;
  double s = 0.0;
  for (const auto& e : demand.entries) s += e.rate * entry_path_weight(e);
  return s;
}

double caching_gain(const Network& net, const Demand& demand, const Matrix& x) {
  (void)net;
  double s = 0.0;
  for (const auto& e : demand.entries) s += entry_gain(e, x);
  return s;
}

double relaxed_gain(const Network& net, const Demand& demand, const Matrix& y) {
  (void)net;
  double s = 0.0;
  for (const auto& e : demand.entries) s += entry_relaxed(e, y);
  return s;
}

double smooth_gain(const Network& net, const Demand& demand, const Matrix& y,
                   const SurrogateParams& p) {
  (void)net;
  double s = 0.0;
  for (const auto& e : demand.entries) s += entry_smooth(e, y, p);
  return s;
}

Matrix smooth_gain_grad(const Network& net, const Demand& demand,
                        const Matrix& y, const SurrogateParams& p) {
  Matrix g(net.num_nodes, net.num_items, 0.0);
  for (const auto& e : demand.entries) entry_grad(e, y, p, g);
  return g;
}

}  // namespace serial

}  // namespace cachegain
