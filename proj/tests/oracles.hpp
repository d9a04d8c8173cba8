#pragma once

// Independent reference computations the library results are checked against.
// Everything here is written as plain loops straight from the definitions,
// with none of the library's early stops, suffix tricks, or parallelism.

#include <bit>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "cachegain/model.hpp"
#include "cachegain/objective.hpp"

namespace cachegain::testing {

inline double oracle_sat(double x, double alpha) {
  const double lo = 1.0 - 0.5 * alpha, hi = 1.0 + 0.5 * alpha;
  if (x <= lo) return x;
  if (x >= hi) return 1.0;
  const double d = hi - x;
  return 1.0 - d * d / (2.0 * alpha);
}

inline double oracle_sat_prime(double x, double alpha) {
  const double lo = 1.0 - 0.5 * alpha, hi = 1.0 + 0.5 * alpha;
  if (x <= lo) return 1.0;
  if (x >= hi) return 0.0;
  return (hi - x) / alpha;
}

inline double oracle_gain(const Network& net, const Demand& demand,
                          const Matrix& x) {
  (void)net;
  double total = 0.0;
  for (const auto& e : demand.entries) {
    const auto& p = e.req.path;
    for (size_t k = 0; k < e.hop_w.size(); ++k) {
      double miss = 1.0;
      for (size_t l = 0; l <= k; ++l) miss *= 1.0 - x(p[l], e.req.item);
      total += e.rate * e.hop_w[k] * (1.0 - miss);
    }
  }
  return total;
}

inline double oracle_relaxed(const Network& net, const Demand& demand,
                             const Matrix& y) {
  (void)net;
  double total = 0.0;
  for (const auto& e : demand.entries) {
    const auto& p = e.req.path;
    for (size_t k = 0; k < e.hop_w.size(); ++k) {
      double s = 0.0;
      for (size_t l = 0; l <= k; ++l) s += y(p[l], e.req.item);
      total += e.rate * e.hop_w[k] * std::min(1.0, s);
    }
  }
  return total;
}

inline double oracle_smooth(const Network& net, const Demand& demand,
                            const Matrix& y, double alpha) {
  (void)net;
  double total = 0.0;
  for (const auto& e : demand.entries) {
    const auto& p = e.req.path;
    for (size_t k = 0; k < e.hop_w.size(); ++k) {
      double s = 0.0;
      for (size_t l = 0; l <= k; ++l) s += y(p[l], e.req.item);
      total += e.rate * e.hop_w[k] * oracle_sat(s, alpha);
    }
  }
  return total;
}

// Partial derivative of oracle_smooth at one coordinate, from the definition:
// every prefix that contains (v, i) contributes rate * hop weight * slope.
inline double oracle_smooth_partial(const Network& net, const Demand& demand,
                                    const Matrix& y, double alpha, NodeId v,
                                    ItemId i) {
  (void)net;
  double total = 0.0;
  for (const auto& e : demand.entries) {
    if (e.req.item != i) continue;
    const auto& p = e.req.path;
    for (size_t k = 0; k < e.hop_w.size(); ++k) {
      bool contains = false;
      for (size_t l = 0; l <= k; ++l) contains = contains || p[l] == v;
      if (!contains) continue;
      double s = 0.0;
      for (size_t l = 0; l <= k; ++l) s += y(p[l], e.req.item);
      total += e.rate * e.hop_w[k] * oracle_sat_prime(s, alpha);
    }
  }
  return total;
}

// Central finite difference of the library's smooth gain.
inline double fd_partial(const Network& net, const Demand& demand,
                         const Matrix& y, const SurrogateParams& sp, NodeId v,
                         ItemId i, double h = 1e-6) {
  Matrix yp = y, ym = y;
  yp(v, i) += h;
  ym(v, i) -= h;
  return (smooth_gain(net, demand, yp, sp) - smooth_gain(net, demand, ym, sp)) /
         (2.0 * h);
}

// Exhaustive optimum over feasible binary placements (designated entries
// pinned, per-node caps, global budget). Intended for tiny instances only.
inline std::pair<double, Placement> brute_force_optimum(const Network& net,
                                                        const Demand& demand) {
  std::vector<std::pair<NodeId, ItemId>> cells;
  for (NodeId v = 0; v < net.num_nodes; ++v)
    for (ItemId i = 0; i < net.num_items; ++i)
      if (!net.is_server(v, i)) cells.emplace_back(v, i);

  Placement base = net.designated_placement();
  std::vector<int> base_load(net.num_nodes, 0);
  for (NodeId v = 0; v < net.num_nodes; ++v)
    for (ItemId i = 0; i < net.num_items; ++i)
      if (base(v, i) > 0.5) ++base_load[v];
  const int slots = static_cast<int>(net.budget) - net.total_designated();

  double best = -1.0;
  Placement best_x = base;
  const size_t n = cells.size();
  for (uint64_t mask = 0; mask < (uint64_t{1} << n); ++mask) {
    if (static_cast<int>(std::popcount(mask)) > slots) continue;
    Placement x = base;
    std::vector<int> load = base_load;
    bool ok = true;
    for (size_t k = 0; k < n && ok; ++k)
      if (mask >> k & 1) {
        auto [v, i] = cells[k];
        x(v, i) = 1.0;
        ok = ++load[v] <= net.caps[v];
      }
    if (!ok) continue;
    double f = oracle_gain(net, demand, x);
    if (f > best) {
      best = f;
      best_x = x;
    }
  }
  return {best, best_x};
}

}  // namespace cachegain::testing
