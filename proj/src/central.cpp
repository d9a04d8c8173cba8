#include "cachegain/central.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace cachegain {

namespace {

// Per-row view used by the joint projection: free (non-designated) values
// sorted descending with prefix sums, so the clipped sum under a uniform
// shift is O(log n) and the row multiplier solve is a linear scan.
struct RowProj {
  std::vector<double> sorted;  // free values, descending
  std::vector<double> prefix;  // prefix[k] = sum of first k sorted values
  int cap_free = 0;            // cap minus designated count

  // sum over free coords of clamp(value - shift, 0, 1)
  double clipped_sum(double shift) const {
    // first index with sorted[k] - shift < 1
    int a = static_cast<int>(
        std::lower_bound(sorted.begin(), sorted.end(), 1.0 + shift,
                         std::greater<double>()) -
        sorted.begin());
    // first index with sorted[k] - shift <= 0
    int b = static_cast<int>(std::lower_bound(sorted.begin(), sorted.end(),
                                              shift, std::greater<double>()) -
                             sorted.begin());
    if (b < a) b = a;
    return a + (prefix[b] - prefix[a]) - (b - a) * shift;
  }

  // contribution of this row to the global total under shift
  double row_total(double shift) const {
    return std::min(clipped_sum(shift), static_cast<double>(cap_free));
  }

  // row multiplier making the clipped sum equal cap_free (requires
  // clipped_sum(shift) > cap_free)
  double solve_row_shift(double shift) const {
    double lo = 0.0, hi = sorted.empty() ? 0.0 : sorted.front() - shift;
    for (int it = 0; it < 100 && hi - lo > 1e-15; ++it) {
      double mid = 0.5 * (lo + hi);
      if (clipped_sum(shift + mid) > cap_free)
        lo = mid;
      else
        hi = mid;
    }
    return hi;
  }
};

}  // namespace

Allocation project_feasible(const Network& net, const Matrix& y) {
  if (y.rows() != net.num_nodes || y.cols() != net.num_items)
    throw std::invalid_argument("project_feasible: dimension mismatch");
  const int V = net.num_nodes, C = net.num_items;
  auto des = net.designated_by_node();

  std::vector<RowProj> rows(V);
  std::vector<std::vector<char>> pinned(V, std::vector<char>(C, 0));
  double max_free = 0.0;
  for (NodeId v = 0; v < V; ++v) {
    for (ItemId i : des[v]) pinned[v][i] = 1;
    auto& r = rows[v];
    r.cap_free = net.caps[v] - static_cast<int>(des[v].size());
    if (r.cap_free < 0)
      throw std::invalid_argument("project_feasible: designated load over cap");
    r.sorted.reserve(C - des[v].size());
    for (ItemId i = 0; i < C; ++i)
      if (!pinned[v][i]) {
        r.sorted.push_back(y(v, i));
        max_free = std::max(max_free, y(v, i));
      }
    std::sort(r.sorted.begin(), r.sorted.end(), std::greater<double>());
    r.prefix.resize(r.sorted.size() + 1, 0.0);
    for (size_t k = 0; k < r.sorted.size(); ++k)
      r.prefix[k + 1] = r.prefix[k] + r.sorted[k];
  }

  const double des_total = net.total_designated();
  auto global_total = [&](double shift) {
    double t = des_total;
    for (const auto& r : rows) t += r.row_total(shift);
    return t;
  };

  double shift = 0.0;
  if (global_total(0.0) > net.budget + 1e-12) {
    double lo = 0.0, hi = max_free;
    for (int it = 0; it < 100 && hi - lo > 1e-14; ++it) {
      double mid = 0.5 * (lo + hi);
      if (global_total(mid) > net.budget)
        lo = mid;
      else
        hi = mid;
    }
    shift = hi;
  }

  Allocation z(V, C, 0.0);
  for (NodeId v = 0; v < V; ++v) {
    double row_shift = shift;
    if (rows[v].clipped_sum(shift) > rows[v].cap_free)
      row_shift += rows[v].solve_row_shift(shift);
    for (ItemId i = 0; i < C; ++i)
      z(v, i) = pinned[v][i] ? 1.0 : std::clamp(y(v, i) - row_shift, 0.0, 1.0);
  }
  return z;
}

Allocation linear_max_feasible(const Network& net, const Matrix& g) {
  if (g.rows() != net.num_nodes || g.cols() != net.num_items)
    throw std::invalid_argument("linear_max_feasible: dimension mismatch");
  Allocation s = net.designated_placement();
  auto des = net.designated_by_node();
  std::vector<double> room(net.num_nodes);
  for (NodeId v = 0; v < net.num_nodes; ++v)
    room[v] = net.caps[v] - static_cast<double>(des[v].size());
  double left = net.budget - net.total_designated();

  std::vector<std::pair<NodeId, ItemId>> order;
  order.reserve(static_cast<size_t>(net.num_nodes) * net.num_items);
  for (NodeId v = 0; v < net.num_nodes; ++v)
    for (ItemId i = 0; i < net.num_items; ++i)
      if (s(v, i) == 0.0 && g(v, i) > 0.0) order.emplace_back(v, i);
  std::sort(order.begin(), order.end(), [&](const auto& a, const auto& b) {
    double ga = g(a.first, a.second), gb = g(b.first, b.second);
    if (ga != gb) return ga > gb;
    return a < b;
  });
  for (const auto& [v, i] : order) {
    if (left <= 0.0) break;
    double take = std::min({1.0, room[v], left});
    if (take <= 0.0) continue;
    s(v, i) = take;
    room[v] -= take;
    left -= take;
  }
  return s;
}

Placement greedy_placement(const Network& net, const Demand& demand) {
  const int V = net.num_nodes, C = net.num_items;
  Placement x = net.designated_placement();
  std::vector<int> used(V, 0);
  auto des = net.designated_by_node();
  for (NodeId v = 0; v < V; ++v) used[v] = static_cast<int>(des[v].size());
  for (NodeId v = 0; v < V; ++v)
    if (used[v] > net.caps[v])
      throw std::invalid_argument("greedy_placement: designated load over cap");
  int slots = static_cast<int>(std::floor(net.budget + 1e-9)) -
              net.total_designated();
  if (slots < 0)
    throw std::invalid_argument("greedy_placement: designated load over budget");

  Matrix delta(V, C, 0.0);
  while (slots > 0) {
    std::fill(delta.data(), delta.data() + delta.size(), 0.0);
    for (const auto& e : demand.entries) {
      const auto& p = e.req.path;
      if (p.size() < 2) continue;
      const ItemId i = e.req.item;
      const int last = static_cast<int>(p.size()) - 2;
      // forward miss products, then a backward suffix accumulation gives the
      // marginal gain of caching at every path node in one pass
      double miss = 1.0;
      std::vector<double> pref(last + 1);
      for (int j = 0; j <= last; ++j) {
        miss *= 1.0 - x(p[j], i);
        pref[j] = miss;
      }
      double run = 0.0;
      for (int j = last; j >= 0; --j) {
        run += e.hop_w[j] * pref[j];
        if (x(p[j], i) == 0.0) delta(p[j], i) += e.rate * run;
      }
    }
    NodeId bv = -1;
    ItemId bi = -1;
    double best = 0.0;
    for (NodeId v = 0; v < V; ++v) {
      if (used[v] >= net.caps[v]) continue;
      for (ItemId i = 0; i < C; ++i)
        if (x(v, i) == 0.0 && delta(v, i) > best) {
          best = delta(v, i);
          bv = v;
          bi = i;
        }
    }
    if (bv < 0) break;
    x(bv, bi) = 1.0;
    ++used[bv];
    --slots;
  }
  return x;
}

RelaxedSolution solve_relaxation(const Network& net, const Demand& demand,
                                 const SurrogateParams& p, double step,
                                 int max_iters, double tol) {
  RelaxedSolution sol;
  const double c0 = baseline_cost(net, demand);
  sol.y_star = net.designated_placement();
  if (c0 <= 0.0) {
    sol.l_tilde_star = 0.0;
    sol.l_upper = 0.0;
    sol.converged = true;
    return sol;
  }

  const double eta0 = step > 0.0 ? step : p.alpha / c0;
  double eta = eta0;
  double cur = smooth_gain(net, demand, sol.y_star, p);
  // Accepted steps must strictly improve; otherwise the iterate can slide
  // along a flat face indefinitely without tripping the movement test.
  const double min_gain = 1e-12 * std::max(1.0, c0);

  for (int it = 0; it < max_iters; ++it) {
    Matrix g = smooth_gain_grad(net, demand, sol.y_star, p);
    Matrix target = sol.y_star;
    bool accepted = false;
    double move = 0.0;
    for (int bt = 0; bt < 60; ++bt) {
      double* t = target.data();
      const double* yv = sol.y_star.data();
      const double* gv = g.data();
      for (size_t k = 0; k < target.size(); ++k) t[k] = yv[k] + eta * gv[k];
      Allocation cand = project_feasible(net, target);
      double val = smooth_gain(net, demand, cand, p);
      if (val >= cur + min_gain) {
        move = 0.0;
        const double* a = cand.data();
        const double* b = sol.y_star.data();
        for (size_t k = 0; k < cand.size(); ++k)
          move = std::max(move, std::abs(a[k] - b[k]));
        sol.y_star = std::move(cand);
        cur = val;
        accepted = true;
        break;
      }
      eta *= 0.5;
    }
    sol.iterations = it + 1;
    if (!accepted) {
      sol.converged = true;  // no improving step at vanishing step size
      break;
    }
    eta = std::min(eta * 1.25, eta0 * 64.0);
    if (move <= tol) {
      sol.converged = true;
      break;
    }
  }

  sol.l_tilde_star = cur;
  Matrix g = smooth_gain_grad(net, demand, sol.y_star, p);
  Allocation s = linear_max_feasible(net, g);
  double gap = 0.0;
  const double* gd = g.data();
  const double* sd = s.data();
  const double* yd = sol.y_star.data();
  for (size_t k = 0; k < g.size(); ++k) gap += gd[k] * (sd[k] - yd[k]);
  sol.l_upper = cur + std::max(0.0, gap) + p.alpha / 8.0 * c0;
  return sol;
}

Placement pipage_round(const Network& net, const Demand& demand,
                       const Allocation& y_star) {
  if (!is_feasible_d2(net, y_star, 1e-7))
    throw std::invalid_argument("pipage_round: infeasible input");
  const int V = net.num_nodes, C = net.num_items;
  Placement x = y_star;
  auto des = net.designated_by_node();
  std::vector<std::vector<char>> pinned(V, std::vector<char>(C, 0));
  for (NodeId v = 0; v < V; ++v)
    for (ItemId i : des[v]) {
      pinned[v][i] = 1;
      x(v, i) = 1.0;
    }
  auto snap = [&](NodeId v, ItemId i) {
    if (x(v, i) <= 1e-9) x(v, i) = 0.0;
    if (x(v, i) >= 1.0 - 1e-9) x(v, i) = 1.0;
  };
  for (NodeId v = 0; v < V; ++v)
    for (ItemId i = 0; i < C; ++i) snap(v, i);

  auto fractional = [&]() {
    std::vector<std::pair<NodeId, ItemId>> f;
    for (NodeId v = 0; v < V; ++v)
      for (ItemId i = 0; i < C; ++i)
        if (!pinned[v][i] && x(v, i) > 0.0 && x(v, i) < 1.0) f.emplace_back(v, i);
    return f;
  };

  while (true) {
    auto f = fractional();
    if (f.empty()) break;
    if (f.size() == 1) {
      x(f[0].first, f[0].second) = 0.0;
      break;
    }
    // prefer a pair within one node: moves there never touch row sums
    size_t a = 0, b = 1;
    for (size_t k = 0; k + 1 < f.size(); ++k)
      if (f[k].first == f[k + 1].first) {
        a = k;
        b = k + 1;
        break;
      }
    auto [v1, i1] = f[a];
    auto [v2, i2] = f[b];
    const double y1 = x(v1, i1), y2 = x(v2, i2);
    const double up = std::min(1.0 - y1, y2);    // push mass toward (v1,i1)
    const double down = std::min(y1, 1.0 - y2);  // push mass toward (v2,i2)

    x(v1, i1) = y1 + up;
    x(v2, i2) = y2 - up;
    const double f_up = caching_gain(net, demand, x);
    x(v1, i1) = y1 - down;
    x(v2, i2) = y2 + down;
    const double f_down = caching_gain(net, demand, x);
    if (f_up >= f_down) {
      x(v1, i1) = y1 + up;
      x(v2, i2) = y2 - up;
    }
    snap(v1, i1);
    snap(v2, i2);
  }
  return x;
}

RelaxedSolution equal_capacity_bound(const Network& net, const Demand& demand,
                                     const SurrogateParams& p, double step,
                                     int max_iters, double tol) {
  const int des_total = net.total_designated();
  const int free_slots =
      static_cast<int>(std::floor(net.budget + 1e-9)) - des_total;
  if (free_slots < 0)
    throw std::invalid_argument(
        "equal_capacity_bound: budget below designated load");
  const int base = free_slots / net.num_nodes;
  const int rem = free_slots % net.num_nodes;
  auto des = net.designated_by_node();

  Network even = net;
  double cap_sum = 0.0;
  for (NodeId v = 0; v < net.num_nodes; ++v) {
    even.caps[v] = base + (v < rem ? 1 : 0) + static_cast<int>(des[v].size());
    cap_sum += even.caps[v];
  }
  even.budget = cap_sum;  // global constraint is tight by construction
  return solve_relaxation(even, demand, p, step, max_iters, tol);
}

}  // namespace cachegain
