#include "cachegain/game.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cachegain {

namespace {

inline double pos(double x) { return x > 0.0 ? x : 0.0; }

}  // namespace

double GameState::conservation_gap() const {
  double se = 0.0, sy = 0.0, sc = 0.0;
  for (double e : err) se += e;
  sy = y.total();
  for (double c : share) sc += c;
  return std::abs(se - (sy - sc));
}

GameState init_state(const Network& net, double budget, double slack,
                     const Allocation& y0) {
  if (y0.rows() != net.num_nodes || y0.cols() != net.num_items)
    throw std::invalid_argument("init_state: dimension mismatch");
  if (slack <= 0.0 || slack >= 1.0)
    throw std::invalid_argument("init_state: slack must lie in (0,1)");
  auto des = net.designated_by_node();
  GameState s;
  s.y = y0;
  s.share.assign(net.num_nodes, (budget - slack) / net.num_nodes);
  s.err.resize(net.num_nodes);
  double sum_err = 0.0;
  for (NodeId v = 0; v < net.num_nodes; ++v) {
    double row = 0.0;
    for (ItemId i = 0; i < net.num_items; ++i) {
      double e = y0(v, i);
      if (e < -1e-12 || e > 1.0 + 1e-12)
        throw std::invalid_argument("init_state: row entry outside [0,1]");
      row += e;
    }
    if (row > net.caps[v] + 1e-9)
      throw std::invalid_argument("init_state: row exceeds node capacity");
    for (ItemId i : des[v])
      if (std::abs(y0(v, i) - 1.0) > 1e-12)
        throw std::invalid_argument("init_state: designated entry not pinned");
    s.err[v] = row - s.share[v];
    sum_err += s.err[v];
  }
  if (sum_err > 1e-9)
    throw std::invalid_argument(
        "init_state: initial rows overshoot the reduced budget");
  return s;
}

std::vector<double> project_omega(std::span<const double> y, int cap,
                                  std::span<const ItemId> designated) {
  const int n = static_cast<int>(y.size());
  const int ndes = static_cast<int>(designated.size());
  if (cap < ndes)
    throw std::invalid_argument("project_omega: capacity below designated load");

  std::vector<char> pinned(n, 0);
  for (ItemId i : designated) pinned[i] = 1;

  auto assemble = [&](double shift, std::vector<double>& out) {
    double total = ndes;
    for (int i = 0; i < n; ++i) {
      if (pinned[i]) {
        out[i] = 1.0;
      } else {
        out[i] = std::clamp(y[i] - shift, 0.0, 1.0);
        total += out[i];
      }
    }
    return total;
  };

  std::vector<double> z(n);
  double total = assemble(0.0, z);
  if (total <= cap + 1e-12) return z;

  double lo = 0.0, hi = 0.0;
  for (int i = 0; i < n; ++i)
    if (!pinned[i]) hi = std::max(hi, y[i]);
  for (int it = 0; it < 100 && hi - lo > 1e-14; ++it) {
    double mid = 0.5 * (lo + hi);
    if (assemble(mid, z) > cap)
      lo = mid;
    else
      hi = mid;
  }
  assemble(hi, z);
  return z;
}

std::vector<double> compute_error_actions(const Network& net,
                                          const GameState& s,
                                          const GameParams& p, NodeId v) {
  const auto& nbrs = net.adj[v];
  std::vector<double> out(nbrs.size());
  const double ev = pos(s.err[v]);
  for (size_t k = 0; k < nbrs.size(); ++k)
    out[k] = p.step * p.penalty * (ev - pos(s.err[nbrs[k]]));
  return out;
}

std::vector<double> compute_allocation_action(const Network& net,
                                              const GameState& s,
                                              const GameParams& p, NodeId v,
                                              std::span<const double> grad_v) {
  const int n = net.num_items;
  const double drift = p.penalty * pos(s.err[v]);
  std::vector<double> target(n);
  for (int i = 0; i < n; ++i)
    target[i] = s.y(v, i) + p.step * (grad_v[i] - drift);
  std::vector<ItemId> des;
  for (ItemId i = 0; i < n; ++i)
    if (net.is_server(v, i)) des.push_back(i);
  auto z = project_omega(target, net.caps[v], des);
  for (int i = 0; i < n; ++i) z[i] -= s.y(v, i);
  return z;
}

GameState apply_updates(const Network& net, const GameState& s,
                        const std::vector<NodeAction>& actions) {
  GameState next = s;
  for (NodeId v = 0; v < net.num_nodes; ++v) {
    const auto& a = actions[v];
    double inc = 0.0;
    for (ItemId i = 0; i < net.num_items; ++i) {
      next.y(v, i) += a.y_hat[i];
      inc += a.y_hat[i];
    }
    next.err[v] += inc;
    for (double out : a.err_out) next.err[v] -= out;
  }
  // incoming transfers, accumulated after all outgoing ones for symmetry
  for (NodeId v = 0; v < net.num_nodes; ++v) {
    const auto& nbrs = net.adj[v];
    for (size_t k = 0; k < nbrs.size(); ++k)
      next.err[nbrs[k]] += actions[v].err_out[k];
  }
  return next;
}

GameState advance_round(const Network& net, const GameState& s,
                        const GameParams& p, const Matrix& grad) {
  std::vector<NodeAction> actions(net.num_nodes);
  for (NodeId v = 0; v < net.num_nodes; ++v) {
    actions[v].y_hat = compute_allocation_action(net, s, p, v, grad.row(v));
    actions[v].err_out = compute_error_actions(net, s, p, v);
  }
  return apply_updates(net, s, actions);
}

GameState advance_round(const Network& net, const GameState& s,
                        const GameParams& p, const Matrix& grad,
                        const std::function<bool(NodeId, NodeId)>& skip_edge) {
  std::vector<NodeAction> actions(net.num_nodes);
  for (NodeId v = 0; v < net.num_nodes; ++v) {
    actions[v].y_hat = compute_allocation_action(net, s, p, v, grad.row(v));
    actions[v].err_out = compute_error_actions(net, s, p, v);
  }
  if (skip_edge) {
    for (NodeId u = 0; u < net.num_nodes; ++u) {
      const auto& nbrs = net.adj[u];
      for (size_t k = 0; k < nbrs.size(); ++k) {
        NodeId v = nbrs[k];
        if (v <= u) continue;
        if (!skip_edge(u, v)) continue;
        actions[u].err_out[k] = 0.0;
        const auto& back = net.adj[v];
        size_t j = std::lower_bound(back.begin(), back.end(), u) - back.begin();
        actions[v].err_out[j] = 0.0;
      }
    }
  }
  return apply_updates(net, s, actions);
}

double potential(const Network& net, const Demand& demand, const GameState& s,
                 const GameParams& p) {
  double pen = 0.0;
  for (double e : s.err) {
    double ep = pos(e);
    pen += ep * ep;
  }
  SurrogateParams sp{p.alpha};
  return -smooth_gain(net, demand, s.y, sp) + 0.5 * p.penalty * pen;
}

double step_bound(double c0, double penalty, double alpha) {
  return 2.0 / (c0 / alpha + 2.0 * penalty);
}

double step_bound_practical(double c0_bar, double mu0, double alpha) {
  return 2.0 / ((1.0 / alpha + 2.0 * mu0) * c0_bar);
}

std::pair<double, double> equilibrium_residual(const Network& net,
                                               const Demand& demand,
                                               const GameState& s,
                                               const GameParams& p) {
  SurrogateParams sp{p.alpha};
  Matrix grad = smooth_gain_grad(net, demand, s.y, sp);
  double step_norm = 0.0;
  for (NodeId v = 0; v < net.num_nodes; ++v) {
    auto inc = compute_allocation_action(net, s, p, v, grad.row(v));
    for (double d : inc) step_norm = std::max(step_norm, std::abs(d));
  }
  double overshoot = s.y.total();
  for (double c : s.share) overshoot -= c;
  const double even = pos(overshoot) / net.num_nodes;
  double spread = 0.0;
  for (double e : s.err) spread = std::max(spread, std::abs(pos(e) - even));
  return {step_norm, spread};
}

void rebase_budget(const Network& net, GameState& s, double new_budget,
                   double slack) {
  const double fresh = (new_budget - slack) / net.num_nodes;
  for (NodeId v = 0; v < net.num_nodes; ++v) {
    s.err[v] += s.share[v] - fresh;
    s.share[v] = fresh;
  }
}

}  // namespace cachegain
