#pragma once

#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "cachegain/model.hpp"
#include "cachegain/objective.hpp"

namespace cachegain {

struct GameParams {
  double penalty = 1.0;  // weight on squared positive budget error
  double step = 0.1;     // gradient-play step size
  double alpha = 0.2;    // surrogate smoothing width
};

// Joint state of the allocation game: per-node fractional rows, per-node
// budget-error scalars, and per-node budget shares. The invariant
// sum(err) == sum(row totals) - sum(share) is preserved by every update.
struct GameState {
  Allocation y;
  std::vector<double> err;    // e_v
  std::vector<double> share;  // c0_v

  double conservation_gap() const;  // |sum(err) - (total(y) - sum(share))|
};

// One node's move in a round: the allocation increment and the error mass
// pushed to each neighbor (ordered as net.adj[v]).
struct NodeAction {
  std::vector<double> y_hat;
  std::vector<double> err_out;
};

// share_v = (budget - slack) / |V|; err_v = row total - share_v. Throws
// std::invalid_argument if the initial rows overshoot the reduced budget
// (sum(err) must start nonpositive) or y0 rows are infeasible.
GameState init_state(const Network& net, double budget, double slack,
                     const Allocation& y0);

// Euclidean projection of one row onto its admissible set: designated
// coordinates pinned to 1, the rest clipped to [0,1], and a uniform shift
// applied when the capacity constraint binds. designated must be sorted.
std::vector<double> project_omega(std::span<const double> y, int cap,
                                  std::span<const ItemId> designated);

// err_out[k] = step * penalty * (pos(err_v) - pos(err_u)) for the k-th
// neighbor u of v.
std::vector<double> compute_error_actions(const Network& net,
                                          const GameState& s,
                                          const GameParams& p, NodeId v);

// Projected gradient-play increment for node v: the row moves by
// step * (grad_v - penalty * pos(err_v)) and is projected back onto its
// admissible set; returns new_row - old_row.
std::vector<double> compute_allocation_action(const Network& net,
                                              const GameState& s,
                                              const GameParams& p, NodeId v,
                                              std::span<const double> grad_v);

// Applies all actions computed against the same old state: rows move by
// y_hat, errors absorb their own row change plus net neighbor transfers.
GameState apply_updates(const Network& net, const GameState& s,
                        const std::vector<NodeAction>& actions);

// One synchronous round with the given gradient matrix (exact or estimated).
GameState advance_round(const Network& net, const GameState& s,
                        const GameParams& p, const Matrix& grad);

// Same round, but error exchanges on edges where skip_edge(u, v) returns true
// are dropped in both directions at once, so lost messages never break the
// conservation identity. skip_edge is called once per undirected edge, in
// ascending (u, v) order with u < v.
GameState advance_round(const Network& net, const GameState& s,
                        const GameParams& p, const Matrix& grad,
                        const std::function<bool(NodeId, NodeId)>& skip_edge);

// Descent function of the dynamics: -smooth_gain + (penalty/2) * sum of
// squared positive errors.
double potential(const Network& net, const Demand& demand, const GameState& s,
                 const GameParams& p);

// Largest step size with guaranteed descent, from the curvature bound
// baseline_cost / alpha of the smooth gain plus the penalty curvature.
double step_bound(double c0, double penalty, double alpha);
// Same bound computed from an over-estimate c0_bar of the baseline cost with
// penalty = mu0 * c0_bar.
double step_bound_practical(double c0_bar, double mu0, double alpha);

// (max over nodes of the projected-step infinity-norm at the current state,
// max over nodes of |pos(err_v) - uniform share of the positive total
// overshoot|). Both are zero exactly at an equilibrium.
std::pair<double, double> equilibrium_residual(const Network& net,
                                               const Demand& demand,
                                               const GameState& s,
                                               const GameParams& p);

// Budget change: rebase shares to the new budget and absorb the difference
// into the local errors so the conservation identity survives the change.
void rebase_budget(const Network& net, GameState& s, double new_budget,
                   double slack);

}  // namespace cachegain
