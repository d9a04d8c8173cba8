#pragma once

#include "cachegain/model.hpp"
#include "cachegain/objective.hpp"

namespace cachegain {

struct RelaxedSolution {
  Allocation y_star;
  double l_tilde_star = 0.0;  // smooth_gain at y_star
  // Certified upper bound on the optimum of relaxed_gain over the feasible
  // set: smooth_gain(y_star) + duality gap from a linear maximization +
  // (alpha/8) * baseline_cost. Valid whether or not the solve converged.
  double l_upper = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Starts from the designated placement and repeatedly adds the feasible
// (node, item) entry with the largest marginal caching gain until no entry
// strictly improves or the budget and caps are exhausted. Ties go to the
// smallest (node, item) pair. Throws if the designated load already violates
// caps or budget.
Placement greedy_placement(const Network& net, const Demand& demand);

// Projected gradient ascent with backtracking on smooth_gain over the
// fractional feasible set. step <= 0 picks the inverse curvature bound
// alpha / baseline_cost. Non-convergence is reported via the flag, never an
// exception.
RelaxedSolution solve_relaxation(const Network& net, const Demand& demand,
                                 const SurrogateParams& p, double step = 0.0,
                                 int max_iters = 2000, double tol = 1e-7);

// Rounds a fractional allocation to a feasible placement by repeatedly moving
// mass between two fractional non-designated coordinates (same node first,
// then across nodes) to whichever endpoint has the larger caching gain; a
// last remaining fractional coordinate is floored.
Placement pipage_round(const Network& net, const Demand& demand,
                       const Allocation& y_star);

// Benchmark with the storage budget split evenly across nodes (designated
// copies kept in place, remainder of the division handed to the lowest node
// ids) and the global budget constraint dropped. Returns the solve on that
// restricted instance; its l_upper bounds the equal-capacity optimum.
RelaxedSolution equal_capacity_bound(const Network& net, const Demand& demand,
                                     const SurrogateParams& p,
                                     double step = 0.0, int max_iters = 2000,
                                     double tol = 1e-7);

// Exact Euclidean projection onto the fractional feasible set (box, pinned
// designated entries, per-node caps, global budget), via per-row projections
// composed with bisection on a global shift.
Allocation project_feasible(const Network& net, const Matrix& y);

// Maximizes <g, s> over the fractional feasible set (designated entries
// pinned at 1). Used for the duality-gap certificate.
Allocation linear_max_feasible(const Network& net, const Matrix& g);

}  // namespace cachegain
