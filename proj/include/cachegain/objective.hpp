#pragma once

#include "cachegain/model.hpp"

namespace cachegain {

struct SurrogateParams {
  double alpha = 0.2;  // smoothing width, in (0,1)
};

// Piecewise saturation: identity below 1-alpha/2, clamped to 1 above
// 1+alpha/2, quadratic blend in between (continuously differentiable).
double sat(double x, const SurrogateParams& p);
double sat_prime(double x, const SurrogateParams& p);

// Cost of serving every request from its terminal server, with no caching.
double baseline_cost(const Network& net, const Demand& demand);

// Residual cost of one request under placement x: each hop is paid until the
// first node holding the item. Accepts fractional input (miss probabilities
// multiply along the prefix).
double request_cost(const Network& net, const Demand::Entry& entry,
                    const Matrix& x);

// Expected cost saved by caching, relative to baseline_cost.
double caching_gain(const Network& net, const Demand& demand, const Matrix& x);

// Concave upper transport of the gain: prefix sums clamped by min(1, .).
double relaxed_gain(const Network& net, const Demand& demand, const Matrix& y);

// Differentiable lower bound of relaxed_gain obtained by replacing min(1, .)
// with sat.
double smooth_gain(const Network& net, const Demand& demand, const Matrix& y,
                   const SurrogateParams& p);

// Exact gradient of smooth_gain, one entry per (node, item).
Matrix smooth_gain_grad(const Network& net, const Demand& demand,
                        const Matrix& y, const SurrogateParams& p);
void smooth_gain_grad_into(const Network& net, const Demand& demand,
                           const Matrix& y, const SurrogateParams& p,
                           Matrix& out);

// Single-threaded reference implementations. The default entry points above
// parallelize the request sum with per-thread partials merged in thread-index
// order, so results are deterministic for a fixed thread count; these serial
// twins exist to pin their output in tests and benchmarks.
namespace serial {
double baseline_cost(const Network& net, const Demand& demand);
double caching_gain(const Network& net, const Demand& demand, const Matrix& x);
double relaxed_gain(const Network& net, const Demand& demand, const Matrix& y);
double smooth_gain(const Network& net, const Demand& demand, const Matrix& y,
                   const SurrogateParams& p);
Matrix smooth_gain_grad(const Network& net, const Demand& demand,
                        const Matrix& y, const SurrogateParams& p);
}  // namespace serial

}  // namespace cachegain
