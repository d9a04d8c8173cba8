#include <doctest.h>

#include <cmath>

#include "cachegain/objective.hpp"
#include "cachegain/rng.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace cachegain;
using namespace cachegain::testing;

TEST_SUITE_BEGIN("objective");

TEST_CASE("saturation function values and smoothness") {
  SurrogateParams p{0.2};
  CHECK(sat(0.5, p) == 0.5);
  CHECK(sat(0.9, p) == 0.9);  // knot: 1 - alpha/2
  CHECK(sat(1.0, p) == doctest::Approx(0.975).epsilon(1e-15));
  CHECK(sat(1.1, p) == 1.0);
  CHECK(sat(2.0, p) == 1.0);
  CHECK(sat_prime(0.5, p) == 1.0);
  CHECK(sat_prime(1.0, p) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(sat_prime(1.1, p) == 0.0);

  // continuity across the blend interval
  for (double alpha : {0.05, 0.2, 0.7}) {
    SurrogateParams q{alpha};
    double lo = 1.0 - alpha / 2, hi = 1.0 + alpha / 2;
    CHECK(sat(lo - 1e-12, q) == doctest::Approx(sat(lo + 1e-12, q)).epsilon(1e-9));
    CHECK(sat(hi - 1e-12, q) == doctest::Approx(sat(hi + 1e-12, q)).epsilon(1e-9));
    CHECK(sat_prime(lo + 1e-12, q) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(sat_prime(hi - 1e-12, q) == doctest::Approx(0.0).epsilon(1e-9));
    for (double x : {0.0, 0.3, lo, 0.95, 1.0, 1.02, hi, 1.4}) {
      CHECK(sat(x, q) == doctest::Approx(oracle_sat(x, alpha)).epsilon(1e-15));
      CHECK(sat_prime(x, q) ==
            doctest::Approx(oracle_sat_prime(x, alpha)).epsilon(1e-15));
    }
  }
}

TEST_CASE("closed forms on the line fixture") {
  Triangle fx;
  SurrogateParams p{0.2};
  CHECK(baseline_cost(fx.net, fx.demand) == doctest::Approx(3.0));

  Allocation y = fx.allocation(0.5, 0.5);
  CHECK(caching_gain(fx.net, fx.demand, y) == doctest::Approx(2.0));
  CHECK(relaxed_gain(fx.net, fx.demand, y) == doctest::Approx(2.5));
  CHECK(smooth_gain(fx.net, fx.demand, y, p) == doctest::Approx(2.45));

  Matrix g = smooth_gain_grad(fx.net, fx.demand, y, p);
  CHECK(g(0, 0) == doctest::Approx(2.0));
  CHECK(g(1, 0) == doctest::Approx(1.0));
  CHECK(g(2, 0) == doctest::Approx(0.0));  // saturated past the stop level

  // caching at the consumer saves the whole path weight
  Placement x = fx.net.designated_placement();
  x(0, 0) = 1.0;
  CHECK(caching_gain(fx.net, fx.demand, x) == doctest::Approx(3.0));
  CHECK(request_cost(fx.net, fx.demand.entries[0], x) == doctest::Approx(0.0));
}

TEST_CASE("gain plus residual cost equals the baseline") {
  auto rng = make_rng(11, "objective");
  for (int t = 0; t < 20; ++t) {
    auto inst = random_instance(rng, 5, 3, 2, 6);
    Allocation y = random_allocation(inst.net, rng);
    double residual = 0.0;
    for (const auto& e : inst.demand.entries)
      residual += e.rate * request_cost(inst.net, e, y);
    CHECK(caching_gain(inst.net, inst.demand, y) + residual ==
          doctest::Approx(baseline_cost(inst.net, inst.demand)).epsilon(1e-12));
  }
}

TEST_CASE("kernels match the naive reference formulas") {
  auto rng = make_rng(23, "objective");
  SurrogateParams p{0.2};
  for (int t = 0; t < 30; ++t) {
    auto inst = random_instance(rng, 6, 3, 3, 8);
    Allocation y = random_allocation(inst.net, rng);

    CHECK(caching_gain(inst.net, inst.demand, y) ==
          doctest::Approx(oracle_gain(inst.net, inst.demand, y)).epsilon(1e-12));
    CHECK(relaxed_gain(inst.net, inst.demand, y) ==
          doctest::Approx(oracle_relaxed(inst.net, inst.demand, y)).epsilon(1e-12));
    CHECK(smooth_gain(inst.net, inst.demand, y, p) ==
          doctest::Approx(oracle_smooth(inst.net, inst.demand, y, 0.2))
              .epsilon(1e-12));

    Matrix g = smooth_gain_grad(inst.net, inst.demand, y, p);
    for (NodeId v = 0; v < inst.net.num_nodes; ++v)
      for (ItemId i = 0; i < inst.net.num_items; ++i) {
        double want = oracle_smooth_partial(inst.net, inst.demand, y, 0.2, v, i);
        CHECK(g(v, i) == doctest::Approx(want).epsilon(1e-11));
      }
  }
}

TEST_CASE("serial twins agree with the parallel kernels") {
  auto rng = make_rng(31, "objective");
  SurrogateParams p{0.2};
  auto inst = random_instance(rng, 7, 4, 4, 40);
  Allocation y = random_allocation(inst.net, rng);

  CHECK(serial::baseline_cost(inst.net, inst.demand) ==
        doctest::Approx(baseline_cost(inst.net, inst.demand)).epsilon(1e-13));
  CHECK(serial::caching_gain(inst.net, inst.demand, y) ==
        doctest::Approx(caching_gain(inst.net, inst.demand, y)).epsilon(1e-13));
  CHECK(serial::relaxed_gain(inst.net, inst.demand, y) ==
        doctest::Approx(relaxed_gain(inst.net, inst.demand, y)).epsilon(1e-13));
  CHECK(serial::smooth_gain(inst.net, inst.demand, y, p) ==
        doctest::Approx(smooth_gain(inst.net, inst.demand, y, p)).epsilon(1e-13));
  Matrix gs = serial::smooth_gain_grad(inst.net, inst.demand, y, p);
  Matrix gp = smooth_gain_grad(inst.net, inst.demand, y, p);
  for (size_t k = 0; k < gs.size(); ++k)
    CHECK(gs.data()[k] == doctest::Approx(gp.data()[k]).epsilon(1e-12));
}

TEST_CASE("sandwich bounds hold on random feasible points") {
  auto rng = make_rng(47, "objective");
  const double shrink = 1.0 - 1.0 / std::exp(1.0);
  for (int t = 0; t < 200; ++t) {
    auto inst = random_instance(rng, 5, 3, 2, 6);
    double c0 = baseline_cost(inst.net, inst.demand);
    double tol = 1e-10 * std::max(1.0, c0);
    SurrogateParams p{0.2};

    Allocation y = random_allocation(inst.net, rng);
    double f = caching_gain(inst.net, inst.demand, y);
    double l = relaxed_gain(inst.net, inst.demand, y);
    double lt = smooth_gain(inst.net, inst.demand, y, p);
    CHECK(f <= l + tol);
    CHECK(f >= shrink * l - tol);
    CHECK(lt <= l + tol);
    CHECK(l <= lt + 0.025 * c0 + tol);  // alpha/8 = 0.025
    CHECK(f <= c0 + tol);

    Placement x = random_placement(inst.net, rng);
    CHECK(caching_gain(inst.net, inst.demand, x) ==
          doctest::Approx(relaxed_gain(inst.net, inst.demand, x)).epsilon(1e-12));
  }
}

TEST_CASE("gradient matches central finite differences") {
  auto rng = make_rng(59, "objective");
  SurrogateParams p{0.2};
  for (int t = 0; t < 10; ++t) {
    auto inst = random_instance(rng, 5, 3, 2, 6);
    Allocation y = random_allocation(inst.net, rng);
    Matrix g = smooth_gain_grad(inst.net, inst.demand, y, p);
    double scale = 1.0;
    for (size_t k = 0; k < g.size(); ++k)
      scale = std::max(scale, std::abs(g.data()[k]));
    for (NodeId v = 0; v < inst.net.num_nodes; ++v)
      for (ItemId i = 0; i < inst.net.num_items; ++i) {
        double fd = fd_partial(inst.net, inst.demand, y, p, v, i);
        CHECK(std::abs(g(v, i) - fd) / scale <= 1e-5);
      }
  }
}

TEST_CASE("gradient buffer reuse") {
  Triangle fx;
  SurrogateParams p{0.2};
  Matrix g;
  smooth_gain_grad_into(fx.net, fx.demand, fx.allocation(0.5, 0.5), p, g);
  CHECK(g(0, 0) == doctest::Approx(2.0));
  smooth_gain_grad_into(fx.net, fx.demand, fx.allocation(0.0, 0.0), p, g);
  CHECK(g(0, 0) == doctest::Approx(3.0));  // 1*1 + 2*1, nothing saturated
}

TEST_SUITE_END();
