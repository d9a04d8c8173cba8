#pragma once

#include <algorithm>
#include <random>
#include <utility>
#include <vector>

#include "cachegain/central.hpp"
#include "cachegain/model.hpp"
#include "cachegain/rng.hpp"
#include "cachegain/topo.hpp"

namespace cachegain::testing {

// Three nodes on a line a(0) - b(1) - c(2) plus a heavy shortcut a - c.
// One item designated at c, unit-rate request from a routed a -> b -> c.
// Closed forms: baseline cost 3; at y_a = y_b = 0.5 the gain is 2, the
// relaxed gain 2.5, the smooth gain (alpha = 0.2) 2.45 with partials
// (2.0, 1.0); caching the item at a saves the full path weight 3.
struct Triangle {
  Network net;
  Demand demand;

  Triangle() {
    std::vector<Edge> edges{{0, 1, 1.0}, {1, 2, 2.0}, {0, 2, 10.0}};
    net = make_network(3, 1, edges, {{2}}, {1, 1, 1}, 2.0);
    Request r{0, {0, 1, 2}};
    demand = make_demand(net, {{r, 1.0}});
  }

  Allocation allocation(double ya, double yb) const {
    Allocation y(3, 1, 0.0);
    y(0, 0) = ya;
    y(1, 0) = yb;
    y(2, 0) = 1.0;
    return y;
  }
};

// Small random instance family for property tests: a connected graph on
// `nodes` nodes, `items` items with one designated server each, and a few
// multi-hop requests. Budget leaves room above the designated load.
struct SmallInstance {
  Network net;
  Demand demand;
};

inline SmallInstance random_instance(std::mt19937_64& rng, int nodes, int items,
                                     int extra_budget, int n_requests) {
  std::uniform_real_distribution<double> uw(0.05, 1.0);
  std::uniform_int_distribution<int> unode(0, nodes - 1);
  std::uniform_int_distribution<int> uitem(0, items - 1);

  std::vector<Edge> edges;
  for (NodeId v = 1; v < nodes; ++v) {  // random tree keeps it connected
    std::uniform_int_distribution<int> uparent(0, v - 1);
    edges.push_back({uparent(rng), v, uw(rng)});
  }
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (NodeId u = 0; u < nodes; ++u)
    for (NodeId v = u + 1; v < nodes; ++v) {
      bool present = false;
      for (const auto& e : edges)
        present = present || (e.u == u && e.v == v) || (e.u == v && e.v == u);
      if (!present && u01(rng) < 0.3) edges.push_back({u, v, uw(rng)});
    }

  std::vector<std::vector<NodeId>> servers(items);
  for (int i = 0; i < items; ++i) servers[i] = {unode(rng)};

  std::vector<int> caps(nodes, items);
  double designated = items;  // one server per item
  SmallInstance out;
  out.net = make_network(nodes, items, edges, servers, caps,
                         designated + extra_budget);

  std::vector<std::pair<Request, double>> reqs;
  std::uniform_real_distribution<double> urate(0.1, 1.0);
  for (int k = 0; k < n_requests; ++k) {
    ItemId i = uitem(rng);
    NodeId src = unode(rng);
    Request r = shortest_path_request(out.net, src, i);
    if (r.path.size() < 2) {
      --k;  // consumer is the server: no hops, resample
      continue;
    }
    reqs.emplace_back(std::move(r), urate(rng));
  }
  out.demand = make_demand(out.net, reqs);
  return out;
}

// Random feasible fractional allocation (designated entries pinned).
inline Allocation random_allocation(const Network& net, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Matrix raw(net.num_nodes, net.num_items);
  for (int v = 0; v < raw.rows(); ++v)
    for (int i = 0; i < raw.cols(); ++i) raw(v, i) = u(rng);
  return project_feasible(net, raw);
}

// Random feasible binary placement: designated entries plus uniformly chosen
// extra entries while caps and budget allow.
inline Placement random_placement(const Network& net, std::mt19937_64& rng) {
  Placement x = net.designated_placement();
  std::vector<int> load(net.num_nodes, 0);
  for (NodeId v = 0; v < net.num_nodes; ++v)
    for (ItemId i = 0; i < net.num_items; ++i)
      if (x(v, i) > 0.5) ++load[v];
  int total = net.total_designated();
  int room = static_cast<int>(net.budget) - total;

  std::vector<std::pair<NodeId, ItemId>> free;
  for (NodeId v = 0; v < net.num_nodes; ++v)
    for (ItemId i = 0; i < net.num_items; ++i)
      if (x(v, i) < 0.5) free.emplace_back(v, i);
  std::shuffle(free.begin(), free.end(), rng);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (const auto& [v, i] : free) {
    if (room <= 0) break;
    if (load[v] >= net.caps[v]) continue;
    if (u(rng) < 0.5) continue;
    x(v, i) = 1.0;
    ++load[v];
    --room;
  }
  return x;
}

}  // namespace cachegain::testing
