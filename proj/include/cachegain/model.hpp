#pragma once

#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "cachegain/matrix.hpp"

namespace cachegain {

using NodeId = int;
using ItemId = int;

// Cache network: undirected weighted graph, item catalog with designated
// server sets, per-node capacity limits, and a global storage budget.
// Weights are stored per ordered pair (generators emit symmetric values).
struct Network {
  int num_nodes = 0;
  int num_items = 0;
  std::vector<std::vector<NodeId>> adj;     // sorted neighbor lists
  std::vector<std::vector<double>> adj_w;   // weight(u -> adj[u][k]), parallel to adj
  std::vector<std::vector<NodeId>> servers; // sorted designated nodes per item
  std::vector<int> caps;                    // per-node capacity
  double budget = 0;                        // global number of cache slots

  bool has_edge(NodeId u, NodeId v) const;
  // Weight of ordered pair (u,v); u and v must be adjacent.
  double edge_weight(NodeId u, NodeId v) const;
  bool is_server(NodeId v, ItemId i) const;
  int degree(NodeId v) const { return static_cast<int>(adj[v].size()); }
  int num_edges() const;

  // Items designated at each node, sorted per node.
  std::vector<std::vector<ItemId>> designated_by_node() const;
  int total_designated() const;

  // Placement with exactly the designated entries set to 1.
  Placement designated_placement() const;

  // Undirected edge list (u < v) in lexicographic order.
  std::vector<std::tuple<NodeId, NodeId, double>> edge_list() const;
};

struct Edge {
  NodeId u;
  NodeId v;
  double w;
};

// Builds a Network from an undirected edge list. Throws std::invalid_argument
// on out-of-range ids, self-loops, duplicate edges, or negative weights.
Network make_network(int num_nodes, int num_items, const std::vector<Edge>& edges,
                     std::vector<std::vector<NodeId>> servers,
                     std::vector<int> caps, double budget);

// One request class: an item fetched along a fixed loop-free path whose last
// node holds the item permanently. path[0] is the consumer.
struct Request {
  ItemId item = 0;
  std::vector<NodeId> path;
};

// Aggregate demand: distinct request classes with Poisson arrival rates.
// rate_bound is a per-request upper bound on the rate used by components that
// must over-estimate costs without knowing exact rates.
struct Demand {
  struct Entry {
    Request req;
    double rate = 0.0;
    double rate_bound = 1.0;
    std::vector<double> hop_w;  // hop_w[k] = weight(path[k+1], path[k])
  };
  std::vector<Entry> entries;

  double total_rate() const;
};

// Validates paths against the network, caches hop weights, and merges
// duplicate (item, path) pairs by summing rates (rate_bound: max). Throws
// std::invalid_argument on ill-formed requests.
Demand make_demand(const Network& net,
                   const std::vector<std::pair<Request, double>>& requests,
                   double rate_bound = 1.0);

// Returns an empty string when all structural invariants hold, otherwise a
// description of the first violated one. Checks: nonempty node set, graph
// connectivity, nonnegative weights, nonempty designated set per item,
// per-node capacity at least the designated load, budget at least the total
// designated load.
std::string validate_network(const Network& net);

// Feasibility of a binary placement: entries in {0,1}, designated entries 1,
// row sums within per-node caps, total within the global budget.
bool is_feasible_d1(const Network& net, const Placement& x, double tol = 1e-9);

// Feasibility of a fractional allocation: entries in [0,1], designated
// entries 1, row sums within caps, total within budget.
bool is_feasible_d2(const Network& net, const Allocation& y, double tol = 1e-9);

// Minimum-total-weight path from src to the nearest designated server of
// item (symmetric weights). Ties resolved to the lexicographically smallest
// node sequence. Throws std::runtime_error if no server is reachable.
Request shortest_path_request(const Network& net, NodeId src, ItemId item);

// Minimum-weight path between two fixed endpoints, same tie-break rule.
std::vector<NodeId> shortest_path(const Network& net, NodeId src, NodeId dst);

// --- plain-text instance files ------------------------------------------
// Graph file: one line per undirected edge, "u v w". Servers file: "item
// node" pairs. Demand file: "item consumer rate" triples (paths are derived
// by shortest-path routing at load time). '#' starts a comment line.

void save_graph(const Network& net, const std::string& path);

struct GraphData {
  int num_nodes = 0;
  std::vector<Edge> edges;
};
GraphData load_graph(const std::string& path);

void save_servers(const Network& net, const std::string& path);
// Returns per-item server lists; item count is max id + 1 unless a larger
// num_items is given.
std::vector<std::vector<NodeId>> load_servers(const std::string& path,
                                              int num_items = -1);

struct DemandLine {
  ItemId item;
  NodeId consumer;
  double rate;
};
void save_demand(const Demand& demand, const std::string& path);
std::vector<DemandLine> load_demand_lines(const std::string& path);

// Routes each demand line over the shortest path and merges duplicates.
Demand build_demand(const Network& net, const std::vector<DemandLine>& lines,
                    double rate_bound = 1.0);

}  // namespace cachegain
