#include "cachegain/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <queue>
#include <sstream>
#include <stdexcept>

namespace cachegain {

namespace {

int find_neighbor(const std::vector<NodeId>& adj, NodeId v) {
  auto it = std::lower_bound(adj.begin(), adj.end(), v);
  if (it == adj.end() || *it != v) return -1;
  return static_cast<int>(it - adj.begin());
}

std::string fmt_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace

bool Network::has_edge(NodeId u, NodeId v) const {
  return find_neighbor(adj[u], v) >= 0;
}

double Network::edge_weight(NodeId u, NodeId v) const {
  int k = find_neighbor(adj[u], v);
  if (k < 0) throw std::invalid_argument("edge_weight: nodes not adjacent");
  return adj_w[u][k];
}

bool Network::is_server(NodeId v, ItemId i) const {
  const auto& s = servers[i];
  return std::binary_search(s.begin(), s.end(), v);
}

int Network::num_edges() const {
  size_t deg = 0;
  for (const auto& a : adj) deg += a.size();
  return static_cast<int>(deg / 2);
}

std::vector<std::vector<ItemId>> Network::designated_by_node() const {
  std::vector<std::vector<ItemId>> out(num_nodes);
  for (ItemId i = 0; i < num_items; ++i)
    for (NodeId v : servers[i]) out[v].push_back(i);
  return out;
}

int Network::total_designated() const {
  int n = 0;
  for (const auto& s : servers) n += static_cast<int>(s.size());
  return n;
}

Placement Network::designated_placement() const {
  Placement x(num_nodes, num_items, 0.0);
  for (ItemId i = 0; i < num_items; ++i)
    for (NodeId v : servers[i]) x(v, i) = 1.0;
  return x;
}

std::vector<std::tuple<NodeId, NodeId, double>> Network::edge_list() const {
  std::vector<std::tuple<NodeId, NodeId, double>> out;
  for (NodeId u = 0; u < num_nodes; ++u)
    for (size_t k = 0; k < adj[u].size(); ++k)
      if (u < adj[u][k]) out.emplace_back(u, adj[u][k], adj_w[u][k]);
  return out;
}

Network make_network(int num_nodes, int num_items, const std::vector<Edge>& edges,
                     std::vector<std::vector<NodeId>> servers,
                     std::vector<int> caps, double budget) {
  if (num_nodes < 0 || num_items < 0)
    throw std::invalid_argument("make_network: negative dimensions");
  if (static_cast<int>(servers.size()) != num_items)
    throw std::invalid_argument("make_network: servers list size != num_items");
  if (static_cast<int>(caps.size()) != num_nodes)
    throw std::invalid_argument("make_network: caps size != num_nodes");

  Network net;
  net.num_nodes = num_nodes;
  net.num_items = num_items;
  net.adj.resize(num_nodes);
  net.adj_w.resize(num_nodes);
  net.caps = std::move(caps);
  net.budget = budget;

  std::vector<std::vector<std::pair<NodeId, double>>> tmp(num_nodes);
  for (const Edge& e : edges) {
    if (e.u < 0 || e.u >= num_nodes || e.v < 0 || e.v >= num_nodes)
      throw std::invalid_argument("make_network: edge endpoint out of range");
    if (e.u == e.v) throw std::invalid_argument("make_network: self-loop");
    if (e.w < 0.0)
      throw std::invalid_argument("make_network: negative edge weight");
    tmp[e.u].emplace_back(e.v, e.w);
    tmp[e.v].emplace_back(e.u, e.w);
  }
  for (NodeId u = 0; u < num_nodes; ++u) {
    auto& row = tmp[u];
    std::sort(row.begin(), row.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (size_t k = 1; k < row.size(); ++k)
      if (row[k].first == row[k - 1].first)
        throw std::invalid_argument("make_network: duplicate edge");
    net.adj[u].reserve(row.size());
    net.adj_w[u].reserve(row.size());
    for (auto& [v, w] : row) {
      net.adj[u].push_back(v);
      net.adj_w[u].push_back(w);
    }
  }

  for (auto& s : servers) {
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    for (NodeId v : s)
      if (v < 0 || v >= num_nodes)
        throw std::invalid_argument("make_network: server node out of range");
  }
  net.servers = std::move(servers);
  return net;
}

double Demand::total_rate() const {
  double s = 0.0;
  for (const auto& e : entries) s += e.rate;
  return s;
}

Demand make_demand(const Network& net,
                   const std::vector<std::pair<Request, double>>& requests,
                   double rate_bound) {
  Demand d;
  std::map<std::pair<ItemId, std::vector<NodeId>>, size_t> seen;
  for (const auto& [req, rate] : requests) {
    if (req.item < 0 || req.item >= net.num_items)
      throw std::invalid_argument("make_demand: item out of range");
    if (req.path.empty()) throw std::invalid_argument("make_demand: empty path");
    if (rate < 0.0) throw std::invalid_argument("make_demand: negative rate");
    std::vector<NodeId> sorted = req.path;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      throw std::invalid_argument("make_demand: path revisits a node");
    for (NodeId v : req.path)
      if (v < 0 || v >= net.num_nodes)
        throw std::invalid_argument("make_demand: path node out of range");
    for (size_t k = 0; k + 1 < req.path.size(); ++k)
      if (!net.has_edge(req.path[k], req.path[k + 1]))
        throw std::invalid_argument("make_demand: non-adjacent path hop");
    if (!net.is_server(req.path.back(), req.item))
      throw std::invalid_argument(
          "make_demand: path does not end at a designated server");

    auto key = std::make_pair(req.item, req.path);
    auto it = seen.find(key);
    if (it != seen.end()) {
      d.entries[it->second].rate += rate;
      continue;
    }
    Demand::Entry e;
    e.req = req;
    e.rate = rate;
    e.rate_bound = rate_bound;
    e.hop_w.reserve(req.path.size() - 1);
    for (size_t k = 0; k + 1 < req.path.size(); ++k)
      e.hop_w.push_back(net.edge_weight(req.path[k + 1], req.path[k]));
    seen.emplace(std::move(key), d.entries.size());
    d.entries.push_back(std::move(e));
  }
  return d;
}

std::string validate_network(const Network& net) {
  if (net.num_nodes <= 0) return "empty node set";
  for (NodeId u = 0; u < net.num_nodes; ++u)
    for (size_t k = 0; k < net.adj[u].size(); ++k)
      if (net.adj_w[u][k] < 0.0)
        return "negative weight on edge (" + std::to_string(u) + "," +
               std::to_string(net.adj[u][k]) + ")";
  // connectivity
  std::vector<char> seen(net.num_nodes, 0);
  std::queue<NodeId> q;
  q.push(0);
  seen[0] = 1;
  int reached = 1;
  while (!q.empty()) {
    NodeId u = q.front();
    q.pop();
    for (NodeId v : net.adj[u])
      if (!seen[v]) {
        seen[v] = 1;
        ++reached;
        q.push(v);
      }
  }
  if (reached != net.num_nodes) {
    NodeId missing = 0;
    while (seen[missing]) ++missing;
    return "disconnected: node " + std::to_string(missing) +
           " unreachable from node 0";
  }
  for (ItemId i = 0; i < net.num_items; ++i)
    if (net.servers[i].empty())
      return "item " + std::to_string(i) + " has no designated server";
  auto des = net.designated_by_node();
  for (NodeId v = 0; v < net.num_nodes; ++v) {
    if (net.caps[v] < 0) return "negative capacity at node " + std::to_string(v);
    if (net.caps[v] < static_cast<int>(des[v].size()))
      return "capacity of node " + std::to_string(v) +
             " below its designated load";
  }
  if (net.budget < net.total_designated())
    return "budget " + fmt_double(net.budget) + " below total designated load " +
           std::to_string(net.total_designated());
  return "";
}

namespace {

void check_dims(const Network& net, const Matrix& m, const char* who) {
  if (m.rows() != net.num_nodes || m.cols() != net.num_items)
    throw std::invalid_argument(std::string(who) + ": dimension mismatch");
}

}  // namespace

bool is_feasible_d1(const Network& net, const Placement& x, double tol) {
  check_dims(net, x, "is_feasible_d1");
  double total = 0.0;
  for (NodeId v = 0; v < net.num_nodes; ++v) {
    double row = 0.0;
    for (ItemId i = 0; i < net.num_items; ++i) {
      double e = x(v, i);
      if (std::abs(e) > tol && std::abs(e - 1.0) > tol) return false;
      row += e;
    }
    if (row > net.caps[v] + tol) return false;
    total += row;
  }
  if (total > net.budget + tol) return false;
  for (ItemId i = 0; i < net.num_items; ++i)
    for (NodeId v : net.servers[i])
      if (std::abs(x(v, i) - 1.0) > tol) return false;
  return true;
}

bool is_feasible_d2(const Network& net, const Allocation& y, double tol) {
  check_dims(net, y, "is_feasible_d2");
  double total = 0.0;
  for (NodeId v = 0; v < net.num_nodes; ++v) {
    double row = 0.0;
    for (ItemId i = 0; i < net.num_items; ++i) {
      double e = y(v, i);
      if (e < -tol || e > 1.0 + tol) return false;
      row += e;
    }
    if (row > net.caps[v] + tol) return false;
    total += row;
  }
  if (total > net.budget + tol) return false;
  for (ItemId i = 0; i < net.num_items; ++i)
    for (NodeId v : net.servers[i])
      if (std::abs(y(v, i) - 1.0) > tol) return false;
  return true;
}

namespace {

// Dijkstra distances toward the nearest of the given targets.
std::vector<double> dijkstra_to(const Network& net,
                                const std::vector<NodeId>& targets) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(net.num_nodes, kInf);
  using Item = std::pair<double, NodeId>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  for (NodeId t : targets) {
    dist[t] = 0.0;
    pq.emplace(0.0, t);
  }
  while (!pq.empty()) {
    auto [d, u] = pq.top();
    pq.pop();
    if (d > dist[u]) continue;
    for (size_t k = 0; k < net.adj[u].size(); ++k) {
      NodeId v = net.adj[u][k];
      double nd = d + net.adj_w[u][k];
      if (nd < dist[v]) {
        dist[v] = nd;
        pq.emplace(nd, v);
      }
    }
  }
  return dist;
}

// Walks from src along neighbors that keep the distance-to-target identity
// exact, picking the smallest node id at every step: the lexicographically
// smallest minimum-weight node sequence.
std::vector<NodeId> walk_shortest(const Network& net,
                                  const std::vector<double>& dist, NodeId src) {
  if (!std::isfinite(dist[src]))
    throw std::runtime_error("shortest_path: destination unreachable");
  std::vector<NodeId> path{src};
  NodeId u = src;
  while (dist[u] > 0.0) {
    NodeId next = -1;
    for (size_t k = 0; k < net.adj[u].size(); ++k) {
      NodeId v = net.adj[u][k];
      if (dist[u] == net.adj_w[u][k] + dist[v]) {
        next = v;  // neighbors are sorted, first match is the smallest id
        break;
      }
    }
    if (next < 0) throw std::runtime_error("shortest_path: broken distance map");
    path.push_back(next);
    u = next;
  }
  return path;
}

}  // namespace

Request shortest_path_request(const Network& net, NodeId src, ItemId item) {
  if (src < 0 || src >= net.num_nodes)
    throw std::invalid_argument("shortest_path_request: bad source");
  if (item < 0 || item >= net.num_items)
    throw std::invalid_argument("shortest_path_request: bad item");
  if (net.servers[item].empty())
    throw std::runtime_error("shortest_path_request: item has no server");
  Request r;
  r.item = item;
  r.path = walk_shortest(net, dijkstra_to(net, net.servers[item]), src);
  return r;
}

std::vector<NodeId> shortest_path(const Network& net, NodeId src, NodeId dst) {
  if (src < 0 || src >= net.num_nodes || dst < 0 || dst >= net.num_nodes)
    throw std::invalid_argument("shortest_path: endpoint out of range");
  return walk_shortest(net, dijkstra_to(net, {dst}), src);
}

// --- file I/O --------------------------------------------------------------

namespace {

std::ifstream open_in(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::invalid_argument("cannot open for reading: " + path);
  return f;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::invalid_argument("cannot open for writing: " + path);
  return f;
}

// Yields non-comment, non-blank lines with their 1-based numbers.
template <typename Fn>
void for_data_lines(std::istream& in, const std::string& path, Fn&& fn) {
  std::string line;
  int ln = 0;
  while (std::getline(in, line)) {
    ++ln;
    size_t pos = line.find_first_not_of(" \t\r");
    if (pos == std::string::npos || line[pos] == '#') continue;
    fn(line, ln);
  }
  (void)path;
}

[[noreturn]] void parse_fail(const std::string& path, int ln) {
  throw std::invalid_argument("parse error at " + path + ":" + std::to_string(ln));
}

}  // namespace

void save_graph(const Network& net, const std::string& path) {
  auto f = open_out(path);
  f << "# u v w\n";
  for (const auto& [u, v, w] : net.edge_list())
    f << u << ' ' << v << ' ' << fmt_double(w) << '\n';
}

GraphData load_graph(const std::string& path) {
  auto f = open_in(path);
  GraphData g;
  for_data_lines(f, path, [&](const std::string& line, int ln) {
    std::istringstream ss(line);
    Edge e;
    if (!(ss >> e.u >> e.v >> e.w)) parse_fail(path, ln);
    g.edges.push_back(e);
    g.num_nodes = std::max({g.num_nodes, e.u + 1, e.v + 1});
  });
  return g;
}

void save_servers(const Network& net, const std::string& path) {
  auto f = open_out(path);
  f << "# item node\n";
  for (ItemId i = 0; i < net.num_items; ++i)
    for (NodeId v : net.servers[i]) f << i << ' ' << v << '\n';
}

std::vector<std::vector<NodeId>> load_servers(const std::string& path,
                                              int num_items) {
  auto f = open_in(path);
  std::vector<std::vector<NodeId>> servers;
  for_data_lines(f, path, [&](const std::string& line, int ln) {
    std::istringstream ss(line);
    int item, node;
    if (!(ss >> item >> node) || item < 0) parse_fail(path, ln);
    if (static_cast<int>(servers.size()) <= item) servers.resize(item + 1);
    servers[item].push_back(node);
  });
  if (num_items >= 0) {
    if (static_cast<int>(servers.size()) > num_items)
      throw std::invalid_argument("servers file lists an item beyond the catalog");
    servers.resize(num_items);
  }
  for (auto& s : servers) std::sort(s.begin(), s.end());
  return servers;
}

void save_demand(const Demand& demand, const std::string& path) {
  auto f = open_out(path);
  f << "# item consumer rate\n";
  for (const auto& e : demand.entries)
    f << e.req.item << ' ' << e.req.path.front() << ' ' << fmt_double(e.rate)
      << '\n';
}

std::vector<DemandLine> load_demand_lines(const std::string& path) {
  auto f = open_in(path);
  std::vector<DemandLine> lines;
  for_data_lines(f, path, [&](const std::string& line, int ln) {
    std::istringstream ss(line);
    DemandLine d;
    if (!(ss >> d.item >> d.consumer >> d.rate)) parse_fail(path, ln);
    lines.push_back(d);
  });
  return lines;
}

Demand build_demand(const Network& net, const std::vector<DemandLine>& lines,
                    double rate_bound) {
  std::vector<std::pair<Request, double>> reqs;
  reqs.reserve(lines.size());
  for (const auto& d : lines)
    reqs.emplace_back(shortest_path_request(net, d.consumer, d.item), d.rate);
  return make_demand(net, reqs, rate_bound);
}

}  // namespace cachegain
