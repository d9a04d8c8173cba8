#include "cachegain/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cachegain {

ForwardProbe forward_probe(const Demand::Entry& entry, const Matrix& y,
                           const SurrogateParams& p) {
  const auto& path = entry.req.path;
  const double stop_level = 1.0 + 0.5 * p.alpha;
  ForwardProbe f;
  f.running.reserve(path.size());
  double s = 0.0;
  for (size_t k = 0; k < path.size(); ++k) {
    s += y(path[k], entry.req.item);
    f.running.push_back(s);
    f.stop_index = static_cast<int>(k);
    if (s > stop_level) break;
  }
  return f;
}

std::vector<std::pair<NodeId, double>> reverse_probe(const Demand::Entry& entry,
                                                     const ForwardProbe& fwd,
                                                     const SurrogateParams& p) {
  const auto& path = entry.req.path;
  std::vector<std::pair<NodeId, double>> samples;
  samples.reserve(fwd.stop_index + 1);
  double mr = 0.0;
  samples.emplace_back(path[fwd.stop_index], 0.0);
  for (int l = fwd.stop_index - 1; l >= 0; --l) {
    mr += entry.hop_w[l] * sat_prime(fwd.running[l], p);
    samples.emplace_back(path[l], mr);
  }
  return samples;
}

Matrix GradientAccumulator::period_estimate(double period) {
  Matrix z = sums_;
  const double inv = 1.0 / period;
  for (size_t k = 0; k < z.size(); ++k) z.data()[k] *= inv;
  sums_ = Matrix(sums_.rows(), sums_.cols(), 0.0);
  return z;
}

double probe_path_weight(const Network& net, const std::vector<NodeId>& path) {
  double w = 0.0;
  for (size_t k = 0; k + 1 < path.size(); ++k)
    w += net.edge_weight(path[k + 1], path[k]);
  return w;
}

double local_c0(const Network& net, const Demand& demand, NodeId v) {
  (void)net;
  double c = 0.0;
  for (const auto& e : demand.entries) {
    if (e.req.path.front() != v) continue;
    double w = 0.0;
    for (double h : e.hop_w) w += h;
    c += e.rate_bound * w;
  }
  return c;
}

double default_edge_weight(const Network& net) {
  int worst = 1;
  for (NodeId u = 0; u < net.num_nodes; ++u)
    for (NodeId v : net.adj[u])
      worst = std::max(worst, net.degree(u) + net.degree(v));
  return 1.0 / worst;  // half of the admissible ceiling 2 / worst
}

namespace {

double pair_weight(const Network& net, const ConsensusState& s, NodeId u,
                   NodeId v) {
  if (s.scheme == ConsensusScheme::local_degree)
    return 1.0 / std::max(net.degree(u), net.degree(v));
  return s.edge_weight;
}

void check_edge_weight(const Network& net, const ConsensusState& s) {
  if (s.scheme != ConsensusScheme::constant_edge) return;
  int worst = 1;
  for (NodeId u = 0; u < net.num_nodes; ++u)
    for (NodeId v : net.adj[u]) worst = std::max(worst, net.degree(u) + net.degree(v));
  if (!(s.edge_weight > 0.0) || !(s.edge_weight < 2.0 / worst))
    throw std::invalid_argument("consensus_step: constant edge weight out of range");
}

}  // namespace

void consensus_step(const Network& net, ConsensusState& s,
                    const std::function<bool(NodeId, NodeId)>& skip_edge) {
  check_edge_weight(net, s);
  if (static_cast<int>(s.values.size()) != net.num_nodes)
    throw std::invalid_argument("consensus_step: value vector size mismatch");
  // transfer form s_v += sum_u a_vu (s_u - s_v): symmetric weights conserve
  // the sum exactly even when edges are skipped
  std::vector<double> next = s.values;
  for (NodeId u = 0; u < net.num_nodes; ++u)
    for (NodeId v : net.adj[u]) {
      if (v < u) continue;  // one transaction per undirected edge
      if (skip_edge && skip_edge(u, v)) continue;
      const double a = pair_weight(net, s, u, v);
      const double flow = a * (s.values[v] - s.values[u]);
      next[u] += flow;
      next[v] -= flow;
    }
  s.values = std::move(next);
}

Matrix consensus_matrix(const Network& net, const ConsensusState& s) {
  check_edge_weight(net, s);
  Matrix a(net.num_nodes, net.num_nodes, 0.0);
  for (NodeId u = 0; u < net.num_nodes; ++u) {
    double diag = 1.0;
    for (NodeId v : net.adj[u]) {
      const double w = pair_weight(net, s, u, v);
      a(u, v) = w;
      diag -= w;
    }
    a(u, u) = diag;
  }
  return a;
}

double estimate_c0_bar(const Network& net, const Demand& demand,
                       double node_count_bound, int max_iters,
                       ConsensusScheme scheme, double edge_weight,
                       int* iters_used) {
  ConsensusState s;
  s.scheme = scheme;
  s.edge_weight =
      edge_weight > 0.0 ? edge_weight : default_edge_weight(net);
  s.values.resize(net.num_nodes);
  for (NodeId v = 0; v < net.num_nodes; ++v) s.values[v] = local_c0(net, demand, v);

  int used = 0;
  for (; used < max_iters; ++used) {
    auto [lo, hi] = std::minmax_element(s.values.begin(), s.values.end());
    if (*hi - *lo < 1e-9) break;
    consensus_step(net, s);
  }
  if (iters_used) *iters_used = used;
  return node_count_bound * s.values[0];
}

}  // namespace cachegain
