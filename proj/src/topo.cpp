#include "cachegain/topo.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <set>
#include <stdexcept>

#include "cachegain/rng.hpp"

namespace cachegain {

namespace {

using EdgePair = std::pair<NodeId, NodeId>;

EdgePair ordered(NodeId u, NodeId v) { return {std::min(u, v), std::max(u, v)}; }

// Abilene backbone: 9 nodes, 13 links.
constexpr EdgePair kAbilene[] = {
    {0, 1}, {0, 8}, {1, 2}, {1, 4}, {2, 3}, {2, 6}, {3, 4},
    {3, 7}, {4, 5}, {5, 6}, {5, 8}, {6, 7}, {7, 8},
};

// GEANT backbone: 22 nodes, 33 links.
constexpr EdgePair kGeant[] = {
    {0, 1},   {0, 5},   {0, 21},  {1, 2},   {1, 11},  {2, 3},   {2, 8},
    {3, 4},   {3, 16},  {4, 5},   {4, 12},  {5, 6},   {6, 7},   {6, 15},
    {7, 8},   {7, 20},  {8, 9},   {9, 10},  {9, 18},  {10, 11}, {10, 19},
    {11, 12}, {12, 13}, {13, 14}, {13, 21}, {14, 15}, {14, 17}, {15, 16},
    {16, 17}, {17, 18}, {18, 19}, {19, 20}, {20, 21},
};

// Deutsche Telekom backbone stand-in at the published size: 68 nodes,
// 273 links, heterogeneous degrees.
constexpr EdgePair kDtelekom[] = {
    {0,4}, {0,5}, {0,7}, {0,9}, {0,11}, {0,32}, {0,39}, {0,41}, {0,51}, {1,4},
    {1,6}, {1,7}, {1,8}, {1,11}, {1,15}, {1,16}, {1,17}, {1,18}, {1,19}, {1,20},
    {1,29}, {1,30}, {1,34}, {1,39}, {1,40}, {1,48}, {1,53}, {1,62}, {2,4}, {2,5},
    {2,7}, {2,10}, {2,13}, {2,20}, {2,21}, {2,32}, {2,37}, {2,45}, {2,47}, {2,51},
    {2,58}, {2,65}, {3,4}, {3,5}, {3,6}, {3,9}, {3,10}, {3,12}, {3,16}, {3,18},
    {3,24}, {3,25}, {3,32}, {3,34}, {3,35}, {3,39}, {3,43}, {3,50}, {3,51}, {3,55},
    {3,60}, {3,62}, {3,67}, {4,5}, {4,6}, {4,9}, {4,14}, {4,15}, {4,26}, {4,27},
    {4,37}, {4,44}, {4,49}, {4,53}, {4,57}, {5,6}, {5,7}, {5,8}, {5,9}, {5,10},
    {5,11}, {5,18}, {5,19}, {5,21}, {5,24}, {5,25}, {5,28}, {5,31}, {5,35}, {5,38},
    {5,41}, {5,43}, {5,46}, {5,57}, {5,63}, {5,64}, {6,8}, {6,10}, {6,12}, {6,13},
    {6,20}, {6,22}, {6,23}, {6,33}, {6,45}, {6,49}, {6,54}, {6,61}, {6,64}, {7,8},
    {7,14}, {7,15}, {7,26}, {7,27}, {7,29}, {7,37}, {7,42}, {8,12}, {8,14}, {8,16},
    {8,17}, {8,20}, {8,23}, {8,24}, {8,28}, {8,30}, {8,31}, {8,33}, {8,35}, {8,36},
    {8,38}, {8,39}, {8,40}, {8,47}, {8,51}, {8,59}, {8,63}, {8,65}, {9,11}, {9,22},
    {9,58}, {10,12}, {10,13}, {10,15}, {10,16}, {10,25}, {10,29}, {10,31}, {10,61}, {10,66},
    {11,13}, {11,14}, {11,30}, {11,35}, {11,36}, {11,52}, {11,54}, {12,22}, {12,27}, {12,30},
    {12,44}, {12,47}, {12,50}, {12,59}, {12,60}, {12,63}, {13,14}, {13,17}, {13,18}, {13,19},
    {13,23}, {13,25}, {13,26}, {13,28}, {13,52}, {13,55}, {13,62}, {14,46}, {15,17}, {15,24},
    {15,26}, {15,27}, {15,43}, {15,46}, {15,57}, {15,64}, {16,19}, {16,21}, {16,22}, {16,37},
    {16,41}, {16,49}, {16,56}, {17,42}, {18,23}, {18,29}, {18,34}, {18,50}, {18,56}, {18,65},
    {18,66}, {19,21}, {19,22}, {19,27}, {19,30}, {19,53}, {19,60}, {20,32}, {20,34}, {20,36},
    {20,40}, {20,44}, {20,50}, {21,22}, {21,31}, {21,42}, {21,45}, {21,52}, {22,28}, {22,38},
    {22,51}, {25,33}, {25,48}, {25,49}, {25,56}, {25,66}, {26,36}, {26,48}, {27,40}, {27,45},
    {27,61}, {28,56}, {29,51}, {30,33}, {30,67}, {31,46}, {31,54}, {31,56}, {31,58}, {32,42},
    {32,55}, {32,57}, {33,59}, {34,38}, {34,64}, {35,48}, {35,49}, {35,58}, {37,41}, {37,61},
    {37,63}, {38,43}, {38,54}, {38,67}, {39,47}, {39,55}, {39,62}, {39,66}, {40,58}, {40,60},
    {42,44}, {42,52}, {43,65}, {44,53}, {44,56}, {45,61}, {46,59}, {51,53}, {52,58}, {57,67},
    {61,67}, {64,67}, {66,67},
};

Skeleton from_fixed(int n, const EdgePair* e, size_t m) {
  Skeleton s;
  s.num_nodes = n;
  s.edges.assign(e, e + m);
  return s;
}

void bridge_components(Skeleton& s) {
  std::vector<std::vector<NodeId>> adj(s.num_nodes);
  for (auto [u, v] : s.edges) {
    adj[u].push_back(v);
    adj[v].push_back(u);
  }
  std::vector<int> comp(s.num_nodes, -1);
  std::vector<NodeId> reps;
  for (NodeId r = 0; r < s.num_nodes; ++r) {
    if (comp[r] >= 0) continue;
    comp[r] = static_cast<int>(reps.size());
    std::queue<NodeId> q;
    q.push(r);
    while (!q.empty()) {
      NodeId u = q.front();
      q.pop();
      for (NodeId v : adj[u])
        if (comp[v] < 0) {
          comp[v] = comp[r];
          q.push(v);
        }
    }
    reps.push_back(r);  // r is the smallest id in its component
  }
  for (size_t k = 1; k < reps.size(); ++k)
    s.edges.push_back(ordered(reps[0], reps[k]));
}

void finalize(Skeleton& s) {
  std::sort(s.edges.begin(), s.edges.end());
  s.edges.erase(std::unique(s.edges.begin(), s.edges.end()), s.edges.end());
  bridge_components(s);
  std::sort(s.edges.begin(), s.edges.end());
}

Skeleton gen_grid(int side) {
  Skeleton s;
  s.num_nodes = side * side;
  auto id = [side](int x, int y) { return x * side + y; };
  for (int x = 0; x < side; ++x)
    for (int y = 0; y < side; ++y) {
      if (x + 1 < side) s.edges.push_back(ordered(id(x, y), id(x + 1, y)));
      if (y + 1 < side) s.edges.push_back(ordered(id(x, y), id(x, y + 1)));
    }
  finalize(s);
  return s;
}

// Degree-8 expander on the torus Z_k x Z_k: each (x,y) links to
// (x +- 2y, y), (x +- (2y+1), y), (x, y +- 2x), (x, y +- (2x+1)),
// parallel edges and self-loops collapsed.
Skeleton gen_expander(int k) {
  Skeleton s;
  s.num_nodes = k * k;
  auto id = [k](int x, int y) {
    return ((x % k + k) % k) * k + ((y % k + k) % k);
  };
  std::set<EdgePair> es;
  for (int x = 0; x < k; ++x)
    for (int y = 0; y < k; ++y) {
      const int u = id(x, y);
      const int targets[] = {id(x + 2 * y, y),       id(x - 2 * y, y),
                             id(x + 2 * y + 1, y),   id(x - 2 * y - 1, y),
                             id(x, y + 2 * x),       id(x, y - 2 * x),
                             id(x, y + 2 * x + 1),   id(x, y - 2 * x - 1)};
      for (int v : targets)
        if (v != u) es.insert(ordered(u, v));
    }
  s.edges.assign(es.begin(), es.end());
  finalize(s);
  return s;
}

Skeleton gen_erdos_renyi(int n, double prob, std::mt19937_64& rng) {
  Skeleton s;
  s.num_nodes = n;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (NodeId a = 0; a < n; ++a)
    for (NodeId b = a + 1; b < n; ++b)
      if (u(rng) < prob) s.edges.emplace_back(a, b);
  finalize(s);
  return s;
}

Skeleton gen_watts_strogatz(int n, int k, double beta, std::mt19937_64& rng) {
  std::set<EdgePair> es;
  for (NodeId u = 0; u < n; ++u)
    for (int j = 1; j <= k / 2; ++j) es.insert(ordered(u, (u + j) % n));
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::uniform_int_distribution<int> pick(0, n - 1);
  for (NodeId u = 0; u < n; ++u)
    for (int j = 1; j <= k / 2; ++j) {
      EdgePair e = ordered(u, (u + j) % n);
      if (!es.count(e) || coin(rng) >= beta) continue;
      for (int tries = 0; tries < 64; ++tries) {
        NodeId v = pick(rng);
        EdgePair cand = ordered(u, v);
        if (v == u || es.count(cand)) continue;
        es.erase(e);
        es.insert(cand);
        break;
      }
    }
  Skeleton s;
  s.num_nodes = n;
  s.edges.assign(es.begin(), es.end());
  finalize(s);
  return s;
}

Skeleton gen_barabasi_albert(int n, int m, std::mt19937_64& rng) {
  Skeleton s;
  s.num_nodes = n;
  std::vector<NodeId> repeated;
  for (NodeId v = m; v < n; ++v) {
    std::set<NodeId> chosen;
    if (v == m) {
      for (NodeId c = 0; c < m; ++c) chosen.insert(c);
    } else {
      // degree-proportional attachment via the repeated-endpoints list
      std::uniform_int_distribution<size_t> pick(0, repeated.size() - 1);
      while (static_cast<int>(chosen.size()) < m) {
        NodeId c = repeated[pick(rng)];
        if (c != v) chosen.insert(c);
      }
    }
    for (NodeId c : chosen) {
      s.edges.push_back(ordered(v, c));
      repeated.push_back(v);
      repeated.push_back(c);
    }
  }
  finalize(s);
  return s;
}

// Grid plus sparse long-range contacts drawn with probability proportional
// to (Manhattan distance)^-2; roughly 0.6 contacts per node.
Skeleton gen_small_world(int side, std::mt19937_64& rng) {
  Skeleton s = gen_grid(side);
  const int n = side * side;
  std::set<EdgePair> es(s.edges.begin(), s.edges.end());
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  for (NodeId u = 0; u < n; ++u) {
    if (coin(rng) >= 0.6) continue;
    const int ux = u / side, uy = u % side;
    std::vector<double> cum(n, 0.0);
    double tot = 0.0;
    for (NodeId v = 0; v < n; ++v) {
      if (v != u) {
        const int d = std::abs(ux - v / side) + std::abs(uy - v % side);
        tot += 1.0 / (static_cast<double>(d) * d);
      }
      cum[v] = tot;
    }
    const double r = coin(rng) * tot;
    NodeId v = static_cast<NodeId>(
        std::lower_bound(cum.begin(), cum.end(), r) - cum.begin());
    if (v != u) es.insert(ordered(u, v));
  }
  s.edges.assign(es.begin(), es.end());
  finalize(s);
  return s;
}

}  // namespace

TopologyKind parse_topology(const std::string& name) {
  for (TopologyKind k : all_topologies())
    if (topology_name(k) == name) return k;
  throw std::invalid_argument("unknown topology: " + name);
}

std::string topology_name(TopologyKind kind) {
  switch (kind) {
    case TopologyKind::grid_2d: return "grid_2d";
    case TopologyKind::expander: return "expander";
    case TopologyKind::erdos_renyi: return "erdos_renyi";
    case TopologyKind::small_world: return "small_world";
    case TopologyKind::watts_strogatz: return "watts_strogatz";
    case TopologyKind::barabasi_albert: return "barabasi_albert";
    case TopologyKind::geant: return "geant";
    case TopologyKind::abilene: return "abilene";
    case TopologyKind::dtelekom: return "dtelekom";
  }
  throw std::invalid_argument("unknown topology kind");
}

std::vector<TopologyKind> all_topologies() {
  return {TopologyKind::grid_2d,        TopologyKind::expander,
          TopologyKind::erdos_renyi,    TopologyKind::small_world,
          TopologyKind::watts_strogatz, TopologyKind::barabasi_albert,
          TopologyKind::geant,          TopologyKind::abilene,
          TopologyKind::dtelekom};
}

Skeleton generate(const TopologySpec& spec) {
  auto rng = make_rng(spec.seed, "topology");
  const int n = spec.nodes;
  switch (spec.kind) {
    case TopologyKind::grid_2d: {
      int side = n > 0 ? static_cast<int>(std::lround(std::sqrt(n))) : 10;
      if (side * side != (n > 0 ? n : 100))
        throw std::invalid_argument("grid_2d needs a square node count");
      return gen_grid(side);
    }
    case TopologyKind::expander: {
      int side = n > 0 ? static_cast<int>(std::lround(std::sqrt(n))) : 10;
      if (side * side != (n > 0 ? n : 100))
        throw std::invalid_argument("expander needs a square node count");
      return gen_expander(side);
    }
    case TopologyKind::erdos_renyi:
      return gen_erdos_renyi(n > 0 ? n : 100, 0.1, rng);
    case TopologyKind::small_world: {
      int side = n > 0 ? static_cast<int>(std::lround(std::sqrt(n))) : 10;
      if (side * side != (n > 0 ? n : 100))
        throw std::invalid_argument("small_world needs a square node count");
      return gen_small_world(side, rng);
    }
    case TopologyKind::watts_strogatz:
      return gen_watts_strogatz(n > 0 ? n : 100, 4, 0.3, rng);
    case TopologyKind::barabasi_albert:
      return gen_barabasi_albert(n > 0 ? n : 100, 4, rng);
    case TopologyKind::geant:
      return from_fixed(22, kGeant, std::size(kGeant));
    case TopologyKind::abilene:
      return from_fixed(9, kAbilene, std::size(kAbilene));
    case TopologyKind::dtelekom:
      return from_fixed(68, kDtelekom, std::size(kDtelekom));
  }
  throw std::invalid_argument("unknown topology kind");
}

InstanceParams default_params(TopologyKind kind) {
  switch (kind) {
    case TopologyKind::grid_2d: return {100, 20, 1000, 300};
    case TopologyKind::expander: return {100, 50, 2000, 400};
    case TopologyKind::erdos_renyi: return {100, 50, 2000, 400};
    case TopologyKind::small_world: return {100, 50, 2000, 400};
    case TopologyKind::watts_strogatz: return {100, 50, 2000, 400};
    case TopologyKind::barabasi_albert: return {100, 50, 2000, 400};
    case TopologyKind::geant: return {100, 20, 1000, 144};
    case TopologyKind::abilene: return {10, 9, 100, 28};
    case TopologyKind::dtelekom: return {100, 20, 1000, 304};
  }
  throw std::invalid_argument("unknown topology kind");
}

ZipfSampler::ZipfSampler(int n, double exponent) : cdf_(n) {
  double tot = 0.0;
  for (int i = 0; i < n; ++i) {
    tot += std::pow(i + 1.0, -exponent);
    cdf_[i] = tot;
  }
  for (double& c : cdf_) c /= tot;
}

double ZipfSampler::probability(int i) const {
  return cdf_[i] - (i > 0 ? cdf_[i - 1] : 0.0);
}

int ZipfSampler::pick(double u) const {
  return static_cast<int>(std::lower_bound(cdf_.begin(), cdf_.end(), u) -
                          cdf_.begin());
}

Instance synthesize_instance(const Skeleton& skel, const InstanceParams& prm,
                             uint64_t seed) {
  if (prm.catalog <= 0 || prm.consumers <= 0 || prm.requests < 0)
    throw std::invalid_argument("synthesize_instance: bad parameters");
  if (prm.consumers > skel.num_nodes)
    throw std::invalid_argument("synthesize_instance: more consumers than nodes");
  if (prm.budget < prm.catalog)
    throw std::invalid_argument(
        "synthesize_instance: budget below the designated load");

  auto rng = make_rng(seed, "demand");
  std::uniform_real_distribution<double> wdist(0.01, 1.0);
  std::vector<Edge> edges;
  edges.reserve(skel.edges.size());
  for (auto [u, v] : skel.edges) edges.push_back({u, v, wdist(rng)});

  std::uniform_int_distribution<NodeId> anynode(0, skel.num_nodes - 1);
  std::vector<std::vector<NodeId>> servers(prm.catalog);
  for (auto& s : servers) s.push_back(anynode(rng));

  std::vector<NodeId> pool(skel.num_nodes);
  for (NodeId v = 0; v < skel.num_nodes; ++v) pool[v] = v;
  for (int k = 0; k < prm.consumers; ++k) {
    std::uniform_int_distribution<int> pick(k, skel.num_nodes - 1);
    std::swap(pool[k], pool[pick(rng)]);
  }
  std::vector<NodeId> consumers(pool.begin(), pool.begin() + prm.consumers);

  Network net = make_network(skel.num_nodes, prm.catalog, edges,
                             std::move(servers),
                             std::vector<int>(skel.num_nodes, prm.catalog),
                             prm.budget);

  ZipfSampler zipf(prm.catalog, 1.2);
  std::uniform_int_distribution<int> qpick(0, prm.consumers - 1);
  std::vector<DemandLine> lines;
  lines.reserve(prm.requests);
  for (int r = 0; r < prm.requests; ++r) {
    const NodeId consumer = consumers[qpick(rng)];
    const ItemId item = zipf.sample(rng);
    lines.push_back({item, consumer, 1.0});
  }
  Instance inst;
  inst.demand = build_demand(net, lines, 1.0);
  inst.net = std::move(net);
  return inst;
}

}  // namespace cachegain
