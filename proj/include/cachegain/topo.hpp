#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "cachegain/model.hpp"

namespace cachegain {

enum class TopologyKind {
  grid_2d,
  expander,
  erdos_renyi,
  small_world,
  watts_strogatz,
  barabasi_albert,
  geant,
  abilene,
  dtelekom,
};

TopologyKind parse_topology(const std::string& name);
std::string topology_name(TopologyKind kind);
std::vector<TopologyKind> all_topologies();

struct TopologySpec {
  TopologyKind kind = TopologyKind::grid_2d;
  int nodes = 0;      // 0 = kind default; fixed for the backbone kinds
  uint64_t seed = 0;  // consumed by the random families only
};

// Unweighted undirected graph: node count plus sorted (u < v) edge list.
struct Skeleton {
  int num_nodes = 0;
  std::vector<std::pair<NodeId, NodeId>> edges;
};

// Builds the graph for a spec. Random families draw from the "topology"
// stream of the seed and are repaired to connectivity by deterministically
// bridging components (smallest ids first). Backbone kinds return fixed edge
// lists that match the copies shipped under data/topologies/.
Skeleton generate(const TopologySpec& spec);

struct InstanceParams {
  int catalog = 0;
  int consumers = 0;
  int requests = 0;
  double budget = 0;
};

// Catalog size, consumer count, request draws, and budget used for each kind
// in the benchmark suite.
InstanceParams default_params(TopologyKind kind);

struct Instance {
  Network net;
  Demand demand;
};

// Dresses a skeleton into a full instance, drawing from the "demand" stream
// of the seed in a fixed order: edge weights uniform on [0.01, 1], one
// designated server per item uniform over nodes, the consumer set uniform
// without replacement, then `requests` (consumer, item) draws with items
// Zipf(1.2)-distributed by id. Duplicate draws merge by summing unit rates.
// Per-node caps equal the catalog size. Throws if budget < catalog.
Instance synthesize_instance(const Skeleton& skel, const InstanceParams& prm,
                             uint64_t seed);

// Inverse-CDF Zipf sampler over {0..n-1} with mass proportional to
// (i+1)^-exponent.
class ZipfSampler {
 public:
  ZipfSampler(int n, double exponent);
  double probability(int i) const;
  template <typename Rng>
  int sample(Rng& rng) const {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    return pick(u(rng));
  }

 private:
  int pick(double u) const;
  std::vector<double> cdf_;
};

}  // namespace cachegain
