#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "cachegain/model.hpp"
#include "cachegain/objective.hpp"

namespace cachegain {

// Forward pass of a gradient probe: a running sum of allocation values along
// the request path. Propagation stops at the first node whose running sum
// exceeds 1 + alpha/2 (no node beyond it can contribute a nonzero derivative
// term), otherwise at the path end. Every visited node keeps its copy.
struct ForwardProbe {
  int stop_index = 0;           // index into the request path
  std::vector<double> running;  // running[k], k = 0..stop_index
};

ForwardProbe forward_probe(const Demand::Entry& entry, const Matrix& y,
                           const SurrogateParams& p);

// Reverse pass: walks back from the stop node accumulating hop weight times
// the saturation slope of the stored running sums. Returns one (node, value)
// sample per visited node, in walk order (stop node first, value 0).
std::vector<std::pair<NodeId, double>> reverse_probe(const Demand::Entry& entry,
                                                     const ForwardProbe& fwd,
                                                     const SurrogateParams& p);

// Per-period sample sink. Samples for one (node, item) accumulate additively;
// the period estimate divides by the period length and clears.
class GradientAccumulator {
 public:
  GradientAccumulator(int num_nodes, int num_items)
      : sums_(num_nodes, num_items, 0.0) {}

  void add(NodeId v, ItemId i, double t) { sums_(v, i) += t; }
  void add_samples(const std::vector<std::pair<NodeId, double>>& samples,
                   ItemId i) {
    for (const auto& [v, t] : samples) sums_(v, i) += t;
  }

  // sums / period, then reset
  Matrix period_estimate(double period);

 private:
  Matrix sums_;
};

// Total weight of a path (sum of downstream-to-upstream hop weights).
double probe_path_weight(const Network& net, const std::vector<NodeId>& path);

// Over-estimate of the baseline cost attributable to requests originating at
// v: sum of rate_bound * path weight over entries with path[0] == v.
double local_c0(const Network& net, const Demand& demand, NodeId v);

// Average consensus over the network graph.
enum class ConsensusScheme { local_degree, constant_edge };

struct ConsensusState {
  std::vector<double> values;
  ConsensusScheme scheme = ConsensusScheme::local_degree;
  double edge_weight = 0.0;  // used by constant_edge only
};

// Largest admissible constant edge weight is 2 / max over edges of the
// endpoint degree sum; returns half of that as a safe default.
double default_edge_weight(const Network& net);

// One synchronous iteration s <- A s with the selected doubly stochastic
// weights. Throws std::invalid_argument for an out-of-range constant edge
// weight. skip_edge, when set, excludes an undirected edge from this
// iteration (both directions), modeling a lost exchange without breaking sum
// conservation.
void consensus_step(const Network& net, ConsensusState& s,
                    const std::function<bool(NodeId, NodeId)>& skip_edge = {});

// Dense weight matrix of the iteration (for spectrum checks).
Matrix consensus_matrix(const Network& net, const ConsensusState& s);

// Runs consensus from s_v(0) = local_c0(v) and scales the reached average by
// node_count_bound (>= |V|), yielding an over-estimate of the baseline cost
// once converged. Stops after max_iters iterations or when the value spread
// drops below 1e-9.
double estimate_c0_bar(const Network& net, const Demand& demand,
                       double node_count_bound, int max_iters,
                       ConsensusScheme scheme = ConsensusScheme::local_degree,
                       double edge_weight = 0.0, int* iters_used = nullptr);

}  // namespace cachegain
