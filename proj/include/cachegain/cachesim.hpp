#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cachegain/game.hpp"
#include "cachegain/model.hpp"
#include "cachegain/protocol.hpp"

namespace cachegain {

enum class GradientMode { oracle, protocol };
enum class EvictionMode { hard, soft };

struct SimEvent {
  enum class Kind {
    rates_uniform,  // redraw each rate uniformly from [a, b]
    rates_set,      // set every rate to a
    rates_scale,    // multiply every rate by a
    budget_set,     // set the global budget to a
    budget_delta,   // add a to the global budget
  };
  double time = 0.0;
  Kind kind = Kind::rates_set;
  double a = 0.0;
  double b = 0.0;
};

struct SimConfig {
  double period = 1.0;
  double horizon = 0.0;
  uint64_t seed = 1;
  GradientMode grad = GradientMode::protocol;
  EvictionMode evict = EvictionMode::soft;
  double alpha = 0.2;
  double mu0 = 0.25;      // penalty = mu0 * estimated baseline cost
  double epsilon = 0.1;   // budget slack split across nodes
  double gamma = 0.0;     // <= 0 selects the practical step bound
  double lambda_bar = 1.0;
  double drop_prob = 0.0;       // per control-message transmission
  double probe_fraction = 1.0;  // probes attached to this share of arrivals
  int consensus_iters = 200;
  ConsensusScheme consensus_scheme = ConsensusScheme::local_degree;
  double consensus_edge_weight = 0.0;  // 0 = auto
  double node_count_bound = 0.0;       // 0 = |V|
  bool compute_upper = true;
  double cert_alpha = 0.05;  // smoothing width for the upper-bound solves
  std::vector<SimEvent> events;
};

struct MetricsRow {
  double t = 0.0;
  double f_heu = 0.0;       // gain of the integer cache contents
  double l_tilde = 0.0;     // smooth gain of the fractional state
  double l_upper = 0.0;     // certified upper bound for the active regime
  double frac_cache_total = 0.0;
  int int_cache_total = 0;
  double violation = 0.0;   // positive part of (fractional total - shares)
  double measured_gain = 0.0;  // empirically saved cost per time unit
  long long msg_ms = 0;
  long long msg_mr = 0;
  long long msg_e = 0;
  long long msg_consensus = 0;
};

struct MessageTotals {
  long long ms = 0, mr = 0, e = 0, consensus = 0;
  // 8-byte scalar payload plus a 4-byte tag per message
  long long bytes(long long count) const { return count * 12; }
};

struct CacheContents {
  Placement mask;          // {0,1} per (node, item)
  std::vector<int> sizes;  // per-node item count
};

struct SimResult {
  std::vector<MetricsRow> rows;
  GameState state;
  Demand demand;  // rates after all applied events
  double budget = 0.0;
  double c0_bar = 0.0;  // baseline-cost over-estimate driving mu and gamma
  GameParams params;
  MessageTotals totals;
};

// Discrete-event loop. Each period: Poisson arrivals per request class,
// serving against the integer cache contents, probe passes (protocol mode),
// one game round, eviction, scheduled events, one metrics row. Throws
// std::runtime_error if the conservation identity breaks (an internal
// invariant, surfaced as exit code 3 by the command-line tool).
SimResult run(const Network& net, const Demand& demand, const SimConfig& cfg);

// Integer cache for one node: hard mode floors the fractional total, soft
// mode rounds to nearest; both are capped. The kept items are the largest
// fractional values, designated items first, ties to the smallest id.
std::pair<int, std::vector<ItemId>> evict(std::span<const double> y, int cap,
                                          EvictionMode mode,
                                          std::span<const ItemId> designated);

// Cost saved for one request under the given integer contents: hop weights
// accrue from the first node holding the item onward.
double measured_gain(const Network& net, const Demand::Entry& entry,
                     const Placement& contents);

// Applies one scheduled event to demand rates or to the budget (rebasing the
// game state so the conservation identity survives). rng feeds rate redraws.
void apply_event(const Network& net, const SimEvent& ev, Demand& demand,
                 double& budget, GameState& state, std::mt19937_64& rng);

// Writes rows in the stable schema, then '#'-prefixed byte totals, atomically
// (temp file + rename).
void write_metrics_csv(const std::string& path,
                       const std::vector<MetricsRow>& rows,
                       const MessageTotals& totals);

const char* metrics_csv_header();

}  // namespace cachegain
