#include "cachegain/cachesim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "cachegain/central.hpp"
#include "cachegain/config.hpp"
#include "cachegain/rng.hpp"

namespace cachegain {

namespace {

inline double pos(double x) { return x > 0.0 ? x : 0.0; }

// Rate events; budget events need the game state and are handled separately.
bool apply_rates_event(Demand& demand, const SimEvent& ev,
                       std::mt19937_64& rng) {
  switch (ev.kind) {
    case SimEvent::Kind::rates_uniform: {
      if (ev.a < 0 || ev.b < ev.a)
        throw std::invalid_argument("rates_uniform: bad interval");
      std::uniform_real_distribution<double> u(ev.a, ev.b);
      for (auto& e : demand.entries) e.rate = u(rng);
      return true;
    }
    case SimEvent::Kind::rates_set:
      if (ev.a < 0) throw std::invalid_argument("rates_set: negative rate");
      for (auto& e : demand.entries) e.rate = ev.a;
      return true;
    case SimEvent::Kind::rates_scale:
      if (ev.a < 0) throw std::invalid_argument("rates_scale: negative factor");
      for (auto& e : demand.entries) e.rate *= ev.a;
      return true;
    default:
      return false;
  }
}

void check_rate_bounds(const Demand& demand) {
  for (const auto& e : demand.entries)
    if (e.rate > e.rate_bound + 1e-12)
      throw std::invalid_argument(
          "event pushed a rate above its declared bound");
}

struct ProbeCounters {
  long long ms = 0, mr = 0;
};

// One gradient probe along a request path with per-transmission loss. Sends
// are counted even when the message is lost. A lost forward message ends the
// probe with no samples; a lost reverse message keeps the samples already
// delivered downstream of the break.
void run_probe(const Demand::Entry& entry, const Allocation& y,
               const SurrogateParams& sp, double drop_prob,
               std::mt19937_64& rng_drop, double weight,
               GradientAccumulator& acc, ProbeCounters& pc) {
  const auto& path = entry.req.path;
  const int n = static_cast<int>(path.size());
  const double stop_level = 1.0 + 0.5 * sp.alpha;
  std::uniform_real_distribution<double> u(0.0, 1.0);

  thread_local std::vector<double> running;
  running.assign(n, 0.0);
  double s = 0.0;
  int last = 0;
  for (int k = 0; k < n; ++k) {
    if (k > 0) {
      ++pc.ms;
      if (drop_prob > 0 && u(rng_drop) < drop_prob) return;
    }
    s += y(path[k], entry.req.item);
    running[k] = s;
    last = k;
    if (s > stop_level) break;
  }
  double mr = 0.0;  // the stop node's sample is identically zero
  for (int l = last - 1; l >= 0; --l) {
    ++pc.mr;
    if (drop_prob > 0 && u(rng_drop) < drop_prob) break;
    mr += entry.hop_w[l] * sat_prime(running[l], sp);
    acc.add(path[l], entry.req.item, weight * mr);
  }
}

double upper_bound_for(const Network& net, const Demand& demand, double budget,
                       double cert_alpha) {
  Network scoped = net;
  scoped.budget = budget;
  SurrogateParams sp{cert_alpha};
  return solve_relaxation(scoped, demand, sp).l_upper;
}

}  // namespace

std::pair<int, std::vector<ItemId>> evict(std::span<const double> y, int cap,
                                          EvictionMode mode,
                                          std::span<const ItemId> designated) {
  const int n = static_cast<int>(y.size());
  double sum = 0.0;
  for (double v : y) sum += v;
  int c = mode == EvictionMode::hard
              ? static_cast<int>(std::floor(sum + 1e-9))
              : static_cast<int>(std::lround(sum));
  c = std::clamp(c, static_cast<int>(designated.size()), std::min(cap, n));

  std::vector<char> pinned(n, 0);
  for (ItemId i : designated) pinned[i] = 1;
  std::vector<ItemId> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](ItemId a, ItemId b) {
    if (pinned[a] != pinned[b]) return pinned[a] > pinned[b];
    if (y[a] != y[b]) return y[a] > y[b];
    return a < b;
  });
  std::vector<ItemId> kept(order.begin(), order.begin() + c);
  std::sort(kept.begin(), kept.end());
  return {c, kept};
}

double measured_gain(const Network& net, const Demand::Entry& entry,
                     const Placement& contents) {
  (void)net;
  const auto& path = entry.req.path;
  double saved = 0.0;
  bool hit = false;
  for (size_t j = 0; j < entry.hop_w.size(); ++j) {
    hit = hit || contents(path[j], entry.req.item) > 0.5;
    if (hit) saved += entry.hop_w[j];
  }
  return saved;
}

void apply_event(const Network& net, const SimEvent& ev, Demand& demand,
                 double& budget, GameState& state, std::mt19937_64& rng) {
  if (apply_rates_event(demand, ev, rng)) {
    check_rate_bounds(demand);
    return;
  }
  double next = budget;
  if (ev.kind == SimEvent::Kind::budget_set)
    next = ev.a;
  else
    next += ev.a;
  if (next < net.total_designated())
    throw std::invalid_argument("budget event drops below the designated load");
  double slack = budget;
  for (double c : state.share) slack -= c;
  rebase_budget(net, state, next, slack);
  budget = next;
}

const char* metrics_csv_header() {
  return "t,F_heu,L_tilde,L_upper,frac_cache_total,int_cache_total,violation,"
         "measured_gain,msg_ms,msg_mr,msg_e,msg_consensus";
}

void write_metrics_csv(const std::string& path,
                       const std::vector<MetricsRow>& rows,
                       const MessageTotals& totals) {
  std::string out;
  out.reserve(rows.size() * 96 + 256);
  out += metrics_csv_header();
  out += '\n';
  char buf[320];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf,
                  "%.10g,%.10g,%.10g,%.10g,%.10g,%d,%.10g,%.10g,%lld,%lld,%lld,%lld\n",
                  r.t, r.f_heu, r.l_tilde, r.l_upper, r.frac_cache_total,
                  r.int_cache_total, r.violation, r.measured_gain, r.msg_ms,
                  r.msg_mr, r.msg_e, r.msg_consensus);
    out += buf;
  }
  const long long total = totals.ms + totals.mr + totals.e + totals.consensus;
  std::snprintf(buf, sizeof buf,
                "# totals_bytes ms=%lld mr=%lld e=%lld consensus=%lld total=%lld\n",
                totals.bytes(totals.ms), totals.bytes(totals.mr),
                totals.bytes(totals.e), totals.bytes(totals.consensus),
                totals.bytes(total));
  out += buf;
  atomic_write_text(path, out);
}

SimResult run(const Network& net, const Demand& demand, const SimConfig& cfg) {
  if (auto msg = validate_network(net); !msg.empty())
    throw std::invalid_argument("invalid network: " + msg);

  auto rng_arrivals = make_rng(cfg.seed, "arrivals");
  auto rng_drop = make_rng(cfg.seed, "drop");
  auto rng_events = make_rng(cfg.seed, "events");
  auto rng_probe = make_rng(cfg.seed, "probe");

  SimResult res;
  res.demand = demand;
  res.budget = net.budget;

  std::vector<SimEvent> events = cfg.events;
  std::stable_sort(events.begin(), events.end(),
                   [](const SimEvent& a, const SimEvent& b) { return a.time < b.time; });
  size_t next_event = 0;
  while (next_event < events.size() && events[next_event].time <= 0.0) {
    const SimEvent& ev = events[next_event];
    if (!apply_rates_event(res.demand, ev, rng_events)) {
      double b = ev.kind == SimEvent::Kind::budget_set ? ev.a : res.budget + ev.a;
      if (b < net.total_designated())
        throw std::invalid_argument("budget event drops below the designated load");
      res.budget = b;
    }
    ++next_event;
  }
  // Rate bounds drive the baseline-cost over-estimate; they must dominate
  // both the declared ceiling and the rates actually in force.
  for (auto& e : res.demand.entries)
    e.rate_bound = std::max(cfg.lambda_bar, e.rate);

  const bool protocol_mode = cfg.grad == GradientMode::protocol;
  const long long edge_count = net.num_edges();
  if (protocol_mode) {
    double n_bar = cfg.node_count_bound > 0 ? cfg.node_count_bound
                                            : static_cast<double>(net.num_nodes);
    if (n_bar < net.num_nodes)
      throw std::invalid_argument("node_count_bound below the node count");
    double ew = cfg.consensus_edge_weight > 0 ? cfg.consensus_edge_weight
                                              : default_edge_weight(net);
    int iters = 0;
    res.c0_bar = estimate_c0_bar(net, res.demand, n_bar, cfg.consensus_iters,
                                 cfg.consensus_scheme, ew, &iters);
    res.totals.consensus = 2LL * edge_count * iters;
  } else {
    double sum = 0.0;
    for (NodeId v = 0; v < net.num_nodes; ++v)
      sum += local_c0(net, res.demand, v);
    res.c0_bar = sum;
  }

  res.params.alpha = cfg.alpha;
  if (res.c0_bar > 1e-12) {
    res.params.penalty = cfg.mu0 * res.c0_bar;
    res.params.step = cfg.gamma > 0
                          ? cfg.gamma
                          : step_bound_practical(res.c0_bar, cfg.mu0, cfg.alpha);
  } else {  // no demand: freeze the dynamics
    res.params.penalty = cfg.mu0;
    res.params.step = cfg.gamma > 0 ? cfg.gamma : 0.0;
  }

  res.state = init_state(net, res.budget, cfg.epsilon, net.designated_placement());

  auto designated = net.designated_by_node();
  CacheContents contents;
  contents.mask = Placement(net.num_nodes, net.num_items, 0.0);
  contents.sizes.assign(net.num_nodes, 0);
  auto refresh_contents = [&]() {
    for (NodeId v = 0; v < net.num_nodes; ++v) {
      auto [c, kept] = evict(res.state.y.row(v), net.caps[v], cfg.evict,
                             designated[v]);
      for (ItemId i = 0; i < net.num_items; ++i) contents.mask(v, i) = 0.0;
      for (ItemId i : kept) contents.mask(v, i) = 1.0;
      contents.sizes[v] = c;
    }
  };
  refresh_contents();

  double l_upper_cur =
      cfg.compute_upper
          ? upper_bound_for(net, res.demand, res.budget, cfg.cert_alpha)
          : std::numeric_limits<double>::quiet_NaN();

  const SurrogateParams sp{cfg.alpha};
  GradientAccumulator acc(net.num_nodes, net.num_items);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double probe_weight = 1.0 / cfg.probe_fraction;
  const long long periods =
      static_cast<long long>(std::floor(cfg.horizon / cfg.period + 1e-9));
  res.rows.reserve(periods);

  double share_sum = 0.0;
  for (double c : res.state.share) share_sum += c;

  for (long long n = 1; n <= periods; ++n) {
    const double t_end = static_cast<double>(n) * cfg.period;
    MetricsRow row;
    row.t = t_end;

    // arrivals: serve against the integer contents, attach probes
    ProbeCounters pc;
    double saved = 0.0;
    for (const auto& e : res.demand.entries) {
      const double mean = e.rate * cfg.period;
      long long k = 0;
      if (mean > 0) {
        std::poisson_distribution<long long> poisson(mean);
        k = poisson(rng_arrivals);
      }
      if (k <= 0) continue;
      saved += static_cast<double>(k) * measured_gain(net, e, contents.mask);
      if (protocol_mode) {
        for (long long a = 0; a < k; ++a) {
          if (cfg.probe_fraction < 1.0 && unit(rng_probe) >= cfg.probe_fraction)
            continue;
          run_probe(e, res.state.y, sp, cfg.drop_prob, rng_drop, probe_weight,
                    acc, pc);
        }
      }
    }
    row.measured_gain = saved / cfg.period;
    row.msg_ms = pc.ms;
    row.msg_mr = pc.mr;

    Matrix grad = protocol_mode ? acc.period_estimate(cfg.period)
                                : smooth_gain_grad(net, res.demand, res.state.y, sp);

    if (cfg.drop_prob > 0) {
      auto skip = [&](NodeId, NodeId) {
        bool lost_fwd = unit(rng_drop) < cfg.drop_prob;
        bool lost_bwd = unit(rng_drop) < cfg.drop_prob;
        return lost_fwd || lost_bwd;
      };
      res.state = advance_round(net, res.state, res.params, grad, skip);
    } else {
      res.state = advance_round(net, res.state, res.params, grad);
    }
    row.msg_e = 2 * edge_count;
    row.msg_consensus = n == 1 ? res.totals.consensus : 0;

    if (res.state.conservation_gap() > 1e-7 * std::max(1.0, res.budget))
      throw std::runtime_error("invariant breach: budget-error conservation");

    refresh_contents();

    row.f_heu = caching_gain(net, res.demand, contents.mask);
    row.l_tilde = smooth_gain(net, res.demand, res.state.y, sp);
    row.l_upper = l_upper_cur;
    row.frac_cache_total = res.state.y.total();
    row.int_cache_total = 0;
    for (int c : contents.sizes) row.int_cache_total += c;
    row.violation = pos(row.frac_cache_total - share_sum);

    bool regime_changed = false;
    while (next_event < events.size() && events[next_event].time <= t_end + 1e-9) {
      apply_event(net, events[next_event], res.demand, res.budget, res.state,
                  rng_events);
      regime_changed = true;
      ++next_event;
    }
    if (regime_changed) {
      share_sum = 0.0;
      for (double c : res.state.share) share_sum += c;
      if (cfg.compute_upper)
        l_upper_cur =
            upper_bound_for(net, res.demand, res.budget, cfg.cert_alpha);
    }

    res.totals.ms += row.msg_ms;
    res.totals.mr += row.msg_mr;
    res.totals.e += row.msg_e;
    res.rows.push_back(row);
  }

  return res;
}

}  // namespace cachegain
