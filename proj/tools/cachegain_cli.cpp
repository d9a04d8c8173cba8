#include <cstdio>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cachegain/central.hpp"
#include "cachegain/config.hpp"
#include "cachegain/experiment.hpp"
#include "cachegain/model.hpp"
#include "cachegain/topo.hpp"

namespace fs = std::filesystem;
using namespace cachegain;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitInvariant = 3;

struct LoadedInstance {
  Network net;
  Demand demand;
  KVConfig manifest;
};

LoadedInstance load_instance(const std::string& dir) {
  fs::path d(dir);
  if (!fs::is_directory(d))
    throw std::invalid_argument("instance directory not found: " + dir);
  LoadedInstance out;
  out.manifest = KVConfig::parse_file((d / "manifest.txt").string());
  GraphData g = load_graph((d / "graph.txt").string());
  int nodes = get_int(out.manifest, "nodes", g.num_nodes);
  int catalog = get_int(out.manifest, "catalog", -1);
  auto servers = load_servers((d / "servers.txt").string(), catalog);
  if (catalog < 0) catalog = static_cast<int>(servers.size());
  double budget = get_double(out.manifest, "budget", 0.0);
  int cap = get_int(out.manifest, "caps", catalog);
  out.net = make_network(nodes, catalog, g.edges, std::move(servers),
                         std::vector<int>(nodes, cap), budget);
  double lambda_bar = get_double(out.manifest, "lambda_bar", 1.0);
  out.demand = build_demand(
      out.net, load_demand_lines((d / "demand.txt").string()), lambda_bar);
  return out;
}

int cmd_generate(const std::string& topology, uint64_t seed,
                 const std::string& out_dir, int nodes, int catalog,
                 int consumers, int requests, double budget) {
  TopologySpec spec;
  spec.kind = parse_topology(topology);
  spec.nodes = nodes;
  spec.seed = seed;
  InstanceParams prm = default_params(spec.kind);
  if (catalog > 0) prm.catalog = catalog;
  if (consumers > 0) prm.consumers = consumers;
  if (requests > 0) prm.requests = requests;
  if (budget > 0) prm.budget = budget;

  Skeleton skel = generate(spec);
  Instance inst = synthesize_instance(skel, prm, seed);

  fs::create_directories(out_dir);
  fs::path d(out_dir);
  save_graph(inst.net, (d / "graph.txt").string());
  save_servers(inst.net, (d / "servers.txt").string());
  save_demand(inst.demand, (d / "demand.txt").string());

  KVConfig manifest;
  manifest.add("topology", topology_name(spec.kind));
  manifest.add("seed", std::to_string(seed));
  manifest.add("nodes", std::to_string(inst.net.num_nodes));
  manifest.add("edges", std::to_string(inst.net.num_edges()));
  manifest.add("catalog", std::to_string(inst.net.num_items));
  manifest.add("consumers", std::to_string(prm.consumers));
  manifest.add("requests", std::to_string(prm.requests));
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", inst.net.budget);
  manifest.add("budget", buf);
  manifest.add("caps", std::to_string(inst.net.caps.empty() ? 0 : inst.net.caps[0]));
  manifest.add("lambda_bar", "1");
  manifest.save((d / "manifest.txt").string());

  std::printf("instance=%s nodes=%d edges=%d catalog=%d requests=%zu budget=%g\n",
              out_dir.c_str(), inst.net.num_nodes, inst.net.num_edges(),
              inst.net.num_items, inst.demand.entries.size(), inst.net.budget);
  return 0;
}

void save_matrix_entries(const Matrix& m, const std::string& path,
                         double threshold) {
  std::string out = "# node item value\n";
  char buf[96];
  for (int v = 0; v < m.rows(); ++v)
    for (int i = 0; i < m.cols(); ++i)
      if (m(v, i) > threshold) {
        std::snprintf(buf, sizeof buf, "%d %d %.17g\n", v, i, m(v, i));
        out += buf;
      }
  atomic_write_text(path, out);
}

int cmd_solve(const std::string& dir, const std::string& method, double alpha,
              double step, int max_iters, double tol,
              const std::string& out_dir) {
  LoadedInstance inst = load_instance(dir);
  if (auto msg = validate_network(inst.net); !msg.empty())
    throw std::invalid_argument("infeasible instance: " + msg);
  SurrogateParams sp{alpha};

  RelaxedSolution sol;
  Placement x;
  bool have_x = false;
  if (method == "equal-cap") {
    sol = equal_capacity_bound(inst.net, inst.demand, sp, step, max_iters, tol);
  } else {
    sol = solve_relaxation(inst.net, inst.demand, sp, step, max_iters, tol);
    if (method == "greedy") {
      x = greedy_placement(inst.net, inst.demand);
      have_x = true;
    } else if (method == "pipage") {
      x = pipage_round(inst.net, inst.demand, sol.y_star);
      have_x = true;
    } else if (method != "relax") {
      throw std::invalid_argument("unknown method: " + method);
    }
  }

  double f = have_x ? caching_gain(inst.net, inst.demand, x)
                    : caching_gain(inst.net, inst.demand, sol.y_star);
  double ratio = sol.l_tilde_star > 0 ? f / sol.l_tilde_star : 0.0;
  std::printf("method=%s\nF=%.10g\nL_tilde_star=%.10g\nL_upper=%.10g\n"
              "ratio=%.10g\niterations=%d\nconverged=%d\n",
              method.c_str(), f, sol.l_tilde_star, sol.l_upper, ratio,
              sol.iterations, sol.converged ? 1 : 0);

  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    fs::path d(out_dir);
    save_matrix_entries(sol.y_star, (d / "allocation.txt").string(), 1e-12);
    if (have_x) save_matrix_entries(x, (d / "placement.txt").string(), 0.5);
    KVConfig report;
    report.add("instance", dir);
    report.add("method", method);
    char buf[40];
    auto put = [&](const char* k, double v) {
      std::snprintf(buf, sizeof buf, "%.17g", v);
      report.add(k, buf);
    };
    put("F", f);
    put("L_tilde_star", sol.l_tilde_star);
    put("L_upper", sol.l_upper);
    put("ratio", ratio);
    report.add("iterations", std::to_string(sol.iterations));
    report.add("converged", sol.converged ? "1" : "0");
    report.save((d / "report.txt").string());
  }
  return 0;
}

int cmd_run(const std::string& dir, const KVConfig& kv,
            const std::string& out_dir) {
  SimConfig cfg = parse_sim_config(kv);
  LoadedInstance inst = load_instance(dir);
  SimResult res = run(inst.net, inst.demand, cfg);

  fs::create_directories(out_dir);
  fs::path d(out_dir);
  write_metrics_csv((d / "metrics.csv").string(), res.rows, res.totals);
  KVConfig manifest = serialize_sim_config(cfg);
  manifest.add("instance", dir);
  manifest.add("output", "metrics.csv");
  manifest.save((d / "manifest.txt").string());

  if (res.rows.empty()) {
    std::printf("periods=0\n");
  } else {
    const MetricsRow& last = res.rows.back();
    std::printf("periods=%zu\nF_heu=%.10g\nL_tilde=%.10g\nL_upper=%.10g\n"
                "c0_bar=%.10g\nstep=%.10g\n",
                res.rows.size(), last.f_heu, last.l_tilde, last.l_upper,
                res.c0_bar, res.params.step);
  }
  return 0;
}

int cmd_compare(const CompareOptions& opt) {
  CompareResult res = run_comparison(opt);
  std::fputs(summary_csv(res).c_str(), stdout);
  int failures = 0;
  for (const auto& cell : res.cells)
    if (!cell.ok) {
      ++failures;
      std::fprintf(stderr, "run failed: %s seed %llu: %s\n",
                   topology_name(cell.kind).c_str(),
                   static_cast<unsigned long long>(cell.seed),
                   cell.error.c_str());
    }
  if (failures > 0)
    std::fprintf(stderr, "%d of %zu runs failed\n", failures, res.cells.size());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cache capacity allocation and placement toolkit"};
  app.require_subcommand(1);

  // generate
  std::string g_topology, g_out = "instance";
  uint64_t g_seed = 1;
  int g_nodes = 0, g_catalog = 0, g_consumers = 0, g_requests = 0;
  double g_budget = 0;
  auto* gen = app.add_subcommand("generate", "synthesize a benchmark instance");
  gen->add_option("topology", g_topology,
                  "grid_2d|expander|erdos_renyi|small_world|watts_strogatz|"
                  "barabasi_albert|geant|abilene|dtelekom")
      ->required();
  gen->add_option("--seed", g_seed, "rng seed");
  gen->add_option("--out", g_out, "output directory");
  gen->add_option("--nodes", g_nodes, "node count override (square for grids)");
  gen->add_option("--catalog", g_catalog, "catalog size override");
  gen->add_option("--consumers", g_consumers, "consumer count override");
  gen->add_option("--requests", g_requests, "request draw count override");
  gen->add_option("--budget", g_budget, "global budget override");

  // solve
  std::string s_dir, s_method = "pipage", s_out;
  double s_alpha = 0.2, s_step = 0, s_tol = 1e-7;
  int s_iters = 2000;
  auto* solve = app.add_subcommand("solve", "centralized solves on an instance");
  solve->add_option("instance", s_dir, "instance directory")->required();
  solve->add_option("--method", s_method, "greedy|relax|pipage|equal-cap");
  solve->add_option("--alpha", s_alpha, "surrogate smoothing width");
  solve->add_option("--step", s_step, "ascent step (0 = curvature bound)");
  solve->add_option("--max-iters", s_iters, "ascent iteration limit");
  solve->add_option("--tol", s_tol, "ascent movement tolerance");
  solve->add_option("--out", s_out, "directory for solution files");

  // run
  std::string r_dir, r_config, r_out = "run_out";
  std::string r_grad, r_evict, r_gamma, r_scheme;
  double r_horizon = -1, r_period = -1, r_alpha = -1, r_mu0 = -1, r_eps = -1;
  double r_lambda = -1, r_drop = -1, r_fraction = -1, r_cert = -1;
  uint64_t r_seed = 0;
  bool r_no_upper = false;
  std::vector<std::string> r_events;
  auto* runc = app.add_subcommand("run", "simulate the adaptive algorithm");
  runc->add_option("instance", r_dir, "instance directory")->required();
  runc->add_option("--config", r_config, "key=value config file");
  runc->add_option("--out", r_out, "output directory");
  auto* seed_opt = runc->add_option("--seed", r_seed, "rng seed");
  runc->add_option("--horizon", r_horizon, "simulated time");
  runc->add_option("--period", r_period, "measurement period length");
  runc->add_option("--grad", r_grad, "oracle|protocol");
  runc->add_option("--evict", r_evict, "hard|soft");
  runc->add_option("--gamma", r_gamma, "step size or 'auto'");
  runc->add_option("--alpha", r_alpha, "surrogate smoothing width");
  runc->add_option("--mu0", r_mu0, "penalty scale");
  runc->add_option("--epsilon", r_eps, "budget slack");
  runc->add_option("--lambda-bar", r_lambda, "rate upper bound");
  runc->add_option("--drop-prob", r_drop, "control-message loss probability");
  runc->add_option("--probe-fraction", r_fraction, "share of arrivals probed");
  runc->add_option("--consensus-scheme", r_scheme, "local-degree|constant-edge");
  runc->add_option("--cert-alpha", r_cert, "upper-bound solve smoothing width");
  runc->add_flag("--no-upper", r_no_upper, "skip upper-bound solves");
  runc->add_option("--event", r_events, "'<time> <kind> [a [b]]', repeatable");

  // compare
  std::string c_topologies = "all", c_config, c_out;
  int c_seeds = 10, c_window = 1000, c_jobs = 0;
  uint64_t c_seed0 = 1;
  double c_horizon = 10000;
  auto* cmp = app.add_subcommand("compare",
                                 "benchmark suite against the equal-split bound");
  cmp->add_option("--topologies", c_topologies, "comma list or 'all'");
  cmp->add_option("--seeds", c_seeds, "seeds per topology");
  cmp->add_option("--seed0", c_seed0, "first seed");
  cmp->add_option("--horizon", c_horizon, "simulated time per run");
  cmp->add_option("--window", c_window, "trailing rows averaged");
  cmp->add_option("--config", c_config, "base key=value config file");
  cmp->add_option("--jobs", c_jobs, "worker threads (0 = hardware)");
  cmp->add_option("--out", c_out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (gen->parsed())
      return cmd_generate(g_topology, g_seed, g_out, g_nodes, g_catalog,
                          g_consumers, g_requests, g_budget);
    if (solve->parsed())
      return cmd_solve(s_dir, s_method, s_alpha, s_step, s_iters, s_tol, s_out);
    if (runc->parsed()) {
      KVConfig kv;
      if (!r_config.empty()) kv = KVConfig::parse_file(r_config);
      char buf[40];
      auto put = [&](const char* k, double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        kv.set(k, buf);
      };
      if (seed_opt->count()) kv.set("seed", std::to_string(r_seed));
      if (r_horizon >= 0) put("horizon", r_horizon);
      if (r_period > 0) put("period", r_period);
      if (!r_grad.empty()) kv.set("grad", r_grad);
      if (!r_evict.empty()) kv.set("evict", r_evict);
      if (!r_gamma.empty()) kv.set("gamma", r_gamma);
      if (r_alpha > 0) put("alpha", r_alpha);
      if (r_mu0 > 0) put("mu0", r_mu0);
      if (r_eps > 0) put("epsilon", r_eps);
      if (r_lambda > 0) put("lambda_bar", r_lambda);
      if (r_drop >= 0) put("drop_prob", r_drop);
      if (r_fraction > 0) put("probe_fraction", r_fraction);
      if (!r_scheme.empty()) kv.set("consensus_scheme", r_scheme);
      if (r_cert > 0) put("cert_alpha", r_cert);
      if (r_no_upper) kv.set("compute_upper", "0");
      for (const auto& ev : r_events) kv.add("event", ev);
      return cmd_run(r_dir, kv, r_out);
    }
    if (cmp->parsed()) {
      CompareOptions opt;
      if (c_topologies != "all") {
        std::string cur;
        for (char ch : c_topologies + ",") {
          if (ch == ',') {
            if (!cur.empty()) opt.topologies.push_back(parse_topology(cur));
            cur.clear();
          } else {
            cur += ch;
          }
        }
      }
      opt.seeds = c_seeds;
      opt.seed0 = c_seed0;
      opt.horizon = c_horizon;
      opt.window = c_window;
      opt.jobs = c_jobs;
      opt.out_dir = c_out;
      if (!c_config.empty())
        opt.sim = parse_sim_config(KVConfig::parse_file(c_config));
      return cmd_compare(opt);
    }
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::runtime_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return std::string(e.what()).rfind("invariant breach", 0) == 0
               ? kExitInvariant
               : kExitConfig;
  }
  return 0;
}
