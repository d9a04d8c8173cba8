#include "cachegain/experiment.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <stdexcept>
#include <thread>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "cachegain/central.hpp"
#include "cachegain/config.hpp"

namespace cachegain {

int worker_count(int requested) {
  int n = requested > 0 ? requested
                        : static_cast<int>(std::thread::hardware_concurrency());
  if (n < 1) n = 1;
  if (const char* cap = std::getenv("CACHEGAIN_THREADS")) {
    int c = std::atoi(cap);
    if (c > 0 && c < n) n = c;
  }
  return n;
}

namespace {

void run_cell(const CompareOptions& opt, CompareCell& cell) {
  TopologySpec spec;
  spec.kind = cell.kind;
  spec.seed = cell.seed;
  Instance inst = synthesize_instance(generate(spec), default_params(cell.kind),
                                      cell.seed);

  SimConfig cfg = opt.sim;
  cfg.seed = cell.seed;
  cfg.horizon = opt.horizon;
  cfg.compute_upper = true;
  // Rates pinned to the bound the automatic step size is derived from.
  SimEvent pin;
  pin.time = 0.0;
  pin.kind = SimEvent::Kind::rates_set;
  pin.a = 1.0;
  cfg.events.insert(cfg.events.begin(), pin);

  SimResult res = run(inst.net, inst.demand, cfg);
  if (res.rows.empty()) throw std::runtime_error("no metrics rows produced");

  size_t w = std::min<size_t>(opt.window > 0 ? opt.window : 1, res.rows.size());
  double sum = 0.0;
  for (size_t k = res.rows.size() - w; k < res.rows.size(); ++k)
    sum += res.rows[k].f_heu;
  cell.mean_gain = sum / static_cast<double>(w);
  cell.upper = res.rows.back().l_upper;

  Demand pinned = res.demand;  // rates already forced to 1 by the event
  cell.ec_upper =
      equal_capacity_bound(inst.net, pinned, SurrogateParams{cfg.cert_alpha})
          .l_upper;

  if (!opt.out_dir.empty()) {
    std::filesystem::path p =
        std::filesystem::path(opt.out_dir) /
        (topology_name(cell.kind) + "_" + std::to_string(cell.seed) + ".csv");
    write_metrics_csv(p.string(), res.rows, res.totals);
  }
  cell.ok = true;
}

}  // namespace

CompareResult run_comparison(const CompareOptions& opt) {
  if (opt.seeds < 1) throw std::invalid_argument("seeds must be at least 1");
  std::vector<TopologyKind> kinds =
      opt.topologies.empty() ? all_topologies() : opt.topologies;

  if (!opt.out_dir.empty())
    std::filesystem::create_directories(opt.out_dir);

  CompareResult res;
  for (TopologyKind kind : kinds)
    for (int s = 0; s < opt.seeds; ++s) {
      CompareCell cell;
      cell.kind = kind;
      cell.seed = opt.seed0 + static_cast<uint64_t>(s);
      res.cells.push_back(cell);
    }

  std::atomic<size_t> next{0};
  const int jobs = worker_count(opt.jobs);
  auto work = [&]() {
#ifdef _OPENMP
    // one run per worker is the unit of parallelism here
    if (jobs > 1) omp_set_num_threads(1);
#endif
    for (;;) {
      size_t k = next.fetch_add(1);
      if (k >= res.cells.size()) return;
      CompareCell& cell = res.cells[k];
      try {
        run_cell(opt, cell);
      } catch (const std::exception& ex) {
        cell.ok = false;
        cell.error = ex.what();
      }
    }
  };
  if (jobs == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (int j = 0; j < jobs; ++j) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }

  size_t at = 0;
  for (TopologyKind kind : kinds) {
    CompareSummaryRow row;
    row.topology = topology_name(kind);
    std::vector<double> ratios, ec_ratios;
    for (int s = 0; s < opt.seeds; ++s, ++at) {
      const CompareCell& cell = res.cells[at];
      if (!cell.ok || !(cell.upper > 0)) continue;
      ratios.push_back(cell.mean_gain / cell.upper);
      ec_ratios.push_back(cell.ec_upper / cell.upper);
    }
    row.n_seeds = static_cast<int>(ratios.size());
    if (row.n_seeds > 0) {
      double m = 0.0, me = 0.0;
      for (double r : ratios) m += r;
      for (double r : ec_ratios) me += r;
      m /= row.n_seeds;
      me /= row.n_seeds;
      double var = 0.0;
      for (double r : ratios) var += (r - m) * (r - m);
      row.mean_ratio = m;
      row.ec_ratio = me;
      row.std_ratio = row.n_seeds > 1 ? std::sqrt(var / (row.n_seeds - 1)) : 0.0;
    }
    res.summary.push_back(row);
  }

  if (!opt.out_dir.empty()) {
    std::filesystem::path dir(opt.out_dir);
    atomic_write_text((dir / "summary.csv").string(), summary_csv(res));
    KVConfig manifest = serialize_sim_config(opt.sim);
    manifest.set("seed", "per-run");
    manifest.set("horizon", std::to_string(opt.horizon));
    {
      std::string names;
      for (TopologyKind kind : kinds) {
        if (!names.empty()) names += ',';
        names += topology_name(kind);
      }
      manifest.add("topologies", names);
    }
    manifest.add("seeds", std::to_string(opt.seeds));
    manifest.add("seed0", std::to_string(opt.seed0));
    manifest.add("window", std::to_string(opt.window));
    manifest.save((dir / "manifest.txt").string());
  }
  return res;
}

std::string summary_csv(const CompareResult& res) {
  std::string out = "topology,mean_ratio,std_ratio,ec_ratio,n_seeds\n";
  char buf[160];
  for (const auto& row : res.summary) {
    std::snprintf(buf, sizeof buf, "%s,%.10g,%.10g,%.10g,%d\n",
                  row.topology.c_str(), row.mean_ratio, row.std_ratio,
                  row.ec_ratio, row.n_seeds);
    out += buf;
  }
  return out;
}

}  // namespace cachegain
