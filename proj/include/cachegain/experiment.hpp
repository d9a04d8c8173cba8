#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cachegain/cachesim.hpp"
#include "cachegain/topo.hpp"

namespace cachegain {

struct CompareOptions {
  std::vector<TopologyKind> topologies;  // empty = all
  int seeds = 10;
  uint64_t seed0 = 1;
  double horizon = 10000;
  int window = 1000;  // trailing rows averaged into the steady-state gain
  SimConfig sim;      // base settings; seed/horizon are overridden per run
  int jobs = 0;       // worker threads, 0 = hardware concurrency
  std::string out_dir;  // empty = in-memory only
};

struct CompareCell {
  TopologyKind kind = TopologyKind::grid_2d;
  uint64_t seed = 0;
  bool ok = false;
  std::string error;
  double mean_gain = 0.0;  // trailing-window mean of the integer-contents gain
  double upper = 0.0;      // certified bound for this instance
  double ec_upper = 0.0;   // certified bound for the equal-split baseline
};

struct CompareSummaryRow {
  std::string topology;
  double mean_ratio = 0.0;  // mean over seeds of mean_gain / upper
  double std_ratio = 0.0;
  double ec_ratio = 0.0;    // mean over seeds of ec_upper / upper
  int n_seeds = 0;          // completed runs
};

struct CompareResult {
  std::vector<CompareCell> cells;
  std::vector<CompareSummaryRow> summary;
};

// Synthesizes one instance per (topology, seed0 + s) pair and simulates it,
// spreading runs over a worker pool. Every run pins all request rates to 1 at
// t=0, matching the rate bound the automatic step size assumes. With out_dir
// set, writes <topology>_<seed>.csv per run plus summary.csv and
// manifest.txt. Per-run failures are recorded in the cell, not rethrown.
CompareResult run_comparison(const CompareOptions& opt);

// "topology,mean_ratio,std_ratio,ec_ratio,n_seeds" rows.
std::string summary_csv(const CompareResult& res);

// requested if positive, else hardware concurrency; the CACHEGAIN_THREADS
// environment variable caps the result. Always at least 1.
int worker_count(int requested);

}  // namespace cachegain
