#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

const char* kCli = CACHEGAIN_CLI_PATH;

fs::path workspace() {
  static fs::path root = [] {
    fs::path p = fs::temp_directory_path() / "cachegain_cli_tests";
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
  }();
  return root;
}

struct CliResult {
  int code = -1;
  std::string out;
  std::string err;
};

CliResult run_cli(const std::string& args) {
  static int serial = 0;
  fs::path out = workspace() / ("stdout_" + std::to_string(serial) + ".txt");
  fs::path err = workspace() / ("stderr_" + std::to_string(serial) + ".txt");
  ++serial;
  std::string cmd = std::string(kCli) + " " + args + " > " + out.string() +
                    " 2> " + err.string();
  int status = std::system(cmd.c_str());
  CliResult r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

std::string slurp_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// value of "key=..." on its own stdout line
std::string field(const std::string& text, const std::string& key) {
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line))
    if (line.rfind(key + "=", 0) == 0) return line.substr(key.size() + 1);
  return "";
}

int count_data_rows(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  int rows = -1;  // skip the header
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] == '#') break;
    ++rows;
  }
  return rows;
}

fs::path shared_instance() {
  static fs::path dir = [] {
    fs::path d = workspace() / "abilene7";
    auto r = run_cli("generate abilene --seed 7 --out " + d.string());
    REQUIRE(r.code == 0);
    return d;
  }();
  return dir;
}

}  // namespace

TEST_SUITE_BEGIN("cli");

TEST_CASE("generate writes a reloadable instance deterministically") {
  auto r = run_cli("generate abilene --seed 7 --out " +
                   (workspace() / "gen_a").string());
  CHECK(r.code == 0);
  CHECK(r.out.find("nodes=9") != std::string::npos);
  CHECK(r.out.find("edges=13") != std::string::npos);
  CHECK(r.out.find("catalog=10") != std::string::npos);
  CHECK(r.out.find("budget=28") != std::string::npos);
  for (const char* name : {"graph.txt", "servers.txt", "demand.txt", "manifest.txt"})
    CHECK(fs::exists(workspace() / "gen_a" / name));
  std::string manifest = slurp_file(workspace() / "gen_a" / "manifest.txt");
  CHECK(manifest.find("topology=abilene") != std::string::npos);
  CHECK(manifest.find("budget=28") != std::string::npos);

  auto r2 = run_cli("generate abilene --seed 7 --out " +
                    (workspace() / "gen_b").string());
  CHECK(r2.code == 0);
  for (const char* name : {"graph.txt", "servers.txt", "demand.txt"})
    CHECK(slurp_file(workspace() / "gen_a" / name) ==
          slurp_file(workspace() / "gen_b" / name));

  auto r3 = run_cli("generate abilene --seed 8 --out " +
                    (workspace() / "gen_c").string());
  CHECK(r3.code == 0);
  CHECK(slurp_file(workspace() / "gen_a" / "demand.txt") !=
        slurp_file(workspace() / "gen_c" / "demand.txt"));
}

TEST_CASE("generate rejects impossible parameters") {
  CHECK(run_cli("generate abilene --budget 5 --out " +
                (workspace() / "gen_bad").string())
            .code == 2);
  CHECK(run_cli("generate ring --out " + (workspace() / "gen_ring").string())
            .code == 2);
  CHECK(run_cli("generate grid_2d --nodes 12 --out " +
                (workspace() / "gen_grid").string())
            .code == 2);
  CHECK(run_cli("generate").code == 2);  // missing positional
}

TEST_CASE("solve reports each method and honors the rounding guarantee") {
  fs::path inst = shared_instance();
  for (const char* method : {"greedy", "relax", "pipage", "equal-cap"}) {
    auto r = run_cli("solve " + inst.string() + " --method " + method);
    CHECK(r.code == 0);
    CHECK(field(r.out, "method") == method);
    CHECK(std::stod(field(r.out, "F")) >= 0.0);
    CHECK(std::stod(field(r.out, "L_upper")) >=
          std::stod(field(r.out, "L_tilde_star")) - 1e-9);
  }
  auto p = run_cli("solve " + inst.string() + " --method pipage");
  CHECK(std::stod(field(p.out, "ratio")) >= 1.0 - 1.0 / 2.718281828 - 1e-9);
  CHECK(field(p.out, "converged") == "1");

  fs::path sol = workspace() / "sol";
  auto w = run_cli("solve " + inst.string() + " --method pipage --out " +
                   sol.string());
  CHECK(w.code == 0);
  CHECK(fs::exists(sol / "allocation.txt"));
  CHECK(fs::exists(sol / "placement.txt"));
  std::string report = slurp_file(sol / "report.txt");
  CHECK(report.find("method=pipage") != std::string::npos);

  CHECK(run_cli("solve " + inst.string() + " --method magic").code == 2);
  CHECK(run_cli("solve " + (workspace() / "nowhere").string()).code == 2);
}

TEST_CASE("run emits the metrics file and reruns bit for bit") {
  fs::path inst = shared_instance();
  fs::path out_a = workspace() / "run_a";
  auto r = run_cli("run " + inst.string() +
                   " --horizon 50 --seed 3 --grad protocol --out " +
                   out_a.string());
  CHECK(r.code == 0);
  CHECK(field(r.out, "periods") == "50");
  std::string csv = slurp_file(out_a / "metrics.csv");
  CHECK(csv.rfind("t,F_heu,L_tilde,L_upper,frac_cache_total,int_cache_total,"
                  "violation,measured_gain,msg_ms,msg_mr,msg_e,msg_consensus\n",
                  0) == 0);
  CHECK(count_data_rows(csv) == 50);
  CHECK(csv.find("# totals_bytes ms=") != std::string::npos);
  std::string manifest = slurp_file(out_a / "manifest.txt");
  CHECK(manifest.find("seed=3") != std::string::npos);
  CHECK(manifest.find("grad=protocol") != std::string::npos);

  fs::path out_b = workspace() / "run_b";
  auto r2 = run_cli("run " + inst.string() +
                    " --horizon 50 --seed 3 --grad protocol --out " +
                    out_b.string());
  CHECK(r2.code == 0);
  CHECK(csv == slurp_file(out_b / "metrics.csv"));

  fs::path out_c = workspace() / "run_c";
  auto r3 = run_cli("run " + inst.string() + " --horizon 0 --out " +
                    out_c.string());
  CHECK(r3.code == 0);
  CHECK(field(r3.out, "periods") == "0");
  CHECK(count_data_rows(slurp_file(out_c / "metrics.csv")) == 0);
}

TEST_CASE("run takes a config file with flag overrides") {
  fs::path inst = shared_instance();
  fs::path cfg = workspace() / "sim.cfg";
  {
    std::ofstream out(cfg);
    out << "horizon=20\nseed=5\ngrad=oracle\ngamma=auto\nevict=hard\n";
  }
  fs::path out_a = workspace() / "cfg_a";
  auto r = run_cli("run " + inst.string() + " --config " + cfg.string() +
                   " --out " + out_a.string());
  CHECK(r.code == 0);
  CHECK(field(r.out, "periods") == "20");
  std::string manifest = slurp_file(out_a / "manifest.txt");
  CHECK(manifest.find("evict=hard") != std::string::npos);

  fs::path out_b = workspace() / "cfg_b";
  auto r2 = run_cli("run " + inst.string() + " --config " + cfg.string() +
                    " --horizon 30 --out " + out_b.string());
  CHECK(r2.code == 0);
  CHECK(field(r2.out, "periods") == "30");
}

TEST_CASE("run rejects bad configuration with exit code 2") {
  fs::path inst = shared_instance();
  fs::path bad = workspace() / "bad.cfg";
  {
    std::ofstream out(bad);
    out << "horizon=10\nwarp_speed=9\n";
  }
  CHECK(run_cli("run " + inst.string() + " --config " + bad.string() +
                " --out " + (workspace() / "bad_a").string())
            .code == 2);
  {
    std::ofstream out(bad);
    out << "horizon=10\ngamma=-0.5\n";
  }
  CHECK(run_cli("run " + inst.string() + " --config " + bad.string() +
                " --out " + (workspace() / "bad_b").string())
            .code == 2);
  CHECK(run_cli("run " + inst.string() + " --horizon 10 --event \"5 warp 1\"" +
                " --out " + (workspace() / "bad_c").string())
            .code == 2);
  CHECK(run_cli("run " + inst.string() + " --horizon 10" +
                " --event \"5 rates_scale 0.5\" --out " +
                (workspace() / "ok_ev").string())
            .code == 0);
}

TEST_CASE("empty demand runs and solves to zero gain") {
  fs::path d = workspace() / "empty_inst";
  fs::create_directories(d);
  std::ofstream(d / "graph.txt") << "0 1 1.0\n";
  std::ofstream(d / "servers.txt") << "0 1\n";
  std::ofstream(d / "demand.txt") << "# empty\n";
  std::ofstream(d / "manifest.txt")
      << "nodes=2\ncatalog=1\nbudget=1.5\ncaps=1\nlambda_bar=1\n";

  auto s = run_cli("solve " + d.string() + " --method relax");
  CHECK(s.code == 0);
  CHECK(std::stod(field(s.out, "F")) == 0.0);
  CHECK(std::stod(field(s.out, "L_upper")) == 0.0);

  auto r = run_cli("run " + d.string() + " --horizon 5 --out " +
                   (workspace() / "empty_run").string());
  CHECK(r.code == 0);
  CHECK(field(r.out, "periods") == "5");
  CHECK(std::stod(field(r.out, "F_heu")) == 0.0);
}

TEST_CASE("compare produces the summary table and per-run files") {
  fs::path out = workspace() / "cmp";
  auto r = run_cli(
      "compare --topologies abilene --seeds 2 --horizon 120 --window 50 "
      "--jobs 2 --out " +
      out.string());
  CHECK(r.code == 0);
  std::istringstream in(r.out);
  std::string header, row;
  REQUIRE(std::getline(in, header));
  CHECK(header == "topology,mean_ratio,std_ratio,ec_ratio,n_seeds");
  REQUIRE(std::getline(in, row));
  CHECK(row.rfind("abilene,", 0) == 0);
  {
    std::istringstream rs(row);
    std::string topo, mean, stdev, ec, n;
    std::getline(rs, topo, ',');
    std::getline(rs, mean, ',');
    std::getline(rs, stdev, ',');
    std::getline(rs, ec, ',');
    std::getline(rs, n, ',');
    CHECK(std::stod(mean) > 0.2);
    CHECK(std::stod(mean) < 1.5);
    CHECK(std::stod(ec) > 0.0);
    CHECK(n == "2");
  }
  CHECK(slurp_file(out / "summary.csv") == r.out);
  CHECK(fs::exists(out / "abilene_1.csv"));
  CHECK(fs::exists(out / "abilene_2.csv"));
  CHECK(fs::exists(out / "manifest.txt"));
  std::string run_csv = slurp_file(out / "abilene_1.csv");
  CHECK(run_csv.rfind("t,F_heu", 0) == 0);
  CHECK(count_data_rows(run_csv) == 120);

  CHECK(run_cli("compare --topologies saturn").code == 2);
}

TEST_CASE("usage errors exit with the configuration code") {
  CHECK(run_cli("").code == 2);            // subcommand required
  CHECK(run_cli("conquer").code == 2);     // unknown subcommand
  CHECK(run_cli("run").code == 2);         // missing instance argument
  CHECK(run_cli("--help").code == 0);
}

TEST_SUITE_END();
