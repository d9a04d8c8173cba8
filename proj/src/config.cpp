#include "cachegain/config.hpp"

#include <cctype>
#include <climits>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace cachegain {

namespace {

std::string trim(const std::string& s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

double to_double(const std::string& key, const std::string& v) {
  size_t pos = 0;
  double x = 0;
  try {
    x = std::stod(v, &pos);
  } catch (const std::exception&) {
    throw std::invalid_argument("config key '" + key + "': not a number: " + v);
  }
  if (pos != v.size())
    throw std::invalid_argument("config key '" + key + "': trailing characters: " + v);
  return x;
}

long long to_ll(const std::string& key, const std::string& v) {
  size_t pos = 0;
  long long x = 0;
  try {
    x = std::stoll(v, &pos);
  } catch (const std::exception&) {
    throw std::invalid_argument("config key '" + key + "': not an integer: " + v);
  }
  if (pos != v.size())
    throw std::invalid_argument("config key '" + key + "': trailing characters: " + v);
  return x;
}

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

KVConfig KVConfig::parse_string(const std::string& text) {
  KVConfig out;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": expected key=value, got: " + line);
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": empty key");
    out.items.emplace_back(std::move(key), std::move(value));
  }
  return out;
}

KVConfig KVConfig::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_string(buf.str());
}

std::optional<std::string> KVConfig::get(const std::string& key) const {
  std::optional<std::string> out;
  for (const auto& [k, v] : items)
    if (k == key) out = v;
  return out;
}

std::vector<std::string> KVConfig::get_all(const std::string& key) const {
  std::vector<std::string> out;
  for (const auto& [k, v] : items)
    if (k == key) out.push_back(v);
  return out;
}

void KVConfig::set(const std::string& key, const std::string& value) {
  for (auto it = items.rbegin(); it != items.rend(); ++it) {
    if (it->first == key) {
      it->second = value;
      return;
    }
  }
  items.emplace_back(key, value);
}

void KVConfig::add(const std::string& key, const std::string& value) {
  items.emplace_back(key, value);
}

std::string KVConfig::serialize() const {
  std::string out;
  for (const auto& [k, v] : items) {
    out += k;
    out += '=';
    out += v;
    out += '\n';
  }
  return out;
}

void atomic_write_text(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write file: " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  fs::rename(tmp, target);
}

void KVConfig::save(const std::string& path) const {
  atomic_write_text(path, serialize());
}

double get_double(const KVConfig& cfg, const std::string& key, double fallback) {
  auto v = cfg.get(key);
  return v ? to_double(key, *v) : fallback;
}

int get_int(const KVConfig& cfg, const std::string& key, int fallback) {
  auto v = cfg.get(key);
  if (!v) return fallback;
  long long x = to_ll(key, *v);
  if (x < INT_MIN || x > INT_MAX)
    throw std::invalid_argument("config key '" + key + "': out of range");
  return static_cast<int>(x);
}

uint64_t get_u64(const KVConfig& cfg, const std::string& key, uint64_t fallback) {
  auto v = cfg.get(key);
  if (!v) return fallback;
  size_t pos = 0;
  unsigned long long x = 0;
  try {
    x = std::stoull(*v, &pos);
  } catch (const std::exception&) {
    throw std::invalid_argument("config key '" + key + "': not an integer: " + *v);
  }
  if (pos != v->size())
    throw std::invalid_argument("config key '" + key + "': trailing characters: " + *v);
  return x;
}

bool get_bool(const KVConfig& cfg, const std::string& key, bool fallback) {
  auto v = cfg.get(key);
  if (!v) return fallback;
  if (*v == "1" || *v == "true" || *v == "yes") return true;
  if (*v == "0" || *v == "false" || *v == "no") return false;
  throw std::invalid_argument("config key '" + key + "': expected boolean, got: " + *v);
}

SimEvent parse_event(const std::string& text) {
  std::istringstream in(text);
  SimEvent ev;
  std::string kind;
  if (!(in >> ev.time >> kind))
    throw std::invalid_argument("event: expected '<time> <kind> [a [b]]', got: " + text);
  int need = 0;
  if (kind == "rates_uniform") {
    ev.kind = SimEvent::Kind::rates_uniform;
    need = 2;
  } else if (kind == "rates_set") {
    ev.kind = SimEvent::Kind::rates_set;
    need = 1;
  } else if (kind == "rates_scale") {
    ev.kind = SimEvent::Kind::rates_scale;
    need = 1;
  } else if (kind == "budget_set") {
    ev.kind = SimEvent::Kind::budget_set;
    need = 1;
  } else if (kind == "budget_delta") {
    ev.kind = SimEvent::Kind::budget_delta;
    need = 1;
  } else {
    throw std::invalid_argument("event: unknown kind: " + kind);
  }
  if (need >= 1 && !(in >> ev.a))
    throw std::invalid_argument("event '" + kind + "': missing argument");
  if (need >= 2 && !(in >> ev.b))
    throw std::invalid_argument("event '" + kind + "': missing second argument");
  std::string rest;
  if (in >> rest)
    throw std::invalid_argument("event: trailing characters: " + rest);
  return ev;
}

std::string format_event(const SimEvent& ev) {
  std::string out = fmt(ev.time);
  switch (ev.kind) {
    case SimEvent::Kind::rates_uniform:
      out += " rates_uniform " + fmt(ev.a) + " " + fmt(ev.b);
      break;
    case SimEvent::Kind::rates_set:
      out += " rates_set " + fmt(ev.a);
      break;
    case SimEvent::Kind::rates_scale:
      out += " rates_scale " + fmt(ev.a);
      break;
    case SimEvent::Kind::budget_set:
      out += " budget_set " + fmt(ev.a);
      break;
    case SimEvent::Kind::budget_delta:
      out += " budget_delta " + fmt(ev.a);
      break;
  }
  return out;
}

SimConfig parse_sim_config(const KVConfig& cfg) {
  static const char* known[] = {
      "period",         "horizon",        "seed",
      "grad",           "evict",          "alpha",
      "mu0",            "epsilon",        "gamma",
      "lambda_bar",     "drop_prob",      "probe_fraction",
      "consensus_iters", "consensus_scheme", "consensus_edge_weight",
      "node_count_bound", "compute_upper", "cert_alpha",
      "event",
  };
  for (const auto& [k, v] : cfg.items) {
    bool ok = false;
    for (const char* name : known)
      if (k == name) {
        ok = true;
        break;
      }
    if (!ok) throw std::invalid_argument("unknown config key: " + k);
  }

  SimConfig out;
  out.period = get_double(cfg, "period", out.period);
  out.horizon = get_double(cfg, "horizon", out.horizon);
  out.seed = get_u64(cfg, "seed", out.seed);
  if (auto g = cfg.get("grad")) {
    if (*g == "oracle")
      out.grad = GradientMode::oracle;
    else if (*g == "protocol")
      out.grad = GradientMode::protocol;
    else
      throw std::invalid_argument("config key 'grad': expected oracle|protocol, got: " + *g);
  }
  if (auto e = cfg.get("evict")) {
    if (*e == "hard")
      out.evict = EvictionMode::hard;
    else if (*e == "soft")
      out.evict = EvictionMode::soft;
    else
      throw std::invalid_argument("config key 'evict': expected hard|soft, got: " + *e);
  }
  out.alpha = get_double(cfg, "alpha", out.alpha);
  out.mu0 = get_double(cfg, "mu0", out.mu0);
  out.epsilon = get_double(cfg, "epsilon", out.epsilon);
  if (auto g = cfg.get("gamma")) {
    out.gamma = (*g == "auto") ? 0.0 : to_double("gamma", *g);
    if (*g != "auto" && !(out.gamma > 0.0))
      throw std::invalid_argument("config key 'gamma': must be positive or 'auto'");
  }
  out.lambda_bar = get_double(cfg, "lambda_bar", out.lambda_bar);
  out.drop_prob = get_double(cfg, "drop_prob", out.drop_prob);
  out.probe_fraction = get_double(cfg, "probe_fraction", out.probe_fraction);
  out.consensus_iters = get_int(cfg, "consensus_iters", out.consensus_iters);
  if (auto s = cfg.get("consensus_scheme")) {
    if (*s == "local-degree")
      out.consensus_scheme = ConsensusScheme::local_degree;
    else if (*s == "constant-edge")
      out.consensus_scheme = ConsensusScheme::constant_edge;
    else
      throw std::invalid_argument(
          "config key 'consensus_scheme': expected local-degree|constant-edge, got: " + *s);
  }
  if (auto w = cfg.get("consensus_edge_weight"))
    out.consensus_edge_weight = (*w == "auto") ? 0.0 : to_double("consensus_edge_weight", *w);
  if (auto n = cfg.get("node_count_bound"))
    out.node_count_bound = (*n == "auto") ? 0.0 : to_double("node_count_bound", *n);
  out.compute_upper = get_bool(cfg, "compute_upper", out.compute_upper);
  out.cert_alpha = get_double(cfg, "cert_alpha", out.cert_alpha);
  for (const auto& spec : cfg.get_all("event")) out.events.push_back(parse_event(spec));

  if (out.period <= 0) throw std::invalid_argument("period must be positive");
  if (out.horizon < 0) throw std::invalid_argument("horizon must be nonnegative");
  if (out.alpha <= 0 || out.alpha > 1)
    throw std::invalid_argument("alpha must be in (0, 1]");
  if (out.mu0 <= 0) throw std::invalid_argument("mu0 must be positive");
  if (out.epsilon <= 0) throw std::invalid_argument("epsilon must be positive");
  if (out.lambda_bar <= 0) throw std::invalid_argument("lambda_bar must be positive");
  if (out.drop_prob < 0 || out.drop_prob >= 1)
    throw std::invalid_argument("drop_prob must be in [0, 1)");
  if (out.probe_fraction <= 0 || out.probe_fraction > 1)
    throw std::invalid_argument("probe_fraction must be in (0, 1]");
  if (out.consensus_iters < 1)
    throw std::invalid_argument("consensus_iters must be at least 1");
  if (out.cert_alpha <= 0 || out.cert_alpha > 1)
    throw std::invalid_argument("cert_alpha must be in (0, 1]");
  return out;
}

KVConfig serialize_sim_config(const SimConfig& cfg) {
  KVConfig out;
  out.add("period", fmt(cfg.period));
  out.add("horizon", fmt(cfg.horizon));
  out.add("seed", std::to_string(cfg.seed));
  out.add("grad", cfg.grad == GradientMode::oracle ? "oracle" : "protocol");
  out.add("evict", cfg.evict == EvictionMode::hard ? "hard" : "soft");
  out.add("alpha", fmt(cfg.alpha));
  out.add("mu0", fmt(cfg.mu0));
  out.add("epsilon", fmt(cfg.epsilon));
  out.add("gamma", cfg.gamma > 0 ? fmt(cfg.gamma) : "auto");
  out.add("lambda_bar", fmt(cfg.lambda_bar));
  out.add("drop_prob", fmt(cfg.drop_prob));
  out.add("probe_fraction", fmt(cfg.probe_fraction));
  out.add("consensus_iters", std::to_string(cfg.consensus_iters));
  out.add("consensus_scheme", cfg.consensus_scheme == ConsensusScheme::local_degree
                                  ? "local-degree"
                                  : "constant-edge");
  out.add("consensus_edge_weight",
          cfg.consensus_edge_weight > 0 ? fmt(cfg.consensus_edge_weight) : "auto");
  out.add("node_count_bound",
          cfg.node_count_bound > 0 ? fmt(cfg.node_count_bound) : "auto");
  out.add("compute_upper", cfg.compute_upper ? "1" : "0");
  out.add("cert_alpha", fmt(cfg.cert_alpha));
  for (const auto& ev : cfg.events) out.add("event", format_event(ev));
  return out;
}

}  // namespace cachegain
