#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cachegain/cachesim.hpp"

namespace cachegain {

// Flat key=value text format: one pair per line, '#' starts a comment,
// blank lines ignored, keys may repeat (get() returns the last value).
struct KVConfig {
  std::vector<std::pair<std::string, std::string>> items;

  static KVConfig parse_string(const std::string& text);
  static KVConfig parse_file(const std::string& path);

  std::optional<std::string> get(const std::string& key) const;
  std::vector<std::string> get_all(const std::string& key) const;
  void set(const std::string& key, const std::string& value);  // replace/append
  void add(const std::string& key, const std::string& value);  // always append

  std::string serialize() const;
  void save(const std::string& path) const;  // atomic (temp file + rename)
};

double get_double(const KVConfig& cfg, const std::string& key, double fallback);
int get_int(const KVConfig& cfg, const std::string& key, int fallback);
uint64_t get_u64(const KVConfig& cfg, const std::string& key, uint64_t fallback);
bool get_bool(const KVConfig& cfg, const std::string& key, bool fallback);

// Writes content to a temp file in the same directory, then renames over the
// target, so readers never observe a half-written file.
void atomic_write_text(const std::string& path, const std::string& content);

// Event line: "<time> <kind> [a [b]]", e.g. "8000 rates_set 1.0".
SimEvent parse_event(const std::string& text);
std::string format_event(const SimEvent& ev);

// Simulation keys; unknown keys throw std::invalid_argument so typos surface
// as config errors instead of silently running defaults.
SimConfig parse_sim_config(const KVConfig& cfg);
KVConfig serialize_sim_config(const SimConfig& cfg);

}  // namespace cachegain
