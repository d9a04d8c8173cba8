#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace cachegain {

// splitmix64 finalizer; good avalanche, cheap.
inline uint64_t mix64(uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Derives an independent stream seed from a root seed and a stream name, so
// enabling one consumer (e.g. probe sampling) never perturbs another (e.g.
// arrivals).
inline uint64_t stream_seed(uint64_t root, std::string_view name) {
  uint64_t h = mix64(root ^ 0x5bf03635d1a21bb1ull);
  for (char c : name) h = mix64(h ^ static_cast<uint64_t>(static_cast<uint8_t>(c)));
  return h;
}

inline std::mt19937_64 make_rng(uint64_t root, std::string_view name) {
  return std::mt19937_64(stream_seed(root, name));
}

}  // namespace cachegain
