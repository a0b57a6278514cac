#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace ssdeconv {

using Engine = std::mt19937_64;
using Seed = std::uint64_t;

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Independent child stream `stream` of `master`. Replicate r of an experiment
/// runs on derive_seed(master, r).
constexpr Seed derive_seed(Seed master, std::uint64_t stream) noexcept {
  return mix64(mix64(master) ^ mix64(stream + 0x632be59bd9b4e019ULL));
}

/// FNV-1a, for naming sub-streams by string ("nodes", "series", ...).
constexpr std::uint64_t stream_tag(std::string_view name) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : name) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

constexpr Seed derive_seed(Seed master, std::string_view name) noexcept {
  return derive_seed(master, stream_tag(name));
}

Engine make_engine(Seed seed);

}  // namespace ssdeconv
