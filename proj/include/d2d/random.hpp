#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace d2d {

/// Every stochastic component draws from its own stream of this engine.
using Rng = std::mt19937_64;

/// splitmix64 finalizer; used only to derive independent stream seeds.
inline constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed for a child stream identified by a path of tags under `master`.
inline std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> tags) {
  std::uint64_t h = mix64(master);
  for (const auto tag : tags) h = mix64(h ^ mix64(tag + 0x632be59bd9b4e019ULL));
  return h;
}

// Tags naming the independent streams of one run.
inline constexpr std::uint64_t kMapStream = 0x6d6170;      // "map"
inline constexpr std::uint64_t kDeviceStream = 0x646576;   // "dev"
inline constexpr std::uint64_t kMobilityStream = 0x6d6f62; // "mob"

}  // namespace d2d
