#pragma once

#include <cstdint>
#include <random>

namespace tlnet {

using Rng = std::mt19937_64;

// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Derives an independent child seed for `stream` from `base`. Children of the
/// same base never depend on how many other streams exist.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  return mix64(mix64(base) ^ mix64(stream + 0x632be59bd9b4e019ULL));
}

/// Named sub-streams used by the trial pipeline.
enum class Stream : std::uint64_t {
  latents = 1,
  source_adjacency = 2,
  split = 3,
  target_adjacency = 4,
  clustering = 5,
  oracle = 6,
};

constexpr std::uint64_t derive_seed(std::uint64_t base, Stream s) {
  return derive_seed(base, static_cast<std::uint64_t>(s));
}

inline double uniform01(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

}  // namespace tlnet
