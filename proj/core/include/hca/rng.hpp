#pragma once

#include <cstdint>
#include <random>

namespace hca {

using Engine = std::mt19937_64;

/// SplitMix64 finalizer. Used to derive independent seeds from a master seed.
std::uint64_t splitmix64(std::uint64_t x);

/// Seed of the i-th independent run spawned from a master seed.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

/// The two random streams owned by one run. Environment draws (transitions,
/// rewards) never consume policy draws and vice versa, so changing reward
/// noise leaves the action sequence untouched.
struct RunStreams {
  explicit RunStreams(std::uint64_t seed);

  std::uint64_t seed;
  Engine env;
  Engine policy;
};

/// Uniform draw in [0, 1).
double uniform01(Engine& engine);

}  // namespace hca
