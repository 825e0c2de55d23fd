#include "hca/rng.hpp"

namespace hca {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return splitmix64(splitmix64(master) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

RunStreams::RunStreams(std::uint64_t s)
    : seed(s), env(splitmix64(s ^ 0x1ULL)), policy(splitmix64(s ^ 0x2ULL)) {}

double uniform01(Engine& engine) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(engine);
}

}  // namespace hca
