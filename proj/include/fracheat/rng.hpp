#pragma once

#include <cmath>
#include <cstdint>

namespace fracheat {

/// Counter-based Gaussian generator: every variate is a pure function of
/// (seed, counter triple), so parallel workers need no shared state and any
/// cell can be regenerated independent of iteration order.
namespace rng {

inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t mix(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                         std::uint64_t c, std::uint64_t lane) {
  std::uint64_t h = splitmix64(seed ^ 0x6a09e667f3bcc909ULL);
  h = splitmix64(h ^ a);
  h = splitmix64(h ^ b);
  h = splitmix64(h ^ c);
  return splitmix64(h ^ lane);
}

inline double to_unit(std::uint64_t u) {
  // (0, 1]; never 0 so log() below is safe
  return (static_cast<double>(u >> 11) + 1.0) * 0x1p-53;
}

/// Standard normal variate addressed by (seed, i, j, k) via Box-Muller.
inline double normal(std::uint64_t seed, std::uint64_t i, std::uint64_t j,
                     std::uint64_t k) {
  double u1 = to_unit(mix(seed, i, j, k, 0));
  double u2 = to_unit(mix(seed, i, j, k, 1));
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * 3.14159265358979323846 * u2);
}

}  // namespace rng
}  // namespace fracheat
