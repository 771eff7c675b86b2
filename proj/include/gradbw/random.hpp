#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace gradbw {

inline std::uint64_t splitmix64(std::uint64_t x)
{
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Independent stream seed from a tuple of identifiers.
inline std::uint64_t derive_seed(std::initializer_list<std::uint64_t> parts)
{
  std::uint64_t s = 0x6a09e667f3bcc909ULL;
  for (std::uint64_t p : parts) {
    s = splitmix64(s ^ splitmix64(p));
  }
  return s;
}

/// Uniform double in [0, 1) from the top 53 bits.
inline double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

} // namespace gradbw
