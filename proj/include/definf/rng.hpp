#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace definf::rng {

// std::uniform_*_distribution is implementation-defined, so every draw in
// this project goes through these helpers to keep outputs byte-identical
// across standard libraries.

inline double uniform01(std::mt19937_64& g) {
  return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

inline double uniform(std::mt19937_64& g, double lo, double hi) {
  return lo + (hi - lo) * uniform01(g);
}

inline bool bernoulli(std::mt19937_64& g, double p) { return uniform01(g) < p; }

// Unbiased integer in [0, n) by rejection.
inline std::uint64_t below(std::mt19937_64& g, std::uint64_t n) {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x;
  do {
    x = g();
  } while (x >= limit);
  return x % n;
}

template <class T>
void shuffle(std::vector<T>& v, std::mt19937_64& g) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[below(g, i)]);
  }
}

}  // namespace definf::rng
