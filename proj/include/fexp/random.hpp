#pragma once

// Portable draws from mt19937_64, identical on every toolchain.

#include <cstdint>
#include <random>
#include <vector>

namespace fexp {

inline double uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline double uniform(std::mt19937_64& rng, double lo, double hi) { return lo + (hi - lo) * uniform(rng); }

/// Uniform index in [0, n). Modulo bias is negligible for the small n used here.
inline std::size_t random_index(std::mt19937_64& rng, std::size_t n) { return static_cast<std::size_t>(rng() % n); }

/// Independent stream for (seed, stream) without sequential coupling.
inline std::mt19937_64 derive_rng(std::uint64_t seed, std::uint64_t stream)
{
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

template <class T>
void shuffle(std::vector<T>& v, std::mt19937_64& rng)
{
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[random_index(rng, i)]);
}

}  // namespace fexp
