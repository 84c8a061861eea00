#ifndef EHRELAY_RANDOM_HPP
#define EHRELAY_RANDOM_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace ehrelay {

using Rng = std::mt19937_64;

// Library distributions differ between standard library vendors; these do not.

inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

inline std::size_t uniform_index(Rng& rng, std::size_t n) {
  return static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n)) % n;
}

inline double exponential(Rng& rng, double mean) {
  return -mean * std::log1p(-uniform01(rng));
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t value) {
  return splitmix64(seed ^ splitmix64(value));
}

/// Independent generator for a named stream of a base seed.
inline Rng make_rng(std::uint64_t seed, std::uint64_t stream) {
  return Rng(mix_seed(seed, stream));
}

namespace stream {
inline constexpr std::uint64_t placement = 1;
inline constexpr std::uint64_t harvest = 2;
inline constexpr std::uint64_t selection = 3;
inline constexpr std::uint64_t fading = 4;
}  // namespace stream

}  // namespace ehrelay

#endif  // EHRELAY_RANDOM_HPP
