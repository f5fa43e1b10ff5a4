#pragma once

// Seed derivation for Monte Carlo runs. Every disorder sample draws from its
// own engine seeded by (master seed, sample index), so a run's sample set is
// fixed by the master seed alone and never by scheduling.

#include <cmath>
#include <cstdint>
#include <random>

namespace alloy {

using Engine = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return splitmix64(splitmix64(master) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

/// Engine for the index-th sample of a run with the given master seed.
inline Engine sample_engine(std::uint64_t master, std::uint64_t index) { return Engine(derive_seed(master, index)); }

/// Uniform variate strictly inside (0, 1) built from the top 53 bits. Used in
/// place of std::uniform_real_distribution, whose output is not pinned by the
/// standard.
inline double uniform_open01(Engine& eng) {
  return (static_cast<double>(eng() >> 11) + 0.5) * 0x1.0p-53;
}

inline double uniform_in(Engine& eng, double a, double b) { return a + (b - a) * uniform_open01(eng); }

/// Standard normal variate via Box-Muller (deterministic given the engine).
inline double standard_normal(Engine& eng) {
  constexpr double two_pi = 6.283185307179586476925286766559;
  const double u1 = uniform_open01(eng);
  const double u2 = uniform_open01(eng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
}

inline int uniform_int(Engine& eng, int lo, int hi) {
  const auto span = static_cast<std::uint64_t>(hi - lo + 1);
  return lo + static_cast<int>(eng() % span);
}

}  // namespace alloy
