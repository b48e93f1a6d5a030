#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace bcs::rng {

// std::uniform_real_distribution / normal_distribution are
// implementation-defined; the helpers below are pinned so that seeded
// output is bit-identical across compilers. mt19937_64 itself is fully
// specified by the standard.

/// Uniform double in [0, 1) from the top 53 bits of one draw.
inline double uniform01(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

/// Uniform double in [lo, hi).
inline double uniform(std::mt19937_64& gen, double lo, double hi) {
  return lo + (hi - lo) * uniform01(gen);
}

/// Standard normal via Box-Muller (consumes two draws).
inline double gaussian(std::mt19937_64& gen) {
  double u1 = uniform01(gen);
  double u2 = uniform01(gen);
  // Shift u1 away from 0 so the log is finite.
  u1 = (u1 > 0.0) ? u1 : 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

}  // namespace bcs::rng
