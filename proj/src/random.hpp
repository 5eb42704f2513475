#pragma once

// Portable seeded randomness. std::mt19937_64's output sequence is fixed by
// the standard; the distributions in <random> are not, so the few we need
// are spelled out here.

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <utility>

namespace moodrank::detail {

using Rng = std::mt19937_64;

// Uniform on [0, 1).
inline double unit_real(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

// Uniform on [0, n); n > 0.
inline std::uint64_t uniform_below(Rng& rng, std::uint64_t n) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x = rng();
  while (x >= limit) x = rng();
  return x % n;
}

template <typename T>
void shuffle(std::span<T> values, Rng& rng) {
  for (std::size_t i = values.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(uniform_below(rng, i));
    std::swap(values[i - 1], values[j]);
  }
}

// Box-Muller; discards the second variate for simplicity of state.
inline double standard_normal(Rng& rng) {
  double u1 = unit_real(rng);
  while (u1 <= 0.0) u1 = unit_real(rng);
  const double u2 = unit_real(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

}  // namespace moodrank::detail
