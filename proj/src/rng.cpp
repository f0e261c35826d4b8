#include "eegscreen/rng.hpp"

#include <cmath>
#include <numbers>

namespace eegscreen {

std::uint64_t SplitMix64::below(std::uint64_t n) {
  if (n <= 1) return 0;
  // Rejection sampling removes modulo bias.
  const std::uint64_t limit = max() - max() % n;
  std::uint64_t r = (*this)();
  while (r >= limit) r = (*this)();
  return r % n;
}

double SplitMix64::normal() {
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  SplitMix64 mix(seed ^ (a * 0xD1B54A32D192ED03ULL) ^ (b * 0xABC98388FB8FAC03ULL));
  mix();
  return mix();
}

}  // namespace eegscreen
