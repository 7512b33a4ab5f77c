#include "neyman2k/rng.hpp"

#include <stdexcept>

namespace neyman2k {

std::uint64_t splitmix64_next(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t index) {
  std::uint64_t state = master_seed + (index + 1) * 0x9E3779B97F4A7C15ull;
  splitmix64_next(state);
  return splitmix64_next(state);
}

std::uint64_t uniform_below(RandomEngine& engine, std::uint64_t bound) {
  if (bound == 0) {
    throw std::invalid_argument("uniform_below requires a positive bound");
  }
  // 2^64 mod bound values at the bottom of the range would bias the
  // modulus; reject them.
  const std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    const std::uint64_t raw = engine();
    if (raw >= threshold) {
      return raw % bound;
    }
  }
}

}  // namespace neyman2k
