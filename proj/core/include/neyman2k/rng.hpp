#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace neyman2k {

using RandomEngine = std::mt19937_64;

std::uint64_t splitmix64_next(std::uint64_t& state);

/// Deterministic per-replicate seed: replicate r of a run with master seed
/// s draws from an engine seeded with derive_seed(s, r). Replicates are
/// therefore independent of scheduling, so parallel and sequential runs
/// produce identical streams.
std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t index);

/// Unbiased draw from {0, ..., bound-1}. Rejection sampling on the raw
/// 64-bit stream; unlike std::uniform_int_distribution the output is
/// identical across standard library implementations.
std::uint64_t uniform_below(RandomEngine& engine, std::uint64_t bound);

/// Fisher-Yates shuffle driven by uniform_below, for the same
/// reproducibility reason.
template <typename T>
void deterministic_shuffle(std::vector<T>& values, RandomEngine& engine) {
  for (std::size_t i = values.size(); i > 1; --i) {
    const std::size_t j = uniform_below(engine, i);
    std::swap(values[i - 1], values[j]);
  }
}

}  // namespace neyman2k
