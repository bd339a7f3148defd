#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace fec {

using Rng = std::mt19937_64;

/// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// Derives an independent seed from a parent seed and a text label, so every
/// subsystem can draw from its own stream given a single master seed.
std::uint64_t derive_seed(std::uint64_t parent, std::string_view label);

/// Seed for frame `index` of a Monte-Carlo run; independent of scheduling.
std::uint64_t frame_seed(std::uint64_t master, std::uint64_t index);

inline Rng make_rng(std::uint64_t seed) { return Rng(mix64(seed)); }

}  // namespace fec
