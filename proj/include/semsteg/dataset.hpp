#pragma once

#include <cstdint>
#include <vector>

#include "semsteg/rng.hpp"
#include "semsteg/tensor.hpp"

namespace semsteg {

// Procedural images: seeded mixes of linear gradients, axis-aligned
// rectangles, filled circles, and band-limited sinusoidal textures. Values in
// [0,1], deterministic per (seed, index).
std::vector<Tensor> synth_dataset(std::uint64_t seed, int n, const std::vector<int>& shape);

// Pairs up a 2n-image dataset into (cover, secret) pairs.
std::vector<std::pair<Tensor, Tensor>> synth_pairs(std::uint64_t seed, int n,
                                                   const std::vector<int>& shape);

}  // namespace semsteg
