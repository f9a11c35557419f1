#pragma once

#include <array>
#include <cstdint>

#include "stemob/latent.hpp"

namespace stemob {

// Addresses one independent noise block. Distinct (seed, stream_id, step)
// tuples map to disjoint regions of the Philox counter space, so the blocks
// they produce are independent regardless of evaluation order or thread
// count. `counter` offsets within a block (e.g. frame index inside one
// observation stack).
struct NoiseKey {
    std::uint64_t seed = 0;
    std::uint64_t stream_id = 0;
    std::uint32_t step = 0;
    std::uint64_t counter = 0;
};

// Philox 4x64 keyed counter block cipher, 10 rounds. Output matches the
// reference implementation (cross-checked against numpy.random.Philox).
std::array<std::uint64_t, 4> philox4x64(const std::array<std::uint64_t, 4>& counter,
                                        const std::array<std::uint64_t, 2>& key);

// Maps a 64-bit word to a uniform double strictly inside (0, 1).
double uniform_from_bits(std::uint64_t bits);

// Standard normal quantile, evaluated via a rational approximation plus one
// Halley refinement; relative accuracy is near machine precision.
double normal_quantile(double p);

// i.i.d. standard normal samples, a pure function of (key, shape). Sample i
// occupies lane i%4 of the Philox block with counter lanes
// {i/4, key.counter, key.step, 0} under cipher key {seed, stream_id}, so the
// result is identical for any thread count, call order or batch split.
Latent draw_noise(const NoiseKey& key, const std::vector<std::size_t>& shape);

// Stable 64-bit FNV-1a over bytes; used to derive noise stream ids from
// record ids so that dataset order never affects outputs.
std::uint64_t stable_hash64(const std::string& s);

}  // namespace stemob
