#pragma once

#include <filesystem>

#include "stemob/latent.hpp"

namespace stemob {

// Binary tensor container. Layout, all little-endian:
//   bytes 0..3   magic "STEM"
//   u32          format version (1)
//   u32          dtype code (1 = float32)
//   u32          ndim
//   u64 * ndim   dims
//   f32 * numel  payload, row-major
// The round trip is bit-exact; PNG output is lossy, this container is the
// lossless default for training consumption.
void write_tensor(const Latent& x, const std::filesystem::path& path);
Latent read_tensor(const std::filesystem::path& path);

}  // namespace stemob
