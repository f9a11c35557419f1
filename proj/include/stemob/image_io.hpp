#pragma once

#include <filesystem>

#include "stemob/latent.hpp"

namespace stemob {

// Decodes an 8-bit RGB PNG into a 3xHxW latent with pixels mapped to
// p/127.5 - 1 in [-1, 1]. Any other color type or bit depth is rejected.
Latent load_image_as_latent(const std::filesystem::path& path);

// Encodes a 3xHxW latent as an 8-bit RGB PNG. Values are clamped to [-1, 1]
// and quantized with round((v + 1) * 127.5).
void save_latent_as_image(const Latent& x, const std::filesystem::path& path);

}  // namespace stemob
