#pragma once

#include <array>
#include <cstdint>
#include <filesystem>

#include "stemob/analysis.hpp"
#include "stemob/latent.hpp"
#include "stemob/manifest.hpp"

namespace stemob {

// Desk-scale synthetic observation: a textured square on a textured
// background under a global per-channel tint. The square's position is the
// label a policy proxy has to regress.
struct SceneParams {
    double px = 0.5;  // target position in [0,1]^2
    double py = 0.5;
    std::uint32_t fg_texture = 0;
    std::uint32_t bg_texture = 0;
    std::array<double, 3> tint = {1.0, 1.0, 1.0};  // per channel, in [0.6, 1.4]
};

// Side length of the rendered square and the position margin that keeps it
// fully inside the image.
int scene_square_side(int size);
double scene_margin(int size);

// Deterministic 3 x size x size render. Tint multiplies in [0,1] brightness
// space before mapping to [-1,1]. Throws if the square leaves the bounds.
Latent render_scene(const SceneParams& params, int size);

struct SceneSample {
    std::string id;
    SceneParams params;
    Split split = Split::train;
    std::vector<double> label;  // {px, py}
};

// Draws n samples with positions uniform over the valid region. The texture
// and tint pools are split in half: the first half feeds train records, the
// held-out second half feeds test records, so no appearance id leaks across
// the splits. Records alternate train/test.
std::vector<SceneSample> sample_scene_params(int n, const std::vector<std::uint32_t>& texture_pool,
                                             const std::vector<std::array<double, 3>>& tint_pool,
                                             std::uint64_t seed);

// Renders the samples as PNGs under out_dir and writes manifest.jsonl.
DatasetManifest generate_dataset(int n, const std::vector<std::uint32_t>& texture_pool,
                                 const std::vector<std::array<double, 3>>& tint_pool,
                                 std::uint64_t seed, const std::filesystem::path& out_dir,
                                 int size);

// Category set for the distance analyses: five shape categories (square,
// disk, triangle, plus, frame) with texture/tint variation inside each
// category. Shapes are the coarse difference, appearance the fine one.
CategorizedSet make_category_set(int size, int per_category, std::uint64_t seed);

// Renders a category set as PNGs plus a category-labeled manifest.jsonl.
DatasetManifest write_category_dataset(const CategorizedSet& set,
                                       const std::filesystem::path& out_dir);

std::vector<std::uint32_t> default_texture_pool();
std::vector<std::array<double, 3>> default_tint_pool();

}  // namespace stemob
