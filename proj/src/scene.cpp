#include "stemob/scene.hpp"

#include <cmath>

#include "stemob/image_io.hpp"
#include "stemob/noise.hpp"

namespace stemob {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

double hash_unit(std::uint64_t x) { return uniform_from_bits(splitmix64(x)); }

// Two superposed sinusoid gratings with frequencies and phases derived from
// the texture id. Returns a shade in [0,1] centered on `base`.
double texture_shade(std::uint32_t id, std::size_t channel, double u, double v, double base,
                     double amplitude) {
    const std::uint64_t h = splitmix64(static_cast<std::uint64_t>(id) * 0x9E3779B97F4A7C15ull + 1);
    const double f1u = 1.0 + std::floor(hash_unit(h ^ 0x11) * 5.0);
    const double f1v = 1.0 + std::floor(hash_unit(h ^ 0x22) * 5.0);
    const double f2u = 1.0 + std::floor(hash_unit(h ^ 0x33) * 8.0);
    const double f2v = 1.0 + std::floor(hash_unit(h ^ 0x44) * 8.0);
    const double p1 = 2.0 * M_PI * hash_unit(h ^ 0x55);
    const double p2 = 2.0 * M_PI * hash_unit(h ^ 0x66);
    const double chroma = 0.35 * M_PI * static_cast<double>(channel);
    const double wave = 0.5 * std::sin(2.0 * M_PI * (f1u * u + f1v * v) + p1 + chroma) +
                        0.5 * std::sin(2.0 * M_PI * (f2u * u - f2v * v) + p2);
    return std::clamp(base + amplitude * wave, 0.0, 1.0);
}

// Harness scenes carry strong texture detail so an appearance change at test
// time really is a distribution shift and not a cosmetic one.
constexpr double kBgBase = 0.40;
constexpr double kBgAmp = 0.32;
constexpr double kFgBase = 0.72;
constexpr double kFgAmp = 0.28;

// The category set keeps appearance variation mild: texture and tint are the
// fine-grained axis there, shape the coarse one, and the gap between the two
// is what the distance analyses measure.
constexpr double kCatBgBase = 0.35;
constexpr double kCatBgAmp = 0.05;
constexpr double kCatFgBase = 0.80;
constexpr double kCatFgAmp = 0.04;

// Uniform stream for parameter sampling, independent of the noise draws used
// by the inversion kernels (distinct counter salt).
double param_uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
    const auto words = philox4x64({index / 4, stream, 0, 0x5CE17Eull}, {seed, 0x70A11Dull});
    return uniform_from_bits(words[index % 4]);
}

}  // namespace

int scene_square_side(int size) { return std::max(1, size / 5); }

double scene_margin(int size) {
    return (scene_square_side(size) / 2.0 + 1.0) / static_cast<double>(size);
}

Latent render_scene(const SceneParams& params, int size) {
    if (size < 5) throw std::invalid_argument("render_scene: image size must be >= 5");
    const int side = scene_square_side(size);
    const long col0 = std::lround(params.px * size - side / 2.0);
    const long row0 = std::lround(params.py * size - side / 2.0);
    if (col0 < 0 || row0 < 0 || col0 + side > size || row0 + side > size)
        throw std::invalid_argument("render_scene: square leaves the image bounds at (" +
                                    std::to_string(params.px) + "," + std::to_string(params.py) +
                                    ")");

    const std::size_t n = static_cast<std::size_t>(size);
    Latent out = make_latent({3, n, n});
    const std::size_t plane = n * n;
    for (std::size_t y = 0; y < n; ++y) {
        for (std::size_t x = 0; x < n; ++x) {
            const bool inside = static_cast<long>(x) >= col0 && static_cast<long>(x) < col0 + side &&
                                static_cast<long>(y) >= row0 && static_cast<long>(y) < row0 + side;
            const double u = (x + 0.5) / n;
            const double v = (y + 0.5) / n;
            for (std::size_t c = 0; c < 3; ++c) {
                double shade = inside
                                   ? texture_shade(params.fg_texture, c, u, v, kFgBase, kFgAmp)
                                   : texture_shade(params.bg_texture, c, u, v, kBgBase, kBgAmp);
                shade = std::clamp(shade * params.tint[c], 0.0, 1.0);
                out.data[c * plane + y * n + x] = static_cast<float>(2.0 * shade - 1.0);
            }
        }
    }
    return out;
}

std::vector<SceneSample> sample_scene_params(int n, const std::vector<std::uint32_t>& texture_pool,
                                             const std::vector<std::array<double, 3>>& tint_pool,
                                             std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("sample_scene_params: need at least one record");
    if (texture_pool.empty() || tint_pool.empty())
        throw std::invalid_argument("sample_scene_params: empty pool");

    const std::size_t tex_split = (texture_pool.size() + 1) / 2;
    const std::size_t tint_split = (tint_pool.size() + 1) / 2;

    // Positions are validated against the smallest size the renderer
    // supports; callers render at >= 16 so the margin below is conservative.
    const double margin = scene_margin(16);

    std::vector<SceneSample> samples;
    samples.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        SceneSample s;
        s.split = i % 2 == 0 ? Split::train : Split::test;
        s.id = "r" + std::to_string(i);

        const std::size_t tex_lo = s.split == Split::train ? 0 : tex_split;
        const std::size_t tex_hi = s.split == Split::train ? tex_split : texture_pool.size();
        const std::size_t tint_lo = s.split == Split::train ? 0 : tint_split;
        const std::size_t tint_hi = s.split == Split::train ? tint_split : tint_pool.size();
        if (tex_lo >= tex_hi)
            throw std::invalid_argument("sample_scene_params: texture pool too small to hold out "
                                        "a test subset");
        if (tint_lo >= tint_hi)
            throw std::invalid_argument("sample_scene_params: tint pool too small to hold out a "
                                        "test subset");

        const std::uint64_t stream = static_cast<std::uint64_t>(i);
        const double w = 1.0 - 2.0 * margin;
        s.params.px = margin + w * param_uniform(seed, stream, 0);
        s.params.py = margin + w * param_uniform(seed, stream, 1);
        s.params.fg_texture = texture_pool[tex_lo + static_cast<std::size_t>(param_uniform(
                                                        seed, stream, 2) *
                                                    static_cast<double>(tex_hi - tex_lo))];
        s.params.bg_texture = texture_pool[tex_lo + static_cast<std::size_t>(param_uniform(
                                                        seed, stream, 3) *
                                                    static_cast<double>(tex_hi - tex_lo))];
        s.params.tint = tint_pool[tint_lo + static_cast<std::size_t>(param_uniform(seed, stream,
                                                                                   4) *
                                                                     static_cast<double>(
                                                                         tint_hi - tint_lo))];
        s.label = {s.params.px, s.params.py};
        samples.push_back(std::move(s));
    }
    return samples;
}

DatasetManifest generate_dataset(int n, const std::vector<std::uint32_t>& texture_pool,
                                 const std::vector<std::array<double, 3>>& tint_pool,
                                 std::uint64_t seed, const std::filesystem::path& out_dir,
                                 int size) {
    if (size < 16)
        throw std::invalid_argument("generate_dataset: image size must be >= 16, the sampling "
                                    "margin assumes it");
    const auto samples = sample_scene_params(n, texture_pool, tint_pool, seed);
    std::filesystem::create_directories(out_dir);

    DatasetManifest manifest;
    manifest.base_dir = out_dir;
    for (const SceneSample& s : samples) {
        const std::string filename = s.id + ".png";
        save_latent_as_image(render_scene(s.params, size), out_dir / filename);
        ManifestRecord rec;
        rec.id = s.id;
        rec.path = filename;
        rec.split = s.split;
        rec.label = s.label;
        manifest.records.push_back(std::move(rec));
    }
    save_manifest(manifest, out_dir / "manifest.jsonl");
    return manifest;
}

namespace {

enum class Shape { square, disk, triangle, plus, frame };

bool shape_mask(Shape shape, double dx, double dy, double r) {
    switch (shape) {
        case Shape::square:
            return std::abs(dx) <= r && std::abs(dy) <= r;
        case Shape::disk:
            return dx * dx + dy * dy <= r * r;
        case Shape::triangle:
            return dy >= -r && dy <= r && std::abs(dx) <= (dy + r) / 2.0;
        case Shape::plus:
            return (std::abs(dx) <= r * 0.34 && std::abs(dy) <= r) ||
                   (std::abs(dy) <= r * 0.34 && std::abs(dx) <= r);
        case Shape::frame: {
            const bool outer = std::abs(dx) <= r && std::abs(dy) <= r;
            const bool inner = std::abs(dx) <= r * 0.55 && std::abs(dy) <= r * 0.55;
            return outer && !inner;
        }
    }
    return false;
}

Latent render_category_image(Shape shape, std::uint32_t fg_texture, std::uint32_t bg_texture,
                             const std::array<double, 3>& tint, int size) {
    const std::size_t n = static_cast<std::size_t>(size);
    Latent out = make_latent({3, n, n});
    const std::size_t plane = n * n;
    const double r = size * 0.28;
    const double cx = size / 2.0;
    const double cy = size / 2.0;
    for (std::size_t y = 0; y < n; ++y) {
        for (std::size_t x = 0; x < n; ++x) {
            const bool inside = shape_mask(shape, x + 0.5 - cx, y + 0.5 - cy, r);
            const double u = (x + 0.5) / n;
            const double v = (y + 0.5) / n;
            for (std::size_t c = 0; c < 3; ++c) {
                double shade = inside
                                   ? texture_shade(fg_texture, c, u, v, kCatFgBase, kCatFgAmp)
                                   : texture_shade(bg_texture, c, u, v, kCatBgBase, kCatBgAmp);
                shade = std::clamp(shade * tint[c], 0.0, 1.0);
                out.data[c * plane + y * n + x] = static_cast<float>(2.0 * shade - 1.0);
            }
        }
    }
    return out;
}

}  // namespace

CategorizedSet make_category_set(int size, int per_category, std::uint64_t seed) {
    if (per_category < 2)
        throw std::invalid_argument("make_category_set: need at least 2 images per category");
    const Shape shapes[5] = {Shape::square, Shape::disk, Shape::triangle, Shape::plus,
                             Shape::frame};
    const char* names[5] = {"square", "disk", "triangle", "plus", "frame"};

    CategorizedSet set;
    for (int c = 0; c < 5; ++c) {
        set.categories.emplace_back(names[c]);
        std::vector<Latent> images;
        for (int j = 0; j < per_category; ++j) {
            const std::uint64_t stream = static_cast<std::uint64_t>(c) * 1000 + j;
            const auto tex = [&](std::uint64_t lane) {
                return static_cast<std::uint32_t>(param_uniform(seed, stream, lane) * 64.0);
            };
            std::array<double, 3> tint;
            for (std::uint64_t c2 = 0; c2 < 3; ++c2)
                tint[c2] = 0.96 + 0.08 * param_uniform(seed, stream, 10 + c2);
            images.push_back(render_category_image(shapes[c], tex(0), tex(1), tint, size));
        }
        set.images.push_back(std::move(images));
    }
    return set;
}

DatasetManifest write_category_dataset(const CategorizedSet& set,
                                       const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    DatasetManifest manifest;
    manifest.base_dir = out_dir;
    for (std::size_t c = 0; c < set.categories.size(); ++c) {
        for (std::size_t j = 0; j < set.images[c].size(); ++j) {
            const std::string id = set.categories[c] + "_" + std::to_string(j);
            save_latent_as_image(set.images[c][j], out_dir / (id + ".png"));
            ManifestRecord rec;
            rec.id = id;
            rec.path = id + ".png";
            rec.category = set.categories[c];
            manifest.records.push_back(std::move(rec));
        }
    }
    save_manifest(manifest, out_dir / "manifest.jsonl");
    return manifest;
}

std::vector<std::uint32_t> default_texture_pool() { return {0, 1, 2, 3, 4, 5, 6, 7}; }

std::vector<std::array<double, 3>> default_tint_pool() {
    // Warm and cool lighting proxies; the first half trains, the rest tests.
    return {{1.00, 1.00, 1.00}, {1.20, 1.00, 0.80}, {0.85, 1.00, 1.20},
            {1.35, 1.05, 0.70}, {0.70, 0.95, 1.30}, {1.10, 0.85, 1.10}};
}

}  // namespace stemob
