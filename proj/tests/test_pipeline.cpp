#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cstring>
#include <fstream>
#include <random>

#include "stemob/image_io.hpp"
#include "stemob/pipeline.hpp"
#include "stemob/scene.hpp"
#include "stemob/tensor_io.hpp"

using namespace stemob;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    const auto dir = fs::temp_directory_path() / "stemob_pipeline_tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

// Small image dataset on disk plus its manifest.
DatasetManifest make_dataset(const fs::path& dir, int count, std::uint64_t seed, int size = 16) {
    return generate_dataset(count, default_texture_pool(), default_tint_pool(), seed, dir, size);
}

bool files_identical(const fs::path& a, const fs::path& b) {
    std::ifstream fa(a, std::ios::binary), fb(b, std::ios::binary);
    std::vector<char> ba((std::istreambuf_iterator<char>(fa)), std::istreambuf_iterator<char>());
    std::vector<char> bb((std::istreambuf_iterator<char>(fb)), std::istreambuf_iterator<char>());
    return !ba.empty() && ba == bb;
}

PipelineConfig base_config(const fs::path& out) {
    PipelineConfig config;
    config.inversion.t_stop = 15;
    config.inversion.total_steps = 50;
    config.inversion.seed = 7;
    config.out_dir = out;
    config.format = OutputFormat::tensor;
    return config;
}

}  // namespace

TEST_CASE("manifest round trip and duplicate detection") {
    const auto dir = fresh_dir("manifest");
    DatasetManifest manifest;
    manifest.base_dir = dir;
    manifest.provenance = nlohmann::json{{"note", "test"}};
    manifest.records.push_back({"a", "a.png", std::nullopt, Split::train, {0.1, 0.2}});
    manifest.records.push_back({"b", "b.png", "cat", Split::test, {}});
    save_manifest(manifest, dir / "m.jsonl");

    const DatasetManifest back = load_manifest(dir / "m.jsonl");
    REQUIRE(back.records.size() == 2);
    CHECK(back.provenance.has_value());
    CHECK(back.records[0].id == "a");
    CHECK(back.records[0].label == std::vector<double>{0.1, 0.2});
    CHECK(back.records[1].category == "cat");
    CHECK(back.records[1].split == Split::test);

    std::ofstream os(dir / "dup.jsonl");
    os << R"({"id":"x","path":"x.png"})" << "\n" << R"({"id":"x","path":"y.png"})" << "\n";
    os.close();
    CHECK_THROWS_WITH_AS(load_manifest(dir / "dup.jsonl"), doctest::Contains("duplicate"),
                         std::runtime_error);
}

TEST_CASE("run_invert at depth zero passes tensors through") {
    const auto data_dir = fresh_dir("passthrough_data");
    const DatasetManifest manifest = make_dataset(data_dir, 6, 1);

    auto config = base_config(fresh_dir("passthrough_out"));
    config.inversion.t_stop = 0;
    const InvertResult result = run_invert(manifest, config);
    REQUIRE(result.ok());
    REQUIRE(result.output_manifest.records.size() == manifest.records.size());

    for (const auto& rec : result.output_manifest.records) {
        const Latent out = read_tensor(result.output_manifest.resolve(rec));
        const Latent in = load_image_as_latent(data_dir / (rec.id + ".png"));
        REQUIRE(out.data.size() == in.data.size());
        CHECK(std::memcmp(out.data.data(), in.data.data(), in.data.size() * 4) == 0);
    }
    CHECK(result.output_manifest.provenance.has_value());
    CHECK((*result.output_manifest.provenance)["t_stop"] == 0);
}

TEST_CASE("worker count and record order never change outputs") {
    const auto data_dir = fresh_dir("determinism_data");
    DatasetManifest manifest = make_dataset(data_dir, 24, 2);

    auto config1 = base_config(fresh_dir("determinism_w1"));
    config1.workers = 1;
    REQUIRE(run_invert(manifest, config1).ok());

    auto config8 = base_config(fresh_dir("determinism_w8"));
    config8.workers = 8;
    REQUIRE(run_invert(manifest, config8).ok());

    DatasetManifest shuffled = manifest;
    std::shuffle(shuffled.records.begin(), shuffled.records.end(), std::mt19937(99));
    auto config_shuffled = base_config(fresh_dir("determinism_shuffled"));
    config_shuffled.workers = 4;
    REQUIRE(run_invert(shuffled, config_shuffled).ok());

    for (const auto& rec : manifest.records) {
        const auto name = rec.id + ".stem";
        CHECK(files_identical(config1.out_dir / name, config8.out_dir / name));
        CHECK(files_identical(config1.out_dir / name, config_shuffled.out_dir / name));
    }
}

TEST_CASE("per-record failures are collected, not fatal") {
    const auto data_dir = fresh_dir("failures_data");
    DatasetManifest manifest = make_dataset(data_dir, 4, 3);
    manifest.records.push_back({"ghost", "missing.png", std::nullopt, Split::train, {}});

    auto config = base_config(fresh_dir("failures_out"));
    const InvertResult result = run_invert(manifest, config);
    CHECK_FALSE(result.ok());
    REQUIRE(result.failures.size() == 1);
    CHECK(result.failures[0].id == "ghost");
    CHECK(result.output_manifest.records.size() == 4);
    CHECK(result.manifest_path.string().ends_with(".partial"));
    CHECK(fs::exists(result.manifest_path));
}

TEST_CASE("sweep families") {
    const auto data_dir = fresh_dir("sweep_data");
    const DatasetManifest manifest = make_dataset(data_dir, 4, 4);

    SUBCASE("single pass-through pair") {
        auto config = base_config(fresh_dir("sweep_single"));
        const auto results = run_sweep(manifest, config, {{0, 50}});
        REQUIRE(results.size() == 1);
        CHECK(results[0].ok());
        CHECK(fs::exists(config.out_dir / "t0_T50" / "manifest.jsonl"));
    }

    SUBCASE("deviation grows with depth in the fixed-total family") {
        auto config = base_config(fresh_dir("sweep_total"));
        const std::vector<std::pair<int, int>> family = {{0, 50},  {5, 50},  {10, 50},
                                                         {15, 50}, {20, 50}, {25, 50}};
        const auto results = run_sweep(manifest, config, family);
        REQUIRE(results.size() == family.size());

        const NoiseSchedule sched = config.schedule.build(50);
        double prev = -1.0;
        for (std::size_t k = 0; k < family.size(); ++k) {
            const double scale = std::sqrt(sched.alpha_bar(family[k].first));
            double mean_dev = 0.0;
            for (const auto& rec : results[k].output_manifest.records) {
                const Latent out = read_tensor(results[k].output_manifest.resolve(rec));
                const Latent in = load_image_as_latent(data_dir / (rec.id + ".png"));
                double acc = 0.0;
                for (std::size_t i = 0; i < in.data.size(); ++i) {
                    const double dev = out.data[i] - scale * in.data[i];
                    acc += dev * dev;
                }
                mean_dev += std::sqrt(acc);
            }
            mean_dev /= static_cast<double>(results[k].output_manifest.records.size());
            CHECK(mean_dev > prev);
            prev = mean_dev;
        }
    }

    SUBCASE("fixed-ratio family lands on matching alpha_bar") {
        ScheduleSpec spec;  // cosine
        const double a30 = spec.build(30).alpha_bar(9);
        const double a50 = spec.build(50).alpha_bar(15);
        const double a100 = spec.build(100).alpha_bar(30);
        CHECK(a30 == doctest::Approx(a50).epsilon(0.02));
        CHECK(a100 == doctest::Approx(a50).epsilon(0.02));
    }

    SUBCASE("invalid pair") {
        auto config = base_config(fresh_dir("sweep_bad"));
        CHECK_THROWS_AS(run_sweep(manifest, config, {{60, 50}}), std::invalid_argument);
    }
}

TEST_CASE("inversion grid layout") {
    const auto dir = fresh_dir("grid");
    SceneParams params;
    const Latent image = render_scene(params, 16);
    const NoiseSchedule sched = NoiseSchedule::cosine(50);

    SUBCASE("no steps means a single original tile") {
        emit_inversion_grid(image, sched, {}, 1, 2, dir / "single.png");
        const Latent grid = load_image_as_latent(dir / "single.png");
        CHECK(grid.shape == std::vector<std::size_t>{3, 16, 16});
    }

    SUBCASE("eleven tiles for the ten-step ladder, step zero equals the original") {
        const std::vector<int> steps = {0, 5, 10, 15, 20, 25, 30, 35, 40, 45, 50};
        emit_inversion_grid(image, sched, steps, 1, 2, dir / "ladder.png");
        const Latent grid = load_image_as_latent(dir / "ladder.png");
        REQUIRE(grid.shape == std::vector<std::size_t>{3, 16, 16 * 12});

        auto tile = [&](std::size_t index) {
            Latent t = make_latent({3, 16, 16});
            for (std::size_t c = 0; c < 3; ++c)
                for (std::size_t y = 0; y < 16; ++y)
                    for (std::size_t x = 0; x < 16; ++x)
                        t.data[(c * 16 + y) * 16 + x] =
                            grid.data[(c * 16 + y) * (16 * 12) + index * 16 + x];
            return t;
        };
        // tile 0 is the original, tile 1 is inversion depth 0 == original
        const Latent t0 = tile(0), t1 = tile(1), deep = tile(11);
        CHECK(std::memcmp(t0.data.data(), t1.data.data(), t0.data.size() * 4) == 0);
        CHECK(std::memcmp(t0.data.data(), deep.data.data(), t0.data.size() * 4) != 0);
    }

    SUBCASE("unsorted steps are rejected") {
        CHECK_THROWS_AS(emit_inversion_grid(image, sched, {10, 5}, 1, 2, dir / "bad.png"),
                        std::invalid_argument);
    }
}
