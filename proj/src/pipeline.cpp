#include "stemob/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <thread>

#include "stemob/image_io.hpp"
#include "stemob/tensor_io.hpp"

namespace stemob {

std::string to_string(OutputFormat f) { return f == OutputFormat::png ? "png" : "tensor"; }

OutputFormat output_format_from_string(const std::string& s) {
    if (s == "png") return OutputFormat::png;
    if (s == "tensor") return OutputFormat::tensor;
    throw std::invalid_argument("unknown output format '" + s + "'");
}

NoiseSchedule ScheduleSpec::build(int steps) const {
    return kind == ScheduleKind::linear ? NoiseSchedule::linear(steps, beta_start, beta_end)
                                        : NoiseSchedule::cosine(steps, cosine_offset, max_beta);
}

namespace {

Latent load_record(const std::filesystem::path& path) {
    const std::string ext = path.extension().string();
    if (ext == ".png") return load_image_as_latent(path);
    return read_tensor(path);
}

nlohmann::json provenance_json(const DatasetManifest& input, const PipelineConfig& config) {
    nlohmann::json j;
    j["tool"] = "stemob";
    if (!input.source_path.empty()) j["input_manifest"] = input.source_path.string();
    j["method"] = to_string(config.inversion.method);
    j["t_stop"] = config.inversion.t_stop;
    j["total_steps"] = config.inversion.total_steps;
    j["seed"] = config.inversion.seed;
    j["error_reduction"] = config.inversion.error_reduction;
    j["schedule"] = to_string(config.schedule.kind);
    if (config.schedule.kind == ScheduleKind::linear) {
        j["beta_start"] = config.schedule.beta_start;
        j["beta_end"] = config.schedule.beta_end;
    } else {
        j["cosine_offset"] = config.schedule.cosine_offset;
        j["max_beta"] = config.schedule.max_beta;
    }
    j["format"] = to_string(config.format);
    return j;
}

}  // namespace

InvertResult run_invert(const DatasetManifest& manifest, const PipelineConfig& config) {
    if (config.workers < 1) throw std::invalid_argument("run_invert: worker count must be >= 1");
    const NoiseSchedule schedule = config.schedule.build(config.inversion.total_steps);
    std::filesystem::create_directories(config.out_dir);

    const std::string ext = config.format == OutputFormat::png ? ".png" : ".stem";
    const std::size_t n = manifest.records.size();
    std::vector<std::string> errors(n);

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            const ManifestRecord& rec = manifest.records[i];
            try {
                const Latent input = load_record(manifest.resolve(rec));
                const Latent output = stem_preprocess(input, config.inversion, schedule,
                                                      stable_hash64(rec.id));
                const std::filesystem::path out_path = config.out_dir / (rec.id + ext);
                if (config.format == OutputFormat::png)
                    save_latent_as_image(output, out_path);
                else
                    write_tensor(output, out_path);
            } catch (const std::exception& e) {
                errors[i] = e.what();
            }
        }
    };

    {
        std::vector<std::thread> pool;
        const int threads = std::min<int>(config.workers, static_cast<int>(std::max<std::size_t>(n, 1)));
        pool.reserve(static_cast<std::size_t>(threads));
        for (int w = 0; w < threads; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    InvertResult result;
    result.output_manifest.base_dir = config.out_dir;
    result.output_manifest.provenance = provenance_json(manifest, config);
    for (std::size_t i = 0; i < n; ++i) {
        if (!errors[i].empty()) {
            result.failures.push_back({manifest.records[i].id, errors[i]});
            continue;
        }
        ManifestRecord rec = manifest.records[i];
        rec.path = rec.id + ext;
        result.output_manifest.records.push_back(std::move(rec));
    }

    result.manifest_path =
        config.out_dir / (result.ok() ? "manifest.jsonl" : "manifest.jsonl.partial");
    save_manifest(result.output_manifest, result.manifest_path);
    return result;
}

std::vector<InvertResult> run_sweep(const DatasetManifest& manifest, const PipelineConfig& config,
                                    const std::vector<std::pair<int, int>>& step_pairs) {
    std::vector<InvertResult> results;
    results.reserve(step_pairs.size());
    for (const auto& [t_stop, total] : step_pairs) {
        if (t_stop < 0 || total < 1 || t_stop > total)
            throw std::invalid_argument("run_sweep: bad step pair " + std::to_string(t_stop) +
                                        "/" + std::to_string(total));
        PipelineConfig sub = config;
        sub.inversion.t_stop = t_stop;
        sub.inversion.total_steps = total;
        sub.out_dir = config.out_dir /
                      ("t" + std::to_string(t_stop) + "_T" + std::to_string(total));
        results.push_back(run_invert(manifest, sub));
    }
    return results;
}

void emit_inversion_grid(const Latent& image, const NoiseSchedule& schedule,
                         const std::vector<int>& steps, std::uint64_t seed,
                         std::uint64_t stream_id, const std::filesystem::path& out) {
    validate_latent(image, "grid image");
    if (image.shape.size() != 3 || image.shape[0] != 3)
        throw std::invalid_argument("grid image must have shape 3xHxW");
    if (!std::is_sorted(steps.begin(), steps.end()))
        throw std::invalid_argument("grid steps must be sorted ascending");

    const std::size_t height = image.shape[1];
    const std::size_t width = image.shape[2];
    const std::size_t tiles = steps.size() + 1;
    Latent grid = make_latent({3, height, width * tiles});

    auto blit = [&](const Latent& tile, std::size_t index) {
        for (std::size_t c = 0; c < 3; ++c)
            for (std::size_t y = 0; y < height; ++y)
                for (std::size_t x = 0; x < width; ++x)
                    grid.data[(c * height + y) * width * tiles + index * width + x] =
                        tile.data[(c * height + y) * width + x];
    };

    blit(image, 0);
    NoiseKey key;
    key.seed = seed;
    key.stream_id = stream_id;
    for (std::size_t i = 0; i < steps.size(); ++i)
        blit(ddpm_invert(image, schedule, steps[i], key), i + 1);

    save_latent_as_image(grid, out);
}

}  // namespace stemob
