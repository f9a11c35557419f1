#pragma once

#include <filesystem>
#include <utility>

#include "stemob/inversion.hpp"
#include "stemob/manifest.hpp"

namespace stemob {

enum class OutputFormat { png, tensor };

std::string to_string(OutputFormat f);
OutputFormat output_format_from_string(const std::string& s);

struct ScheduleSpec {
    ScheduleKind kind = ScheduleKind::cosine;
    double beta_start = 1e-4;  // linear only
    double beta_end = 0.02;
    double cosine_offset = 0.008;  // cosine only
    double max_beta = 0.999;

    NoiseSchedule build(int steps) const;
};

struct PipelineConfig {
    InversionConfig inversion;
    ScheduleSpec schedule;
    std::filesystem::path out_dir;
    int workers = 1;
    OutputFormat format = OutputFormat::tensor;
};

struct RecordFailure {
    std::string id;
    std::string message;
};

struct InvertResult {
    DatasetManifest output_manifest;
    std::filesystem::path manifest_path;  // ends in .partial when failures occurred
    std::vector<RecordFailure> failures;

    bool ok() const { return failures.empty(); }
};

// Applies stem_preprocess to every record of the manifest, fanning out over
// `workers` threads. Each record's noise stream is keyed by a stable hash of
// its id, so outputs are identical for any worker count or record order.
// Per-record failures are collected; the surviving outputs are kept and the
// manifest is written with a `.partial` suffix.
InvertResult run_invert(const DatasetManifest& manifest, const PipelineConfig& config);

// One run_invert per (t_stop, T) pair, each in a `t<k>_T<n>` subdirectory of
// config.out_dir.
std::vector<InvertResult> run_sweep(const DatasetManifest& manifest, const PipelineConfig& config,
                                    const std::vector<std::pair<int, int>>& step_pairs);

// Single PNG strip: the original tile followed by one DDPM-inverted tile per
// step. Steps must be sorted ascending.
void emit_inversion_grid(const Latent& image, const NoiseSchedule& schedule,
                         const std::vector<int>& steps, std::uint64_t seed,
                         std::uint64_t stream_id, const std::filesystem::path& out);

}  // namespace stemob
