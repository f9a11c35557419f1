#pragma once

#include <ostream>

#include "stemob/pipeline.hpp"
#include "stemob/regression.hpp"
#include "stemob/scene.hpp"

namespace stemob {

// Train-on-inverted / test-on-original comparison. Each arm preprocesses the
// training split at its inversion depth, fits the ridge proxy, and is then
// evaluated on untouched originals of both splits. "org" is the
// no-preprocessing baseline; a 0/T arm must reproduce it bitwise.
//
// The default pools hold one basic appearance setting for training and one
// held-out texture/tint setting for the generalization split; variations
// appear at test time only.
struct HarnessConfig {
    std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    std::vector<std::pair<int, int>> arms = {{0, 50}, {5, 50}, {10, 50},
                                             {15, 50}, {20, 50}, {25, 50}};
    int image_size = 32;
    int samples = 240;  // records per seed, alternating train/test
    std::vector<std::uint32_t> texture_pool = {0, 1};
    std::vector<std::array<double, 3>> tint_pool = {{1.0, 1.0, 1.0}, {0.70, 0.95, 1.30}};
    double lambda = 1e-3;
    double success_radius = 0.05;
    ScheduleSpec schedule;
    InversionMethod method = InversionMethod::ddpm;
};

HarnessConfig harness_config_from_json(const nlohmann::json& j);
nlohmann::json harness_config_to_json(const HarnessConfig& config);

struct HarnessRow {
    std::string condition;  // "org" or "t<k>_T<n>"
    int t_stop = 0;
    int total_steps = 0;
    std::uint64_t seed = 0;
    std::string split;  // "train" or "gen"
    double mse = 0.0;
    double success_rate = 0.0;
};

struct HarnessReport {
    std::vector<HarnessRow> rows;     // one per (condition, seed, split)
    std::vector<HarnessRow> medians;  // one per (condition, split), seed = 0

    const HarnessRow* find_median(const std::string& condition, const std::string& split) const;
    void write_csv(std::ostream& os) const;          // per-seed rows
    void write_median_csv(std::ostream& os) const;   // median rows
};

HarnessReport robustness_experiment(const HarnessConfig& config);

}  // namespace stemob
