#include "stemob/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace stemob {
namespace {

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

void write_rows(std::ostream& os, const std::vector<HarnessRow>& rows) {
    os << "condition,t_stop,T,seed,split,mse,success_rate\n";
    char buf[160];
    for (const HarnessRow& r : rows) {
        std::snprintf(buf, sizeof(buf), "%s,%d,%d,%llu,%s,%.17g,%.17g\n", r.condition.c_str(),
                      r.t_stop, r.total_steps, static_cast<unsigned long long>(r.seed),
                      r.split.c_str(), r.mse, r.success_rate);
        os << buf;
    }
}

}  // namespace

HarnessConfig harness_config_from_json(const nlohmann::json& j) {
    HarnessConfig c;
    if (j.contains("seeds")) c.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    if (j.contains("arms")) {
        c.arms.clear();
        for (const auto& arm : j.at("arms"))
            c.arms.emplace_back(arm.at("t_stop").get<int>(), arm.at("T").get<int>());
    }
    if (j.contains("image_size")) c.image_size = j.at("image_size").get<int>();
    if (j.contains("samples")) c.samples = j.at("samples").get<int>();
    if (j.contains("texture_pool"))
        c.texture_pool = j.at("texture_pool").get<std::vector<std::uint32_t>>();
    if (j.contains("tint_pool")) {
        c.tint_pool.clear();
        for (const auto& t : j.at("tint_pool"))
            c.tint_pool.push_back({t.at(0).get<double>(), t.at(1).get<double>(),
                                   t.at(2).get<double>()});
    }
    if (j.contains("lambda")) c.lambda = j.at("lambda").get<double>();
    if (j.contains("success_radius")) c.success_radius = j.at("success_radius").get<double>();
    if (j.contains("schedule"))
        c.schedule.kind = schedule_kind_from_string(j.at("schedule").get<std::string>());
    if (j.contains("beta_start")) c.schedule.beta_start = j.at("beta_start").get<double>();
    if (j.contains("beta_end")) c.schedule.beta_end = j.at("beta_end").get<double>();
    if (j.contains("cosine_offset")) c.schedule.cosine_offset = j.at("cosine_offset").get<double>();
    if (j.contains("max_beta")) c.schedule.max_beta = j.at("max_beta").get<double>();
    if (j.contains("method"))
        c.method = inversion_method_from_string(j.at("method").get<std::string>());
    return c;
}

nlohmann::json harness_config_to_json(const HarnessConfig& c) {
    nlohmann::json j;
    j["seeds"] = c.seeds;
    j["arms"] = nlohmann::json::array();
    for (const auto& [t, T] : c.arms) j["arms"].push_back({{"t_stop", t}, {"T", T}});
    j["image_size"] = c.image_size;
    j["samples"] = c.samples;
    j["texture_pool"] = c.texture_pool;
    j["tint_pool"] = c.tint_pool;
    j["lambda"] = c.lambda;
    j["success_radius"] = c.success_radius;
    j["schedule"] = to_string(c.schedule.kind);
    j["beta_start"] = c.schedule.beta_start;
    j["beta_end"] = c.schedule.beta_end;
    j["cosine_offset"] = c.schedule.cosine_offset;
    j["max_beta"] = c.schedule.max_beta;
    j["method"] = to_string(c.method);
    return j;
}

const HarnessRow* HarnessReport::find_median(const std::string& condition,
                                             const std::string& split) const {
    for (const HarnessRow& r : medians)
        if (r.condition == condition && r.split == split) return &r;
    return nullptr;
}

void HarnessReport::write_csv(std::ostream& os) const { write_rows(os, rows); }

void HarnessReport::write_median_csv(std::ostream& os) const { write_rows(os, medians); }

HarnessReport robustness_experiment(const HarnessConfig& config) {
    if (config.seeds.size() < 2)
        throw std::invalid_argument("robustness_experiment: need at least 2 seeds");
    if (config.image_size < 16)
        throw std::invalid_argument("robustness_experiment: image size must be >= 16");
    if (config.samples < 4)
        throw std::invalid_argument("robustness_experiment: need at least 4 records per seed");
    for (const auto& [t, T] : config.arms)
        if (t < 0 || T < 1 || t > T)
            throw std::invalid_argument("robustness_experiment: bad arm " + std::to_string(t) +
                                        "/" + std::to_string(T));

    HarnessReport report;

    struct Cell {
        std::vector<double> mse;
        std::vector<double> success;
        int t_stop = 0;
        int total_steps = 0;
    };
    std::vector<std::pair<std::string, std::string>> cell_order;
    std::map<std::pair<std::string, std::string>, Cell> cells;
    auto record = [&](const std::string& condition, int t_stop, int total, std::uint64_t seed,
                      const std::string& split, const EvalReport& eval) {
        report.rows.push_back({condition, t_stop, total, seed, split, eval.mse,
                               eval.success_rate});
        auto key = std::make_pair(condition, split);
        auto it = cells.find(key);
        if (it == cells.end()) {
            cell_order.push_back(key);
            it = cells.emplace(key, Cell{}).first;
            it->second.t_stop = t_stop;
            it->second.total_steps = total;
        }
        it->second.mse.push_back(eval.mse);
        it->second.success.push_back(eval.success_rate);
    };

    for (const std::uint64_t seed : config.seeds) {
        const auto samples =
            sample_scene_params(config.samples, config.texture_pool, config.tint_pool, seed);

        std::vector<Latent> train_images, test_images;
        std::vector<std::vector<double>> train_labels, test_labels;
        std::vector<std::uint64_t> train_streams;
        for (const SceneSample& s : samples) {
            Latent img = render_scene(s.params, config.image_size);
            if (s.split == Split::train) {
                train_streams.push_back(stable_hash64("s" + std::to_string(seed) + "_" + s.id));
                train_images.push_back(std::move(img));
                train_labels.push_back(s.label);
            } else {
                test_images.push_back(std::move(img));
                test_labels.push_back(s.label);
            }
        }
        if (train_images.empty() || test_images.empty())
            throw std::invalid_argument("robustness_experiment: need both splits populated");

        auto run_condition = [&](const std::string& condition, int t_stop, int total,
                                 bool preprocess) {
            std::vector<Latent> fit_inputs;
            if (preprocess) {
                const NoiseSchedule schedule = config.schedule.build(total);
                InversionConfig inv;
                inv.method = config.method;
                inv.t_stop = t_stop;
                inv.total_steps = total;
                inv.seed = seed;
                fit_inputs.reserve(train_images.size());
                for (std::size_t i = 0; i < train_images.size(); ++i)
                    fit_inputs.push_back(
                        stem_preprocess(train_images[i], inv, schedule, train_streams[i]));
            } else {
                fit_inputs = train_images;
            }
            const RegressorModel model = fit_regressor(fit_inputs, train_labels, config.lambda);
            record(condition, t_stop, total, seed, "train",
                   evaluate(model, train_images, train_labels, config.success_radius));
            record(condition, t_stop, total, seed, "gen",
                   evaluate(model, test_images, test_labels, config.success_radius));
        };

        run_condition("org", 0, 0, false);
        for (const auto& [t_stop, total] : config.arms)
            run_condition("t" + std::to_string(t_stop) + "_T" + std::to_string(total), t_stop,
                          total, true);
    }

    for (const auto& key : cell_order) {
        const Cell& cell = cells.at(key);
        report.medians.push_back({key.first, cell.t_stop, cell.total_steps, 0, key.second,
                                  median(cell.mse), median(cell.success)});
    }
    return report;
}

}  // namespace stemob
