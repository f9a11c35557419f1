#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <map>

#include "stemob/analysis.hpp"
#include "stemob/attribute.hpp"
#include "stemob/experiment.hpp"
#include "stemob/image_io.hpp"
#include "stemob/pipeline.hpp"
#include "stemob/tensor_io.hpp"

namespace {

using namespace stemob;

struct ScheduleFlags {
    std::string kind = "cosine";
    int total = 50;
    double beta_start = 1e-4;
    double beta_end = 0.02;
    double offset = 0.008;
    double max_beta = 0.999;

    void attach(CLI::App* app) {
        app->add_option("--schedule", kind, "Schedule kind: cosine or linear")
            ->check(CLI::IsMember({"cosine", "linear"}));
        app->add_option("--total", total, "Total diffusion steps T");
        app->add_option("--beta-start", beta_start, "Linear schedule start beta");
        app->add_option("--beta-end", beta_end, "Linear schedule end beta");
        app->add_option("--offset", offset, "Cosine schedule offset");
        app->add_option("--max-beta", max_beta, "Cosine schedule beta cap");
    }

    ScheduleSpec spec() const {
        ScheduleSpec s;
        s.kind = schedule_kind_from_string(kind);
        s.beta_start = beta_start;
        s.beta_end = beta_end;
        s.cosine_offset = offset;
        s.max_beta = max_beta;
        return s;
    }
};

Latent load_any(const std::filesystem::path& path) {
    return path.extension() == ".png" ? load_image_as_latent(path) : read_tensor(path);
}

std::ostream& open_out(std::ofstream& file, const std::string& out) {
    if (out.empty()) return std::cout;
    file.open(out);
    if (!file) throw std::runtime_error("cannot open '" + out + "' for writing");
    return file;
}

std::vector<std::pair<int, int>> parse_pairs(const std::string& text) {
    std::vector<std::pair<int, int>> pairs;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const std::size_t comma = text.find(',', pos);
        const std::string item = text.substr(pos, comma == std::string::npos ? comma : comma - pos);
        const std::size_t slash = item.find('/');
        if (slash == std::string::npos)
            throw CLI::ValidationError("--pairs", "expected t/T entries like 5/50");
        pairs.emplace_back(std::stoi(item.substr(0, slash)), std::stoi(item.substr(slash + 1)));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    if (pairs.empty()) throw CLI::ValidationError("--pairs", "no step pairs given");
    return pairs;
}

CategorizedSet load_categorized(const DatasetManifest& manifest) {
    std::map<std::string, std::vector<Latent>> by_category;
    for (const ManifestRecord& rec : manifest.records) {
        if (!rec.category)
            throw std::runtime_error("record '" + rec.id + "' is missing a category label");
        by_category[*rec.category].push_back(load_any(manifest.resolve(rec)));
    }
    CategorizedSet set;
    for (auto& [name, images] : by_category) {
        set.categories.push_back(name);
        set.images.push_back(std::move(images));
    }
    return set;
}

int report_failures(const InvertResult& result) {
    for (const RecordFailure& f : result.failures)
        std::cerr << "record '" << f.id << "' failed: " << f.message << "\n";
    if (!result.ok()) {
        std::cerr << result.failures.size() << " record(s) failed; partial manifest at "
                  << result.manifest_path << "\n";
        return 2;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Diffusion-inversion preprocessing for visual imitation learning"};
    app.require_subcommand(1);

    // schedule dump
    auto* schedule_cmd = app.add_subcommand("schedule", "Noise schedule utilities");
    schedule_cmd->require_subcommand(1);
    auto* dump_cmd = schedule_cmd->add_subcommand("dump", "Emit the schedule tables as CSV");
    ScheduleFlags dump_flags;
    dump_flags.attach(dump_cmd);
    std::string dump_out;
    dump_cmd->add_option("--out", dump_out, "Output file (default stdout)");

    // invert
    auto* invert_cmd = app.add_subcommand("invert", "Preprocess a dataset by partial inversion");
    std::string invert_manifest, invert_method = "ddpm", invert_format = "tensor", invert_out;
    int invert_steps = 15, invert_workers = 1;
    std::uint64_t invert_seed = 0;
    ScheduleFlags invert_flags;
    invert_cmd->add_option("--manifest", invert_manifest, "Input manifest (JSONL)")->required();
    invert_cmd->add_option("--steps", invert_steps, "Inversion depth t");
    invert_cmd->add_option("--method", invert_method)->check(CLI::IsMember({"ddpm", "ddim"}));
    invert_cmd->add_option("--seed", invert_seed, "Noise seed");
    invert_cmd->add_option("--workers", invert_workers, "Worker threads");
    invert_cmd->add_option("--format", invert_format)->check(CLI::IsMember({"png", "tensor"}));
    invert_cmd->add_option("--out", invert_out, "Output directory")->required();
    invert_flags.attach(invert_cmd);

    // sweep
    auto* sweep_cmd = app.add_subcommand("sweep", "Run the inversion over several t/T pairs");
    std::string sweep_manifest, sweep_pairs, sweep_method = "ddpm", sweep_format = "tensor",
                sweep_out;
    int sweep_workers = 1;
    std::uint64_t sweep_seed = 0;
    ScheduleFlags sweep_flags;
    sweep_cmd->add_option("--manifest", sweep_manifest)->required();
    sweep_cmd->add_option("--pairs", sweep_pairs, "Comma-separated t/T pairs, e.g. 5/50,10/50")
        ->required();
    sweep_cmd->add_option("--method", sweep_method)->check(CLI::IsMember({"ddpm", "ddim"}));
    sweep_cmd->add_option("--seed", sweep_seed);
    sweep_cmd->add_option("--workers", sweep_workers);
    sweep_cmd->add_option("--format", sweep_format)->check(CLI::IsMember({"png", "tensor"}));
    sweep_cmd->add_option("--out", sweep_out)->required();
    sweep_flags.attach(sweep_cmd);

    // grid
    auto* grid_cmd = app.add_subcommand("grid", "Render an inversion strip for one image");
    std::string grid_image, grid_steps_text = "5,10,15,20,25,30,35,40,45,50", grid_out;
    std::uint64_t grid_seed = 0;
    ScheduleFlags grid_flags;
    grid_cmd->add_option("--image", grid_image, "Input PNG")->required();
    grid_cmd->add_option("--steps", grid_steps_text, "Comma-separated inversion depths");
    grid_cmd->add_option("--seed", grid_seed);
    grid_cmd->add_option("--out", grid_out, "Output PNG")->required();
    grid_flags.attach(grid_cmd);

    // attr-loss
    auto* attr_cmd = app.add_subcommand("attr-loss", "Attribute-loss curve for an image pair");
    std::string attr_x, attr_y, attr_method = "ddpm", attr_out;
    double attr_rho = 0.4;
    ScheduleFlags attr_flags;
    attr_cmd->add_option("--x", attr_x, "First image (PNG or tensor)")->required();
    attr_cmd->add_option("--y", attr_y, "Second image")->required();
    attr_cmd->add_option("--method", attr_method)->check(CLI::IsMember({"ddpm", "ddim"}));
    attr_cmd->add_option("--rho", attr_rho, "Crossing threshold in [0, 0.5)");
    attr_cmd->add_option("--out", attr_out, "Output file (default stdout)");
    attr_flags.attach(attr_cmd);

    // analyze
    auto* analyze_cmd = app.add_subcommand("analyze", "Dataset-level distance analyses");
    analyze_cmd->require_subcommand(1);
    auto* dist_cmd = analyze_cmd->add_subcommand("distances", "Intra/cross category distances");
    std::string dist_manifest, dist_out;
    dist_cmd->add_option("--manifest", dist_manifest)->required();
    dist_cmd->add_option("--out", dist_out, "Output CSV (default stdout)");
    auto* curve_cmd = analyze_cmd->add_subcommand("curve", "Indistinguishability curve");
    std::string curve_manifest, curve_method = "ddpm", curve_out;
    double curve_rho = 0.4;
    ScheduleFlags curve_flags;
    curve_cmd->add_option("--manifest", curve_manifest)->required();
    curve_cmd->add_option("--rho", curve_rho);
    curve_cmd->add_option("--method", curve_method)->check(CLI::IsMember({"ddpm", "ddim"}));
    curve_cmd->add_option("--out", curve_out, "Output CSV (default stdout)");
    curve_flags.attach(curve_cmd);

    // harness
    auto* harness_cmd = app.add_subcommand("harness", "Robustness experiment");
    harness_cmd->require_subcommand(1);
    auto* run_cmd = harness_cmd->add_subcommand("run", "Run the train-inverted/test-original "
                                                       "comparison");
    std::string harness_config_path, harness_out;
    run_cmd->add_option("--config", harness_config_path, "JSON config (defaults when omitted)");
    run_cmd->add_option("--out", harness_out, "Output directory")->required();

    // dataset
    auto* dataset_cmd = app.add_subcommand("dataset", "Generate the synthetic datasets");
    dataset_cmd->require_subcommand(1);
    auto* scenes_cmd = dataset_cmd->add_subcommand("scenes", "Positioned-square scenes with "
                                                             "train/test appearance pools");
    int scenes_n = 100, scenes_size = 32;
    std::uint64_t scenes_seed = 1;
    std::string scenes_out;
    scenes_cmd->add_option("--n", scenes_n, "Record count");
    scenes_cmd->add_option("--size", scenes_size, "Image side length");
    scenes_cmd->add_option("--seed", scenes_seed);
    scenes_cmd->add_option("--out", scenes_out, "Output directory")->required();
    auto* categories_cmd =
        dataset_cmd->add_subcommand("categories", "Five shape categories with appearance "
                                                  "variation inside each");
    int cat_per = 8, cat_size = 32;
    std::uint64_t cat_seed = 1;
    std::string cat_out;
    categories_cmd->add_option("--per", cat_per, "Images per category");
    categories_cmd->add_option("--size", cat_size, "Image side length");
    categories_cmd->add_option("--seed", cat_seed);
    categories_cmd->add_option("--out", cat_out, "Output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return e.get_exit_code() == 0 ? 0 : 1;
    }

    try {
        if (dump_cmd->parsed()) {
            std::ofstream file;
            dump_flags.spec().build(dump_flags.total).dump_csv(open_out(file, dump_out));
            return 0;
        }

        if (invert_cmd->parsed()) {
            PipelineConfig config;
            config.inversion.method = inversion_method_from_string(invert_method);
            config.inversion.t_stop = invert_steps;
            config.inversion.total_steps = invert_flags.total;
            config.inversion.seed = invert_seed;
            config.schedule = invert_flags.spec();
            config.out_dir = invert_out;
            config.workers = invert_workers;
            config.format = output_format_from_string(invert_format);
            return report_failures(run_invert(load_manifest(invert_manifest), config));
        }

        if (sweep_cmd->parsed()) {
            PipelineConfig config;
            config.inversion.method = inversion_method_from_string(sweep_method);
            config.inversion.seed = sweep_seed;
            config.schedule = sweep_flags.spec();
            config.out_dir = sweep_out;
            config.workers = sweep_workers;
            config.format = output_format_from_string(sweep_format);
            int status = 0;
            for (const InvertResult& result :
                 run_sweep(load_manifest(sweep_manifest), config, parse_pairs(sweep_pairs)))
                status = std::max(status, report_failures(result));
            return status;
        }

        if (grid_cmd->parsed()) {
            std::vector<int> steps;
            for (const auto& part : CLI::detail::split(grid_steps_text, ','))
                steps.push_back(std::stoi(part));
            const NoiseSchedule schedule = grid_flags.spec().build(grid_flags.total);
            emit_inversion_grid(load_image_as_latent(grid_image), schedule, steps, grid_seed,
                                stable_hash64(grid_image), grid_out);
            return 0;
        }

        if (attr_cmd->parsed()) {
            const Latent x = load_any(attr_x);
            const Latent y = load_any(attr_y);
            const NoiseSchedule schedule = attr_flags.spec().build(attr_flags.total);
            const LossMethod method = loss_method_from_string(attr_method);
            const LossCurve curve = loss_curve(x, y, schedule, method);
            std::ofstream file;
            std::ostream& os = open_out(file, attr_out);
            os << "t,loss\n";
            char buf[64];
            for (std::size_t i = 0; i < curve.steps.size(); ++i) {
                std::snprintf(buf, sizeof(buf), "%d,%.17g\n", curve.steps[i], curve.losses[i]);
                os << buf;
            }
            const auto crossing = tau(x, y, schedule, attr_rho, method);
            os << "tau," << (crossing ? std::to_string(*crossing) : "none") << "\n";
            return 0;
        }

        if (dist_cmd->parsed()) {
            const DistanceMatrix matrix =
                build_distance_matrix(load_categorized(load_manifest(dist_manifest)));
            std::ofstream file;
            matrix.write_csv(open_out(file, dist_out));
            return 0;
        }

        if (curve_cmd->parsed()) {
            const CategorizedSet set = load_categorized(load_manifest(curve_manifest));
            const NoiseSchedule schedule = curve_flags.spec().build(curve_flags.total);
            const IndistinguishabilityCurve curve =
                indistinguishability_curve(make_tagged_pairs(set), schedule, curve_rho,
                                           loss_method_from_string(curve_method));
            std::ofstream file;
            curve.write_csv(open_out(file, curve_out));
            return 0;
        }

        if (scenes_cmd->parsed()) {
            generate_dataset(scenes_n, default_texture_pool(), default_tint_pool(), scenes_seed,
                             scenes_out, scenes_size);
            std::cout << "wrote " << scenes_n << " records to " << scenes_out
                      << "/manifest.jsonl\n";
            return 0;
        }

        if (categories_cmd->parsed()) {
            const CategorizedSet set = make_category_set(cat_size, cat_per, cat_seed);
            write_category_dataset(set, cat_out);
            std::cout << "wrote " << set.categories.size() << " categories to " << cat_out
                      << "/manifest.jsonl\n";
            return 0;
        }

        if (run_cmd->parsed()) {
            HarnessConfig config;
            if (!harness_config_path.empty()) {
                std::ifstream is(harness_config_path);
                if (!is)
                    throw std::runtime_error("cannot open config '" + harness_config_path + "'");
                config = harness_config_from_json(nlohmann::json::parse(is));
            }
            const HarnessReport report = robustness_experiment(config);
            std::filesystem::create_directories(harness_out);
            {
                std::ofstream os(std::filesystem::path(harness_out) / "report.csv");
                report.write_csv(os);
            }
            {
                std::ofstream os(std::filesystem::path(harness_out) / "report_median.csv");
                report.write_median_csv(os);
            }
            {
                std::ofstream os(std::filesystem::path(harness_out) / "config.json");
                os << harness_config_to_json(config).dump(2) << "\n";
            }
            std::cout << "report written to " << harness_out << "/report.csv\n";
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
