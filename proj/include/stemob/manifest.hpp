#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace stemob {

enum class Split { train, test };

std::string to_string(Split s);
Split split_from_string(const std::string& s);

struct ManifestRecord {
    std::string id;
    std::string path;  // relative to the manifest's directory
    std::optional<std::string> category;
    Split split = Split::train;
    std::vector<double> label;
};

// One JSON object per line. A line without an "id" key is treated as the
// manifest-level provenance object (the pipeline embeds its configuration
// there so a run can be reproduced from the manifest alone).
struct DatasetManifest {
    std::filesystem::path base_dir;
    std::filesystem::path source_path;  // where the manifest was loaded from, if anywhere
    std::vector<ManifestRecord> records;
    std::optional<nlohmann::json> provenance;

    std::filesystem::path resolve(const ManifestRecord& rec) const { return base_dir / rec.path; }
};

DatasetManifest load_manifest(const std::filesystem::path& path);
void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);

nlohmann::json record_to_json(const ManifestRecord& rec);
ManifestRecord record_from_json(const nlohmann::json& j);

}  // namespace stemob
