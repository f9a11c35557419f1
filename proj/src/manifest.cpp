#include "stemob/manifest.hpp"

#include <fstream>
#include <stdexcept>
#include <unordered_set>

namespace stemob {

std::string to_string(Split s) { return s == Split::train ? "train" : "test"; }

Split split_from_string(const std::string& s) {
    if (s == "train") return Split::train;
    if (s == "test") return Split::test;
    throw std::invalid_argument("unknown split '" + s + "'");
}

nlohmann::json record_to_json(const ManifestRecord& rec) {
    nlohmann::json j;
    j["id"] = rec.id;
    j["path"] = rec.path;
    if (rec.category) j["category"] = *rec.category;
    j["split"] = to_string(rec.split);
    if (!rec.label.empty()) j["label"] = rec.label;
    return j;
}

ManifestRecord record_from_json(const nlohmann::json& j) {
    ManifestRecord rec;
    rec.id = j.at("id").get<std::string>();
    rec.path = j.at("path").get<std::string>();
    if (j.contains("category")) rec.category = j.at("category").get<std::string>();
    if (j.contains("split")) rec.split = split_from_string(j.at("split").get<std::string>());
    if (j.contains("label")) rec.label = j.at("label").get<std::vector<double>>();
    return rec;
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open manifest '" + path.string() + "'");
    DatasetManifest manifest;
    manifest.base_dir = path.parent_path();
    manifest.source_path = path;

    std::unordered_set<std::string> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw std::runtime_error("manifest '" + path.string() + "' line " +
                                     std::to_string(line_no) + ": " + e.what());
        }
        if (!j.contains("id")) {
            manifest.provenance = j;
            continue;
        }
        ManifestRecord rec = record_from_json(j);
        if (!seen.insert(rec.id).second)
            throw std::runtime_error("manifest '" + path.string() + "': duplicate id '" + rec.id +
                                     "'");
        manifest.records.push_back(std::move(rec));
    }
    return manifest;
}

void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open manifest '" + path.string() + "' for writing");
    if (manifest.provenance) os << manifest.provenance->dump() << "\n";
    for (const ManifestRecord& rec : manifest.records) os << record_to_json(rec).dump() << "\n";
    if (!os) throw std::runtime_error("write failed for manifest '" + path.string() + "'");
}

}  // namespace stemob
