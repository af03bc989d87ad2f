#pragma once

#include "scenebal/box.hpp"
#include "scenebal/scene.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace scenebal {

struct ImageRecord {
    std::string id;
    std::string path;  // relative to the manifest root
    int width = 0;
    int height = 0;
    std::string split = "train";  // train | test
    Scene scene = Scene::Unknown;
    std::string provenance;  // "original" or "<source_id>:<op>"
};

struct BoxRecord {
    std::string image_id;
    Box box;
};

// Tabular dataset description: one images file, one boxes file, image paths
// resolved against `root`. Loaded from / saved to `<prefix>.images.csv` and
// `<prefix>.boxes.csv`.
struct DatasetManifest {
    std::filesystem::path root;
    std::vector<ImageRecord> images;
    std::vector<BoxRecord> boxes;

    const ImageRecord* find(const std::string& id) const;
    std::filesystem::path image_path(const ImageRecord& rec) const { return root / rec.path; }
    std::vector<BoxRecord> boxes_of(const std::string& id) const;
    std::map<std::string, Scene> scene_by_id() const;

    // Unique ids, in-bounds boxes, valid splits, provenance chains that are
    // acyclic and end at an original record.
    void validate() const;
};

DatasetManifest load_manifest(const std::filesystem::path& prefix);
void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& prefix);

}  // namespace scenebal
