#pragma once

#include <string>
#include <vector>

namespace cgtrace {

enum class Split { train, val, test };

std::string split_name(Split s);
Split split_from_name(const std::string& name);

struct ManifestRecord {
    std::string path;  // relative to the manifest's directory
    int label = 0;     // CG = 1, PG = 0
    Split split = Split::train;
};

struct DatasetManifest {
    std::string root;  // directory the record paths are relative to
    std::vector<ManifestRecord> records;

    std::vector<ManifestRecord> split_records(Split s) const;
    std::string resolve(const ManifestRecord& rec) const;
};

// CSV with header `path,label,split`. Loading verifies every referenced
// file exists and each referenced split is nonempty.
DatasetManifest load_manifest(const std::string& path);
void save_manifest(const DatasetManifest& manifest, const std::string& path);

}  // namespace cgtrace
