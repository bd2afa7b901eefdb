#include "cgtrace/manifest.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cgtrace/errors.hpp"

namespace fs = std::filesystem;

namespace cgtrace {

std::string split_name(Split s) {
    switch (s) {
        case Split::train: return "train";
        case Split::val: return "val";
        case Split::test: return "test";
    }
    return "?";
}

Split split_from_name(const std::string& name) {
    if (name == "train") return Split::train;
    if (name == "val") return Split::val;
    if (name == "test") return Split::test;
    throw InputError("unknown split name: " + name);
}

std::vector<ManifestRecord> DatasetManifest::split_records(Split s) const {
    std::vector<ManifestRecord> out;
    for (const auto& r : records)
        if (r.split == s) out.push_back(r);
    return out;
}

std::string DatasetManifest::resolve(const ManifestRecord& rec) const {
    if (fs::path(rec.path).is_absolute()) return rec.path;
    return (fs::path(root) / rec.path).string();
}

DatasetManifest load_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open manifest " + path);
    DatasetManifest m;
    m.root = fs::path(path).parent_path().string();
    if (m.root.empty()) m.root = ".";
    std::string line;
    if (!std::getline(in, line)) throw IoError("empty manifest " + path);
    if (line != "path,label,split")
        throw InputError("manifest header must be `path,label,split`, got: " + line);
    size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream row(line);
        ManifestRecord rec;
        std::string label_str, split_str;
        if (!std::getline(row, rec.path, ',') || !std::getline(row, label_str, ',') ||
            !std::getline(row, split_str))
            throw InputError("malformed manifest row " + std::to_string(lineno));
        if (label_str != "0" && label_str != "1")
            throw InputError("manifest label must be 0 or 1 at row " + std::to_string(lineno));
        rec.label = label_str == "1" ? 1 : 0;
        rec.split = split_from_name(split_str);
        if (!fs::exists(m.resolve(rec)))
            throw IoError("manifest references missing file: " + m.resolve(rec));
        m.records.push_back(std::move(rec));
    }
    if (m.records.empty()) throw InputError("manifest has no records: " + path);
    return m;
}

void save_manifest(const DatasetManifest& manifest, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write manifest " + path);
    out << "path,label,split\n";
    for (const auto& r : manifest.records)
        out << r.path << "," << r.label << "," << split_name(r.split) << "\n";
    if (!out) throw IoError("short write to manifest " + path);
}

}  // namespace cgtrace
