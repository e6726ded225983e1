// Copyright peafsim contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace peaf {

/// Dataset index: (path, label) rows plus the ordered set of class names.
/// Serialized as a UTF-8 CSV with header `path,label`; paths are stored
/// relative to the manifest's directory.
struct DatasetManifest {
    struct Entry {
        std::string path;  // relative to base_dir
        std::string label;
    };

    std::vector<Entry> entries;
    std::vector<std::string> class_names;  // ordered, unique
    std::string base_dir;                  // directory the paths are relative to

    std::string resolve(const Entry& e) const {
        if (base_dir.empty()) return e.path;
        return (std::filesystem::path(base_dir) / e.path).string();
    }

    void validate() const {
        std::set<std::string> seen_paths;
        const std::set<std::string> classes(class_names.begin(), class_names.end());
        if (classes.size() != class_names.size())
            throw std::invalid_argument("manifest: duplicate class names");
        for (const auto& e : entries) {
            if (!classes.count(e.label))
                throw std::invalid_argument("manifest: label '" + e.label +
                                            "' not in class_names");
            if (!seen_paths.insert(e.path).second)
                throw std::invalid_argument("manifest: duplicate path '" + e.path + "'");
        }
    }
};

inline void write_manifest(const std::string& csv_path, const DatasetManifest& m) {
    std::ofstream f(csv_path, std::ios::trunc);
    if (!f) throw std::runtime_error("write_manifest: cannot open " + csv_path);
    f << "path,label\n";
    for (const auto& e : m.entries) f << e.path << "," << e.label << "\n";
    if (!f) throw std::runtime_error("write_manifest: write failed: " + csv_path);
}

inline DatasetManifest read_manifest(const std::string& csv_path) {
    std::ifstream f(csv_path);
    if (!f) throw std::runtime_error("read_manifest: cannot open " + csv_path);
    DatasetManifest m;
    m.base_dir = std::filesystem::path(csv_path).parent_path().string();

    std::string line;
    if (!std::getline(f, line)) throw std::runtime_error("read_manifest: empty file " + csv_path);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "path,label")
        throw std::runtime_error("read_manifest: bad header '" + line +
                                 "', expected 'path,label'");

    while (std::getline(f, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto comma = line.rfind(',');
        if (comma == std::string::npos)
            throw std::runtime_error("read_manifest: malformed row '" + line + "'");
        DatasetManifest::Entry e{line.substr(0, comma), line.substr(comma + 1)};
        if (std::find(m.class_names.begin(), m.class_names.end(), e.label) ==
            m.class_names.end())
            m.class_names.push_back(e.label);
        m.entries.push_back(std::move(e));
    }
    m.validate();
    return m;
}

}  // namespace peaf
