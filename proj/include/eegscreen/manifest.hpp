#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "eegscreen/recording.hpp"

namespace eegscreen {

struct ManifestEntry {
  std::filesystem::path path;  // resolved against the manifest's directory
  std::string subject_id;
  Label label = Label::Control;
};

struct DatasetManifest {
  std::vector<ManifestEntry> entries;
};

// JSON document {"entries": [{"path", "subject_id", "label"}, ...]}.
// Relative paths resolve against the manifest file's directory.
// Throws Error(DuplicateSubject | MissingFile | BadLabel | BadFormat).
DatasetManifest load_manifest(const std::filesystem::path& path);
DatasetManifest parse_manifest(const std::string& json_text, const std::filesystem::path& base_dir,
                               bool check_files = true);

// Writes paths relative to the manifest's directory when possible.
void save_manifest(const std::filesystem::path& path, const DatasetManifest& manifest);

}  // namespace eegscreen
