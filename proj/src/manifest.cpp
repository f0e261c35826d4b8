#include "eegscreen/manifest.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "eegscreen/error.hpp"

namespace eegscreen {

using nlohmann::json;

DatasetManifest parse_manifest(const std::string& json_text, const std::filesystem::path& base_dir,
                               bool check_files) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(Errc::BadFormat, std::string("manifest is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("entries") || !doc["entries"].is_array())
    throw Error(Errc::BadFormat, "manifest needs a top-level 'entries' array");

  DatasetManifest manifest;
  std::set<std::string> seen;
  for (const auto& item : doc["entries"]) {
    if (!item.is_object() || !item.contains("path") || !item.contains("subject_id") ||
        !item.contains("label"))
      throw Error(Errc::BadFormat, "entry needs path, subject_id and label");
    if (!item["path"].is_string() || !item["subject_id"].is_string())
      throw Error(Errc::BadFormat, "path and subject_id must be strings");
    ManifestEntry entry;
    entry.subject_id = item["subject_id"].get<std::string>();
    const auto& label = item["label"];
    if (label.is_number_integer() && (label.get<int>() == 0 || label.get<int>() == 1)) {
      entry.label = static_cast<Label>(label.get<int>());
    } else {
      throw Error(Errc::BadLabel, entry.subject_id + ": label must be 0 or 1, got " + label.dump());
    }
    if (!seen.insert(entry.subject_id).second) throw Error(Errc::DuplicateSubject, entry.subject_id);
    std::filesystem::path p = item["path"].get<std::string>();
    entry.path = p.is_absolute() ? p : base_dir / p;
    if (check_files && !std::filesystem::exists(entry.path))
      throw Error(Errc::MissingFile, entry.path.string());
    manifest.entries.push_back(std::move(entry));
  }
  return manifest;
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::MissingFile, path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_manifest(buf.str(), path.parent_path());
}

void save_manifest(const std::filesystem::path& path, const DatasetManifest& manifest) {
  json entries = json::array();
  const auto base = path.parent_path();
  for (const auto& e : manifest.entries) {
    auto rel = e.path.lexically_relative(base.empty() ? std::filesystem::path(".") : base);
    if (rel.empty() || rel.native().starts_with("..")) rel = e.path;
    entries.push_back({{"path", rel.generic_string()},
                       {"subject_id", e.subject_id},
                       {"label", static_cast<int>(e.label)}});
  }
  std::ofstream out(path);
  if (!out) throw Error(Errc::Io, "cannot write " + path.string());
  out << json{{"entries", entries}}.dump(2) << '\n';
}

}  // namespace eegscreen
