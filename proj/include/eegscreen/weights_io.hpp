#pragma once

#include <filesystem>
#include <iosfwd>
#include <memory>

#include <json.hpp>

#include "eegscreen/classifier.hpp"

namespace eegscreen {

// WGTS v1: a single-line UTF-8 JSON index
//   {"format":"WGTS v1","model_config":{...},"metadata":{...},
//    "tensors":[{"name","dims","byte_offset"}, ...]}
// then the two bytes "\n\0", then the tensors as little-endian f32, each at
// its byte_offset from the start of the payload.
void write_weights(std::ostream& out, ResNet& model, const nlohmann::json& metadata = nlohmann::json::object());
void save_weights(const std::filesystem::path& path, ResNet& model,
                  const nlohmann::json& metadata = nlohmann::json::object());

struct LoadedModel {
  std::unique_ptr<ResNet> model;
  nlohmann::json metadata;
};

LoadedModel read_weights(std::istream& in);
LoadedModel load_weights(const std::filesystem::path& path);

}  // namespace eegscreen
