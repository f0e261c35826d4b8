#include "eegscreen/weights_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "eegscreen/error.hpp"

namespace eegscreen {

static_assert(std::endian::native == std::endian::little, "WGTS writer assumes a little-endian host");

void write_weights(std::ostream& out, ResNet& model, const nlohmann::json& metadata) {
  nlohmann::json tensors = nlohmann::json::array();
  std::size_t offset = 0;
  const auto named = model.named_tensors();
  for (const auto& nt : named) {
    tensors.push_back({{"name", nt.name}, {"dims", nt.tensor->dims()}, {"byte_offset", offset}});
    offset += nt.tensor->size() * sizeof(float);
  }
  const nlohmann::json index = {{"format", "WGTS v1"},
                                {"model_config", to_json(model.config())},
                                {"metadata", metadata},
                                {"tensors", tensors}};
  const std::string header = index.dump();
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  out.put('\n');
  out.put('\0');
  for (const auto& nt : named)
    out.write(reinterpret_cast<const char*>(nt.tensor->data()),
              static_cast<std::streamsize>(nt.tensor->size() * sizeof(float)));
}

void save_weights(const std::filesystem::path& path, ResNet& model, const nlohmann::json& metadata) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::Io, "cannot write " + path.string());
  write_weights(out, model, metadata);
  if (!out) throw Error(Errc::Io, "write failed: " + path.string());
}

LoadedModel read_weights(std::istream& in) {
  const std::string bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  const auto sep = bytes.find(std::string("\n\0", 2));
  if (sep == std::string::npos) throw Error(Errc::BadFormat, "WGTS index separator not found");
  nlohmann::json index;
  try {
    index = nlohmann::json::parse(bytes.substr(0, sep));
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::BadFormat, std::string("WGTS index is not JSON: ") + e.what());
  }
  if (index.value("format", std::string()) != "WGTS v1") throw Error(Errc::BadFormat, "not a WGTS v1 file");
  const std::size_t payload = sep + 2;

  LoadedModel loaded;
  loaded.model = std::make_unique<ResNet>(model_config_from_json(index.at("model_config")), 0);
  loaded.metadata = index.value("metadata", nlohmann::json::object());
  auto named = loaded.model->named_tensors();
  const auto& entries = index.at("tensors");
  if (entries.size() != named.size())
    throw Error(Errc::BadFormat, "WGTS holds " + std::to_string(entries.size()) + " tensors, model needs " +
                                     std::to_string(named.size()));
  for (std::size_t i = 0; i < named.size(); ++i) {
    const auto& e = entries[i];
    if (e.at("name").get<std::string>() != named[i].name)
      throw Error(Errc::BadFormat, "unexpected tensor " + e.at("name").get<std::string>() + ", wanted " +
                                       named[i].name);
    if (e.at("dims").get<Shape>() != named[i].tensor->dims())
      throw Error(Errc::ShapeMismatch, "tensor " + named[i].name + " has the wrong shape");
    const std::size_t off = payload + e.at("byte_offset").get<std::size_t>();
    const std::size_t len = named[i].tensor->size() * sizeof(float);
    if (off + len > bytes.size()) throw Error(Errc::BadFormat, "WGTS payload truncated at " + named[i].name);
    std::memcpy(named[i].tensor->data(), bytes.data() + off, len);
  }
  return loaded;
}

LoadedModel load_weights(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::MissingFile, path.string());
  return read_weights(in);
}

}  // namespace eegscreen
