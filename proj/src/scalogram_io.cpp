#include "eegscreen/scalogram_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <iterator>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "eegscreen/error.hpp"

namespace eegscreen {

namespace {

constexpr std::array<char, 8> kMagic = {'S', 'C', 'L', 'G', '0', '0', '0', '1'};

static_assert(std::endian::native == std::endian::little, "SCLG writer assumes a little-endian host");

void put_u32(std::ostream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

std::uint32_t get_u32(std::istream& in) {
  std::uint32_t v = 0;
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) throw Error(Errc::BadFormat, "truncated SCLG header");
  return v;
}

}  // namespace

void write_scalogram(std::ostream& out, const Scalogram& s) {
  if (s.values.size() != s.n_channels * s.n_scales * s.n_times)
    throw Error(Errc::ShapeMismatch, "scalogram values do not match its dimensions");
  out.write(kMagic.data(), kMagic.size());
  put_u32(out, static_cast<std::uint32_t>(s.n_channels));
  put_u32(out, static_cast<std::uint32_t>(s.n_scales));
  put_u32(out, static_cast<std::uint32_t>(s.n_times));
  out.write(reinterpret_cast<const char*>(s.values.data()),
            static_cast<std::streamsize>(s.values.size() * sizeof(float)));
  nlohmann::json footer = {{"subject_id", s.subject_id},
                           {"label", static_cast<int>(s.label)},
                           {"segment_index", s.segment_index},
                           {"freqs_hz", s.freqs_hz}};
  out << footer.dump();
}

Scalogram read_scalogram(std::istream& in) {
  std::array<char, 8> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic) throw Error(Errc::BadFormat, "not an SCLG0001 file");
  Scalogram s;
  s.n_channels = get_u32(in);
  s.n_scales = get_u32(in);
  s.n_times = get_u32(in);
  const std::size_t count = s.n_channels * s.n_scales * s.n_times;
  if (count == 0 || count > (std::size_t{1} << 30)) throw Error(Errc::BadFormat, "implausible SCLG dimensions");
  s.values.resize(count);
  if (!in.read(reinterpret_cast<char*>(s.values.data()), static_cast<std::streamsize>(count * sizeof(float))))
    throw Error(Errc::BadFormat, "truncated SCLG payload");
  const std::string footer_text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  try {
    const auto footer = nlohmann::json::parse(footer_text);
    s.subject_id = footer.at("subject_id").get<std::string>();
    const int label = footer.at("label").get<int>();
    if (label < -1 || label > 1) throw Error(Errc::BadLabel, std::to_string(label));
    s.label = static_cast<Label>(label);
    s.segment_index = footer.at("segment_index").get<std::size_t>();
    s.freqs_hz = footer.at("freqs_hz").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::BadFormat, std::string("bad SCLG footer: ") + e.what());
  }
  if (s.freqs_hz.size() != s.n_scales) throw Error(Errc::BadFormat, "freqs_hz length differs from scale count");
  return s;
}

void save_scalogram(const std::filesystem::path& path, const Scalogram& s) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::Io, "cannot write " + path.string());
  write_scalogram(out, s);
  if (!out) throw Error(Errc::Io, "write failed: " + path.string());
}

Scalogram load_scalogram(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::MissingFile, path.string());
  return read_scalogram(in);
}

std::string scalogram_filename(const Scalogram& s) {
  std::ostringstream name;
  name << s.subject_id << '_' << std::setw(4) << std::setfill('0') << s.segment_index << ".sclg";
  return name.str();
}

std::vector<Scalogram> load_scalogram_dir(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw Error(Errc::MissingFile, dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".sclg") files.push_back(entry.path());
  }
  std::vector<Scalogram> out;
  out.reserve(files.size());
  for (const auto& f : files) out.push_back(load_scalogram(f));
  std::sort(out.begin(), out.end(), [](const Scalogram& a, const Scalogram& b) {
    return std::tie(a.subject_id, a.segment_index) < std::tie(b.subject_id, b.segment_index);
  });
  return out;
}

}  // namespace eegscreen
