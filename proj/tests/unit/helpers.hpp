#pragma once

#include <filesystem>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "eegscreen/channels.hpp"
#include "eegscreen/error.hpp"
#include "eegscreen/recording.hpp"

namespace testing {

// Fresh directory under the system temp dir, removed on destruction.
struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path = std::filesystem::temp_directory_path() / ("eegscreen_" + tag + "_" + std::to_string(rd()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  std::filesystem::path operator/(const std::string& name) const { return path / name; }
};

inline eegscreen::Recording random_recording(std::size_t n, unsigned seed, double fs = 128.0) {
  eegscreen::Recording r;
  r.subject_id = "r" + std::to_string(seed);
  r.label = eegscreen::Label::Control;
  r.sample_rate_hz = fs;
  r.n_samples = n;
  r.data.resize(eegscreen::kNumChannels * n);
  std::mt19937 gen(seed);
  std::normal_distribution<double> d(0.0, 10.0);
  for (auto& v : r.data) v = d(gen);
  return r;
}

// EEG-CSV text with the given column names; values[row][col].
inline std::string csv_text(const std::string& header, const std::vector<std::string>& names,
                            const std::vector<std::vector<std::string>>& rows) {
  std::ostringstream out;
  out << header << "\n";
  for (std::size_t i = 0; i < names.size(); ++i) out << (i ? "," : "") << names[i];
  out << "\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
    out << "\n";
  }
  return out.str();
}

inline std::vector<std::string> canonical_names() {
  std::vector<std::string> out;
  for (auto c : eegscreen::kCanonicalChannels) out.emplace_back(eegscreen::channel_name(c));
  return out;
}

template <class F>
eegscreen::Errc error_code_of(F&& f) {
  try {
    f();
  } catch (const eegscreen::Error& e) {
    return e.code();
  }
  throw std::runtime_error("expected an eegscreen::Error");
}

}  // namespace testing
