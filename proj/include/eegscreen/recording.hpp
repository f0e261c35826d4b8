#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "eegscreen/channels.hpp"

namespace eegscreen {

enum class Label : int { Unknown = -1, Control = 0, Adhd = 1 };

// Parses "0", "1" or "?". Throws Error(BadLabel).
Label parse_label(std::string_view text);
std::string label_token(Label label);

// A 19-channel EEG recording in microvolts. Rows are always stored in
// canonical channel order, row-major [channel][sample].
struct Recording {
  std::string subject_id;
  Label label = Label::Unknown;
  double sample_rate_hz = 128.0;
  std::size_t n_samples = 0;
  std::vector<double> data;

  std::span<const double> channel(std::size_t c) const {
    return {data.data() + c * n_samples, n_samples};
  }
  std::span<double> channel(std::size_t c) { return {data.data() + c * n_samples, n_samples}; }
  std::span<const double> channel(Channel c) const { return channel(index_of(c)); }

  double duration_s() const { return static_cast<double>(n_samples) / sample_rate_hz; }
};

// Checks shape, sample rate and finiteness. Throws Error on violation.
void validate(const Recording& rec);

// EEG-CSV v1:
//   #eegcsv v1 sample_rate_hz=<float> subject=<id> label=<0|1|?>
//   <comma-separated channel names, any order, aliases allowed>
//   <one comma-separated row of microvolt values per sample>
Recording parse_recording(std::istream& in);
Recording parse_recording(std::string_view text);
Recording load_recording(const std::filesystem::path& path);

// Writes canonical channel order with 9 significant digits (exact for f32).
void write_recording(std::ostream& out, const Recording& rec);
void save_recording(const std::filesystem::path& path, const Recording& rec);

}  // namespace eegscreen
