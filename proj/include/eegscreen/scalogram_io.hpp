#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "eegscreen/cwt.hpp"

namespace eegscreen {

// SCLG v1 layout:
//   bytes 0-7   "SCLG0001"
//   3 x u32 LE  channels, scales, time bins
//   c*s*t f32 LE values in [channel][scale][time] order
//   UTF-8 JSON footer {subject_id, label, segment_index, freqs_hz} to EOF
void write_scalogram(std::ostream& out, const Scalogram& s);
Scalogram read_scalogram(std::istream& in);

void save_scalogram(const std::filesystem::path& path, const Scalogram& s);
Scalogram load_scalogram(const std::filesystem::path& path);

// "<subject>_<segment index, 4 digits>.sclg"
std::string scalogram_filename(const Scalogram& s);

// Loads every *.sclg file in a directory, sorted by (subject, segment index).
std::vector<Scalogram> load_scalogram_dir(const std::filesystem::path& dir);

}  // namespace eegscreen
