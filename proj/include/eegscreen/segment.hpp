#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "eegscreen/recording.hpp"

namespace eegscreen {

struct SegmentConfig {
  double window_s = 3.0;
  double hop_s = 1.0;  // adjacent 3 s windows share 2 s
};

// One fixed-length window of a recording, [19 x n_samples] row-major.
struct Segment {
  std::string subject_id;
  Label label = Label::Unknown;
  std::size_t segment_index = 0;
  std::size_t start_sample = 0;
  double sample_rate_hz = 128.0;
  std::size_t n_samples = 0;
  std::vector<double> data;

  std::span<const double> channel(std::size_t c) const {
    return {data.data() + c * n_samples, n_samples};
  }
  std::span<double> channel(std::size_t c) { return {data.data() + c * n_samples, n_samples}; }
};

std::size_t window_samples(const SegmentConfig& cfg, double sample_rate_hz);
std::size_t hop_samples(const SegmentConfig& cfg, double sample_rate_hz);

// floor((N - W) / H) + 1, or 0 when N < W.
std::size_t segment_count(std::size_t n_samples, std::size_t window, std::size_t hop);

// Throws Error(InsufficientLength) if the recording is shorter than a window.
void check_segmentable(const Recording& rec, const SegmentConfig& cfg = {});

// Slices the recording into windows starting at multiples of the hop; a
// trailing partial window is dropped.
std::vector<Segment> segment(const Recording& rec, const SegmentConfig& cfg = {});

}  // namespace eegscreen
