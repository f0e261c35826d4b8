#include "eegscreen/segment.hpp"

#include <algorithm>
#include <cmath>

#include "eegscreen/error.hpp"

namespace eegscreen {

namespace {

std::size_t to_samples(double seconds, double rate, const char* what) {
  if (!(seconds > 0.0) || !std::isfinite(seconds))
    throw Error(Errc::BadConfig, std::string(what) + " must be positive");
  const auto n = static_cast<std::size_t>(std::llround(seconds * rate));
  if (n == 0) throw Error(Errc::BadConfig, std::string(what) + " is shorter than one sample");
  return n;
}

}  // namespace

std::size_t window_samples(const SegmentConfig& cfg, double sample_rate_hz) {
  return to_samples(cfg.window_s, sample_rate_hz, "window_s");
}

std::size_t hop_samples(const SegmentConfig& cfg, double sample_rate_hz) {
  return to_samples(cfg.hop_s, sample_rate_hz, "hop_s");
}

std::size_t segment_count(std::size_t n_samples, std::size_t window, std::size_t hop) {
  if (n_samples < window || hop == 0) return 0;
  return (n_samples - window) / hop + 1;
}

void check_segmentable(const Recording& rec, const SegmentConfig& cfg) {
  const std::size_t w = window_samples(cfg, rec.sample_rate_hz);
  if (rec.n_samples < w)
    throw Error(Errc::InsufficientLength,
                "recording " + rec.subject_id + " lasts " + std::to_string(rec.duration_s()) +
                    " s, window is " + std::to_string(cfg.window_s) + " s");
}

std::vector<Segment> segment(const Recording& rec, const SegmentConfig& cfg) {
  check_segmentable(rec, cfg);
  const std::size_t w = window_samples(cfg, rec.sample_rate_hz);
  const std::size_t h = hop_samples(cfg, rec.sample_rate_hz);
  const std::size_t count = segment_count(rec.n_samples, w, h);
  std::vector<Segment> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    Segment seg;
    seg.subject_id = rec.subject_id;
    seg.label = rec.label;
    seg.segment_index = k;
    seg.start_sample = k * h;
    seg.sample_rate_hz = rec.sample_rate_hz;
    seg.n_samples = w;
    seg.data.resize(kNumChannels * w);
    for (std::size_t c = 0; c < kNumChannels; ++c) {
      const auto src = rec.channel(c).subspan(seg.start_sample, w);
      std::copy(src.begin(), src.end(), seg.channel(c).begin());
    }
    out.push_back(std::move(seg));
  }
  return out;
}

}  // namespace eegscreen
