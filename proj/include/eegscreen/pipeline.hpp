#pragma once

#include <vector>

#include <json.hpp>

#include "eegscreen/cwt.hpp"
#include "eegscreen/filter.hpp"
#include "eegscreen/recording.hpp"
#include "eegscreen/segment.hpp"

namespace eegscreen {

// Everything needed to turn a raw recording into model inputs. Stored next to
// trained weights so inference reproduces the training-time transform.
struct PipelineConfig {
  double low_hz = 1.0;
  double high_hz = 30.0;
  SegmentConfig segments;
  WaveletSpec wavelet;
  std::size_t n_scales = 64;
};

nlohmann::json to_json(const PipelineConfig& cfg);
PipelineConfig pipeline_config_from_json(const nlohmann::json& j);

ScaleGrid scale_grid(const PipelineConfig& cfg);

// Length check, band-pass, then segmentation. The length check runs first so
// short uploads report InsufficientLength rather than a filter error.
std::vector<Segment> preprocess_recording(const Recording& rec, const PipelineConfig& cfg);

// Converts segments in parallel (see parallel_for); output order matches input.
std::vector<Scalogram> scalograms_from_segments(const std::vector<Segment>& segments,
                                                const PipelineConfig& cfg);

std::vector<Scalogram> scalograms_from_recording(const Recording& rec, const PipelineConfig& cfg);

}  // namespace eegscreen
