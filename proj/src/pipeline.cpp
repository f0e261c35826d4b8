#include "eegscreen/pipeline.hpp"

#include "eegscreen/error.hpp"
#include "eegscreen/parallel.hpp"

namespace eegscreen {

nlohmann::json to_json(const PipelineConfig& cfg) {
  return {{"low_hz", cfg.low_hz},
          {"high_hz", cfg.high_hz},
          {"window_s", cfg.segments.window_s},
          {"hop_s", cfg.segments.hop_s},
          {"wavelet", "complex_morlet"},
          {"omega0", cfg.wavelet.omega0},
          {"n_scales", cfg.n_scales}};
}

PipelineConfig pipeline_config_from_json(const nlohmann::json& j) {
  PipelineConfig cfg;
  try {
    cfg.low_hz = j.value("low_hz", cfg.low_hz);
    cfg.high_hz = j.value("high_hz", cfg.high_hz);
    cfg.segments.window_s = j.value("window_s", cfg.segments.window_s);
    cfg.segments.hop_s = j.value("hop_s", cfg.segments.hop_s);
    cfg.wavelet.omega0 = j.value("omega0", cfg.wavelet.omega0);
    cfg.n_scales = j.value("n_scales", cfg.n_scales);
    if (j.value("wavelet", std::string("complex_morlet")) != "complex_morlet")
      throw Error(Errc::BadConfig, "unsupported wavelet");
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::BadFormat, std::string("bad pipeline config: ") + e.what());
  }
  return cfg;
}

ScaleGrid scale_grid(const PipelineConfig& cfg) {
  return make_scale_grid(cfg.n_scales, cfg.low_hz, cfg.high_hz, cfg.wavelet);
}

std::vector<Segment> preprocess_recording(const Recording& rec, const PipelineConfig& cfg) {
  validate(rec);
  check_segmentable(rec, cfg.segments);
  const FilterSpec spec = design_bandpass(rec.sample_rate_hz, cfg.low_hz, cfg.high_hz);
  return segment(apply_filter(rec, spec), cfg.segments);
}

std::vector<Scalogram> scalograms_from_segments(const std::vector<Segment>& segments,
                                                const PipelineConfig& cfg) {
  const ScaleGrid grid = scale_grid(cfg);
  std::vector<Scalogram> out(segments.size());
  parallel_for(segments.size(),
               [&](std::size_t i) { out[i] = scalogram_from_segment(segments[i], cfg.wavelet, grid); });
  return out;
}

std::vector<Scalogram> scalograms_from_recording(const Recording& rec, const PipelineConfig& cfg) {
  return scalograms_from_segments(preprocess_recording(rec, cfg), cfg);
}

}  // namespace eegscreen
