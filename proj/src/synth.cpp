#include "eegscreen/synth.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>

#include "eegscreen/error.hpp"
#include "eegscreen/rng.hpp"

namespace eegscreen {

std::string synth_subject_id(std::size_t index) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "s%03zu", index + 1);
  return buf;
}

Recording synthesize_recording(const std::string& subject_id, Label label, const SynthConfig& cfg,
                               std::uint64_t seed) {
  if (!(cfg.duration_s > 0.0) || !(cfg.sample_rate_hz > 0.0))
    throw Error(Errc::BadConfig, "duration and sample rate must be positive");
  SplitMix64 rng(seed);
  Recording rec;
  rec.subject_id = subject_id;
  rec.label = label;
  rec.sample_rate_hz = cfg.sample_rate_hz;
  rec.n_samples = static_cast<std::size_t>(std::llround(cfg.duration_s * cfg.sample_rate_hz));
  rec.data.assign(kNumChannels * rec.n_samples, 0.0);

  const double two_pi = 2.0 * std::numbers::pi;
  const double dt = 1.0 / cfg.sample_rate_hz;
  const double alpha_hz = rng.uniform(9.5, 11.5);
  const double signal_hz = cfg.signal_hz + rng.uniform(-0.25, 0.25);
  const double ar = 0.9;
  const double ar_gain = std::sqrt(1.0 - ar * ar);

  std::vector<bool> carries_signal(kNumChannels, false);
  if (label == Label::Adhd) {
    for (Channel c : cfg.signal_channels) carries_signal[index_of(c)] = true;
  }

  for (std::size_t c = 0; c < kNumChannels; ++c) {
    auto row = rec.channel(c);
    const double background_uv = rng.uniform(8.0, 12.0);
    const double alpha_uv = rng.uniform(2.0, 5.0);
    const double alpha_phase = rng.uniform(0.0, two_pi);
    const double signal_uv = cfg.signal_amplitude_uv * rng.uniform(0.7, 1.3);
    const double signal_phase = rng.uniform(0.0, two_pi);
    double state = rng.normal();
    for (std::size_t i = 0; i < rec.n_samples; ++i) {
      const double t = static_cast<double>(i) * dt;
      state = ar * state + ar_gain * rng.normal();
      double v = background_uv * state + 2.0 * rng.normal() +
                 alpha_uv * std::sin(two_pi * alpha_hz * t + alpha_phase);
      if (carries_signal[c]) v += signal_uv * std::sin(two_pi * signal_hz * t + signal_phase);
      row[i] = v;
    }
  }
  return rec;
}

std::vector<Recording> synthesize_dataset(const SynthConfig& cfg) {
  if (cfg.n_subjects < 2) throw Error(Errc::BadConfig, "need at least 2 subjects");
  std::vector<Recording> out;
  out.reserve(cfg.n_subjects);
  const std::size_t controls = cfg.n_subjects / 2;
  for (std::size_t i = 0; i < cfg.n_subjects; ++i) {
    const Label label = i < controls ? Label::Control : Label::Adhd;
    out.push_back(synthesize_recording(synth_subject_id(i), label, cfg, derive_seed(cfg.seed, i)));
  }
  return out;
}

}  // namespace eegscreen
