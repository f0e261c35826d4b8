#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "eegscreen/channels.hpp"
#include "eegscreen/recording.hpp"

namespace eegscreen {

// Planted-signal dataset: every subject gets broadband background activity on
// all channels; ADHD-labelled subjects additionally carry an 8 Hz rhythm on
// the signal channels. Used for end-to-end checks where the right answer is
// known by construction.
struct SynthConfig {
  std::size_t n_subjects = 40;  // split evenly, first half control
  std::uint64_t seed = 1;
  double duration_s = 10.0;
  double sample_rate_hz = 128.0;
  double signal_hz = 8.0;
  double signal_amplitude_uv = 8.0;
  std::vector<Channel> signal_channels = {Channel::Fp1, Channel::Fp2, Channel::O1, Channel::O2};
};

std::string synth_subject_id(std::size_t index);

Recording synthesize_recording(const std::string& subject_id, Label label, const SynthConfig& cfg,
                               std::uint64_t seed);

std::vector<Recording> synthesize_dataset(const SynthConfig& cfg);

}  // namespace eegscreen
