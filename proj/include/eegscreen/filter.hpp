#pragma once

#include <cstddef>
#include <vector>

#include "eegscreen/recording.hpp"

namespace eegscreen {

// Linear-phase windowed-sinc band-pass FIR.
struct FilterSpec {
  double low_hz = 1.0;
  double high_hz = 30.0;
  double sample_rate_hz = 128.0;
  double low_transition_hz = 0.0;
  double high_transition_hz = 0.0;
  std::size_t taps = 0;
  std::vector<double> coefficients;
};

// Hamming-windowed sinc band-pass. Transition widths follow the usual EEG
// toolbox rule: low edge min(max(0.25 * low, 2), low), high edge
// min(max(0.25 * high, 2), nyquist - high). Taps are the smallest odd count
// >= 3.3 * fs / narrowest transition. The -6 dB points sit half a transition
// outside each band edge and the passband centre is scaled to unit gain.
// Throws Error(BadBand | NyquistViolation).
FilterSpec design_bandpass(double sample_rate_hz, double low_hz = 1.0, double high_hz = 30.0);

// |H(f)| evaluated from the taps.
double magnitude_response(const FilterSpec& spec, double freq_hz);

// Filters every channel. Edges use reflect padding ((taps - 1) / 2 samples on
// each side, edge sample not repeated) and the output is delay-compensated,
// so it has the input's length and alignment.
// Throws Error(TooShort) when the recording is shorter than the filter.
Recording apply_filter(const Recording& rec, const FilterSpec& spec);

// Single-channel form of apply_filter.
std::vector<double> filter_signal(const std::vector<double>& x, const FilterSpec& spec);

}  // namespace eegscreen
