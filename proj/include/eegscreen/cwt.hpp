#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "eegscreen/recording.hpp"
#include "eegscreen/segment.hpp"

namespace eegscreen {

enum class WaveletFamily { ComplexMorlet };

// psi(t) = pi^(-1/4) * exp(i * omega0 * t) * exp(-t^2 / 2)
struct WaveletSpec {
  WaveletFamily family = WaveletFamily::ComplexMorlet;
  double omega0 = 6.0;
};

// Scales in seconds, a_j = omega0 / (2 pi f_j).
struct ScaleGrid {
  std::vector<double> freqs_hz;
  std::vector<double> scales_s;

  std::size_t size() const { return freqs_hz.size(); }
};

void validate(const WaveletSpec& wavelet);
void validate(const ScaleGrid& grid);

// n_scales log-spaced frequencies from low_hz up to high_hz (ascending).
ScaleGrid make_scale_grid(std::size_t n_scales = 64, double low_hz = 1.0, double high_hz = 30.0,
                          const WaveletSpec& wavelet = {});

// Dense [rows x cols] row-major buffer.
template <typename T>
struct Grid2 {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<T> values;

  T& at(std::size_t r, std::size_t c) { return values[r * cols + c]; }
  const T& at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
};

// Discretized continuous wavelet transform on the sample grid:
//   W(a, b) = a^(-1/2) * sum_t x(t) * conj(psi((t - b) / a)) * dt
// with zero padding outside the signal. Kernel taps whose Gaussian envelope
// falls below 1e-20 are skipped. Rows are scales, columns translations.
// Throws Error(EmptySignal | BadGrid | BadConfig).
Grid2<std::complex<double>> cwt_transform(std::span<const double> signal, double sample_rate_hz,
                                          const WaveletSpec& wavelet, const ScaleGrid& grid);

// |W| of cwt_transform.
Grid2<double> cwt_magnitude(std::span<const double> signal, double sample_rate_hz,
                            const WaveletSpec& wavelet, const ScaleGrid& grid);

inline constexpr std::size_t kTimeBins = 100;

// Averages each row over n_bins equal fractional slices of the time axis.
// Throws Error(TooFewTimePoints) when there are fewer columns than bins.
Grid2<float> pool_time(const Grid2<double>& mag, std::size_t n_bins = kTimeBins);

// Fixed-size channel x scale x time tensor for one segment.
struct Scalogram {
  std::string subject_id;
  Label label = Label::Unknown;
  std::size_t segment_index = 0;
  std::size_t n_channels = kNumChannels;
  std::size_t n_scales = 0;
  std::size_t n_times = kTimeBins;
  std::vector<double> freqs_hz;
  std::vector<float> values;  // [channel][scale][time]

  std::span<float> plane(std::size_t c) { return {values.data() + c * n_scales * n_times, n_scales * n_times}; }
  std::span<const float> plane(std::size_t c) const {
    return {values.data() + c * n_scales * n_times, n_scales * n_times};
  }
};

// log1p(pool_time(|W|)) for every channel, before standardization.
Scalogram raw_scalogram(const Segment& seg, const WaveletSpec& wavelet, const ScaleGrid& grid);

// Rescales the whole tensor to zero mean and unit population std. A constant
// tensor becomes all zeros.
void standardize(Scalogram& s);

Scalogram scalogram_from_segment(const Segment& seg, const WaveletSpec& wavelet, const ScaleGrid& grid);

}  // namespace eegscreen
