#include "eegscreen/cwt.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "eegscreen/error.hpp"

namespace eegscreen {

namespace {

// exp(-u^2 / 2) < 1e-20 beyond this.
constexpr double kEnvelopeCutoff = 9.6;

}  // namespace

void validate(const WaveletSpec& wavelet) {
  if (wavelet.family != WaveletFamily::ComplexMorlet) throw Error(Errc::BadConfig, "unsupported wavelet");
  if (!(wavelet.omega0 >= 5.0)) throw Error(Errc::BadConfig, "omega0 must be >= 5");
}

void validate(const ScaleGrid& grid) {
  if (grid.freqs_hz.empty()) throw Error(Errc::BadGrid, "empty scale grid");
  if (grid.freqs_hz.size() != grid.scales_s.size()) throw Error(Errc::BadGrid, "freqs/scales size mismatch");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid.freqs_hz[i] > 0.0) || !(grid.scales_s[i] > 0.0) || !std::isfinite(grid.scales_s[i]))
      throw Error(Errc::BadGrid, "frequencies and scales must be positive");
  }
  if (grid.size() > 1) {
    const bool ascending = grid.freqs_hz[1] > grid.freqs_hz[0];
    for (std::size_t i = 1; i < grid.size(); ++i) {
      const bool up = grid.freqs_hz[i] > grid.freqs_hz[i - 1];
      const bool down = grid.freqs_hz[i] < grid.freqs_hz[i - 1];
      if ((ascending && !up) || (!ascending && !down))
        throw Error(Errc::BadGrid, "frequencies must be strictly monotone");
    }
  }
}

ScaleGrid make_scale_grid(std::size_t n_scales, double low_hz, double high_hz, const WaveletSpec& wavelet) {
  validate(wavelet);
  if (n_scales == 0) throw Error(Errc::BadGrid, "n_scales must be positive");
  if (!(low_hz > 0.0) || !(high_hz > low_hz)) throw Error(Errc::BadGrid, "need 0 < low_hz < high_hz");
  ScaleGrid grid;
  grid.freqs_hz.resize(n_scales);
  grid.scales_s.resize(n_scales);
  const double ratio = n_scales > 1 ? std::log(high_hz / low_hz) / static_cast<double>(n_scales - 1) : 0.0;
  for (std::size_t j = 0; j < n_scales; ++j) {
    double f = low_hz * std::exp(ratio * static_cast<double>(j));
    if (j + 1 == n_scales && n_scales > 1) f = high_hz;
    grid.freqs_hz[j] = f;
    grid.scales_s[j] = wavelet.omega0 / (2.0 * std::numbers::pi * f);
  }
  return grid;
}

Grid2<std::complex<double>> cwt_transform(std::span<const double> signal, double sample_rate_hz,
                                          const WaveletSpec& wavelet, const ScaleGrid& grid) {
  if (signal.size() < 2) throw Error(Errc::EmptySignal, "signal needs at least 2 samples");
  if (!(sample_rate_hz > 0.0)) throw Error(Errc::BadConfig, "sample rate must be positive");
  validate(wavelet);
  validate(grid);

  const std::size_t n = signal.size();
  const double dt = 1.0 / sample_rate_hz;
  const double norm = std::pow(std::numbers::pi, -0.25);
  Grid2<std::complex<double>> out{grid.size(), n, std::vector<std::complex<double>>(grid.size() * n)};

  std::vector<double> kre, kim;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double a = grid.scales_s[j];
    const double weight = dt / std::sqrt(a);
    // Half-width in samples, capped by the signal length.
    const auto reach = static_cast<std::size_t>(
        std::min<double>(static_cast<double>(n - 1), std::floor(kEnvelopeCutoff * a / dt)));
    const std::size_t width = 2 * reach + 1;
    kre.assign(width, 0.0);
    kim.assign(width, 0.0);
    for (std::size_t i = 0; i < width; ++i) {
      const double u = (static_cast<double>(i) - static_cast<double>(reach)) * dt / a;
      const double env = norm * std::exp(-0.5 * u * u) * weight;
      // conj(psi): real part cos, imaginary part -sin.
      kre[i] = env * std::cos(wavelet.omega0 * u);
      kim[i] = -env * std::sin(wavelet.omega0 * u);
    }
    for (std::size_t b = 0; b < n; ++b) {
      const std::size_t t0 = b > reach ? b - reach : 0;
      const std::size_t t1 = std::min(n - 1, b + reach);
      const std::size_t k0 = t0 + reach - b;
      double re = 0.0, im = 0.0;
      for (std::size_t t = t0, k = k0; t <= t1; ++t, ++k) {
        re += signal[t] * kre[k];
        im += signal[t] * kim[k];
      }
      out.at(j, b) = {re, im};
    }
  }
  return out;
}

Grid2<double> cwt_magnitude(std::span<const double> signal, double sample_rate_hz,
                            const WaveletSpec& wavelet, const ScaleGrid& grid) {
  const auto w = cwt_transform(signal, sample_rate_hz, wavelet, grid);
  Grid2<double> mag{w.rows, w.cols, std::vector<double>(w.values.size())};
  for (std::size_t i = 0; i < w.values.size(); ++i) mag.values[i] = std::abs(w.values[i]);
  return mag;
}

Grid2<float> pool_time(const Grid2<double>& mag, std::size_t n_bins) {
  if (n_bins == 0) throw Error(Errc::BadConfig, "n_bins must be positive");
  if (mag.cols < n_bins)
    throw Error(Errc::TooFewTimePoints,
                std::to_string(mag.cols) + " time points, need at least " + std::to_string(n_bins));
  // Integer coordinates scaled by n_bins: sample i spans [i*B, (i+1)*B), bin
  // j spans [j*W, (j+1)*W). Overlaps are exact integers.
  const std::size_t w = mag.cols;
  Grid2<float> out{mag.rows, n_bins, std::vector<float>(mag.rows * n_bins)};
  for (std::size_t r = 0; r < mag.rows; ++r) {
    const double* row = mag.values.data() + r * w;
    for (std::size_t j = 0; j < n_bins; ++j) {
      const std::size_t lo = j * w, hi = (j + 1) * w;
      const std::size_t i0 = lo / n_bins;
      const std::size_t i1 = std::min(w - 1, (hi - 1) / n_bins);
      double acc = 0.0;
      for (std::size_t i = i0; i <= i1; ++i) {
        const std::size_t s = std::max(lo, i * n_bins);
        const std::size_t e = std::min(hi, (i + 1) * n_bins);
        if (e > s) acc += static_cast<double>(e - s) * row[i];
      }
      out.at(r, j) = static_cast<float>(acc / static_cast<double>(w));
    }
  }
  return out;
}

Scalogram raw_scalogram(const Segment& seg, const WaveletSpec& wavelet, const ScaleGrid& grid) {
  if (seg.data.size() != kNumChannels * seg.n_samples)
    throw Error(Errc::ShapeMismatch, "segment data does not match 19 x n_samples");
  Scalogram s;
  s.subject_id = seg.subject_id;
  s.label = seg.label;
  s.segment_index = seg.segment_index;
  s.n_scales = grid.size();
  s.freqs_hz = grid.freqs_hz;
  s.values.resize(kNumChannels * s.n_scales * s.n_times);
  for (std::size_t c = 0; c < kNumChannels; ++c) {
    const auto pooled = pool_time(cwt_magnitude(seg.channel(c), seg.sample_rate_hz, wavelet, grid), s.n_times);
    auto plane = s.plane(c);
    for (std::size_t i = 0; i < pooled.values.size(); ++i)
      plane[i] = static_cast<float>(std::log1p(static_cast<double>(pooled.values[i])));
  }
  return s;
}

void standardize(Scalogram& s) {
  if (s.values.empty()) return;
  const double n = static_cast<double>(s.values.size());
  double mean = 0.0;
  for (float v : s.values) mean += v;
  mean /= n;
  double var = 0.0;
  for (float v : s.values) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / n);
  if (!(sd > 1e-12 * std::max(1.0, std::abs(mean)))) {
    std::fill(s.values.begin(), s.values.end(), 0.0f);
    return;
  }
  for (float& v : s.values) v = static_cast<float>((v - mean) / sd);
}

Scalogram scalogram_from_segment(const Segment& seg, const WaveletSpec& wavelet, const ScaleGrid& grid) {
  Scalogram s = raw_scalogram(seg, wavelet, grid);
  standardize(s);
  return s;
}

}  // namespace eegscreen
