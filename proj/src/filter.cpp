#include "eegscreen/filter.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <string>

#include "eegscreen/error.hpp"

namespace eegscreen {

namespace {

double sinc(double x) {
  if (x == 0.0) return 1.0;
  const double px = std::numbers::pi * x;
  return std::sin(px) / px;
}

void filter_into(std::span<const double> x, const std::vector<double>& h, std::span<double> y) {
  const std::size_t n = x.size();
  const std::size_t taps = h.size();
  const std::size_t half = (taps - 1) / 2;
  std::vector<double> padded(n + 2 * half);
  for (std::size_t i = 0; i < padded.size(); ++i) {
    const auto pos = static_cast<std::ptrdiff_t>(i) - static_cast<std::ptrdiff_t>(half);
    std::ptrdiff_t src = pos;
    if (src < 0) src = -src;
    const auto last = static_cast<std::ptrdiff_t>(n) - 1;
    if (src > last) src = 2 * last - src;
    padded[i] = x[static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(src, 0, last))];
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double* window = padded.data() + i;
    double acc = 0.0;
    for (std::size_t k = 0; k < taps; ++k) acc += h[k] * window[k];
    y[i] = acc;
  }
}

}  // namespace

FilterSpec design_bandpass(double sample_rate_hz, double low_hz, double high_hz) {
  if (!(sample_rate_hz > 0.0)) throw Error(Errc::BadBand, "sample rate must be positive");
  if (!(low_hz > 0.0) || !(low_hz < high_hz))
    throw Error(Errc::BadBand, "need 0 < low_hz < high_hz, got " + std::to_string(low_hz) + ", " +
                                   std::to_string(high_hz));
  const double nyquist = sample_rate_hz / 2.0;
  if (high_hz >= nyquist)
    throw Error(Errc::NyquistViolation, "high_hz " + std::to_string(high_hz) +
                                            " must be below nyquist " + std::to_string(nyquist));

  FilterSpec spec;
  spec.low_hz = low_hz;
  spec.high_hz = high_hz;
  spec.sample_rate_hz = sample_rate_hz;
  spec.low_transition_hz = std::min(std::max(0.25 * low_hz, 2.0), low_hz);
  spec.high_transition_hz = std::min(std::max(0.25 * high_hz, 2.0), nyquist - high_hz);
  const double narrowest = std::min(spec.low_transition_hz, spec.high_transition_hz);
  // Guard against 422.40000000000003-style rounding pushing ceil up by one.
  auto taps = static_cast<std::size_t>(std::ceil(3.3 * sample_rate_hz / narrowest - 1e-9));
  if (taps % 2 == 0) ++taps;
  spec.taps = taps;

  // Cutoffs as a fraction of nyquist.
  const double f1 = (low_hz - spec.low_transition_hz / 2.0) / nyquist;
  const double f2 = (high_hz + spec.high_transition_hz / 2.0) / nyquist;
  const double centre = 0.5 * (taps - 1);
  spec.coefficients.resize(taps);
  for (std::size_t n = 0; n < taps; ++n) {
    const double m = static_cast<double>(n) - centre;
    const double ideal = f2 * sinc(f2 * m) - f1 * sinc(f1 * m);
    const double hamming =
        0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * static_cast<double>(n) / (taps - 1));
    spec.coefficients[n] = ideal * hamming;
  }
  // Unit gain at the middle of the passband.
  const double fc = 0.5 * (f1 + f2);
  double gain = 0.0;
  for (std::size_t n = 0; n < taps; ++n)
    gain += spec.coefficients[n] * std::cos(std::numbers::pi * (static_cast<double>(n) - centre) * fc);
  for (auto& c : spec.coefficients) c /= gain;
  // Enforce exact symmetry.
  for (std::size_t n = 0; n < taps / 2; ++n) {
    const double avg = 0.5 * (spec.coefficients[n] + spec.coefficients[taps - 1 - n]);
    spec.coefficients[n] = spec.coefficients[taps - 1 - n] = avg;
  }
  return spec;
}

double magnitude_response(const FilterSpec& spec, double freq_hz) {
  const double omega = 2.0 * std::numbers::pi * freq_hz / spec.sample_rate_hz;
  std::complex<double> acc{0.0, 0.0};
  for (std::size_t n = 0; n < spec.coefficients.size(); ++n)
    acc += spec.coefficients[n] * std::polar(1.0, -omega * static_cast<double>(n));
  return std::abs(acc);
}

std::vector<double> filter_signal(const std::vector<double>& x, const FilterSpec& spec) {
  if (x.size() < spec.taps)
    throw Error(Errc::TooShort, std::to_string(x.size()) + " samples, filter needs " +
                                    std::to_string(spec.taps));
  std::vector<double> y(x.size());
  filter_into(x, spec.coefficients, y);
  return y;
}

Recording apply_filter(const Recording& rec, const FilterSpec& spec) {
  if (spec.taps == 0 || spec.coefficients.size() != spec.taps)
    throw Error(Errc::BadConfig, "filter spec has no coefficients");
  if (std::abs(spec.sample_rate_hz - rec.sample_rate_hz) > 1e-9 * rec.sample_rate_hz)
    throw Error(Errc::BadConfig, "filter designed for " + std::to_string(spec.sample_rate_hz) +
                                     " Hz, recording is " + std::to_string(rec.sample_rate_hz) + " Hz");
  if (rec.n_samples < spec.taps)
    throw Error(Errc::TooShort, std::to_string(rec.n_samples) + " samples, filter needs " +
                                    std::to_string(spec.taps));
  Recording out = rec;
  for (std::size_t c = 0; c < kNumChannels; ++c) filter_into(rec.channel(c), spec.coefficients, out.channel(c));
  return out;
}

}  // namespace eegscreen
