#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "eegscreen/filter.hpp"
#include "eegscreen/pipeline.hpp"
#include "eegscreen/segment.hpp"
#include "helpers.hpp"

using namespace eegscreen;
using testing::error_code_of;

namespace {

// |sum_n h[n] e^{-i 2 pi f n / fs}|, computed independently of the library.
double dft_gain(const std::vector<double>& h, double f, double fs) {
  std::complex<double> acc = 0.0;
  for (std::size_t n = 0; n < h.size(); ++n) acc += h[n] * std::polar(1.0, -2.0 * std::numbers::pi * f * double(n) / fs);
  return std::abs(acc);
}

// Reference zero-delay FIR with numpy-style reflect padding.
std::vector<double> reference_filter(const std::vector<double>& x, const std::vector<double>& h) {
  const auto n = static_cast<std::ptrdiff_t>(x.size());
  const auto half = static_cast<std::ptrdiff_t>(h.size() / 2);
  auto at = [&](std::ptrdiff_t i) {
    if (i < 0) i = -i;
    if (i >= n) i = 2 * (n - 1) - i;
    return x[static_cast<std::size_t>(i)];
  };
  std::vector<double> y(x.size(), 0.0);
  for (std::ptrdiff_t t = 0; t < n; ++t) {
    double acc = 0.0;
    for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(h.size()); ++k) acc += h[static_cast<std::size_t>(k)] * at(t + half - k);
    y[static_cast<std::size_t>(t)] = acc;
  }
  return y;
}

Recording constant_recording(std::size_t n, double value) {
  Recording r = testing::random_recording(n, 1);
  std::fill(r.data.begin(), r.data.end(), value);
  return r;
}

}  // namespace

TEST_CASE("filter design follows the transition-width rule") {
  const FilterSpec f = design_bandpass(128.0, 1.0, 30.0);
  CHECK(f.taps == 423);
  CHECK(f.coefficients.size() == 423);
  CHECK(f.low_transition_hz == doctest::Approx(1.0));
  CHECK(f.high_transition_hz == doctest::Approx(7.5));
  for (std::size_t i = 0; i < f.taps; ++i) CHECK(f.coefficients[i] == f.coefficients[f.taps - 1 - i]);
}

TEST_CASE("filter design errors") {
  CHECK(error_code_of([] { design_bandpass(128.0, 30.0, 1.0); }) == Errc::BadBand);
  CHECK(error_code_of([] { design_bandpass(128.0, 0.0, 30.0); }) == Errc::BadBand);
  CHECK(error_code_of([] { design_bandpass(128.0, 1.0, 64.0); }) == Errc::NyquistViolation);
  CHECK(error_code_of([] { design_bandpass(128.0, 1.0, 70.0); }) == Errc::NyquistViolation);
}

TEST_CASE("magnitude response from taps") {
  const FilterSpec f = design_bandpass(128.0);
  const double pass = dft_gain(f.coefficients, 10.0, 128.0);
  CHECK(dft_gain(f.coefficients, 0.0, 128.0) <= 0.01 * pass);
  CHECK(20 * std::log10(pass / dft_gain(f.coefficients, 0.2, 128.0)) >= 20.0);
  CHECK(20 * std::log10(pass / dft_gain(f.coefficients, 45.0, 128.0)) >= 20.0);
  double lo = 1e9, hi = 0;
  for (double fr = 4.0; fr <= 20.0; fr += 0.05) {
    const double g = dft_gain(f.coefficients, fr, 128.0);
    lo = std::min(lo, g);
    hi = std::max(hi, g);
  }
  CHECK(20 * std::log10(hi / lo) <= 1.0);
  for (double fr : {0.2, 3.0, 10.0, 45.0}) CHECK(magnitude_response(f, fr) == doctest::Approx(dft_gain(f.coefficients, fr, 128.0)));
}

TEST_CASE("apply_filter matches a direct reflect-padded convolution") {
  const FilterSpec f = design_bandpass(128.0);
  const Recording r = testing::random_recording(700, 3);
  const Recording y = apply_filter(r, f);
  for (std::size_t c : {0u, 7u, 18u}) {
    const std::vector<double> x(r.channel(c).begin(), r.channel(c).end());
    const auto ref = reference_filter(x, f.coefficients);
    for (std::size_t t = 0; t < x.size(); ++t) CHECK(y.channel(c)[t] == doctest::Approx(ref[t]).epsilon(1e-9).scale(1.0));
  }
}

TEST_CASE("filter linearity") {
  const FilterSpec f = design_bandpass(128.0);
  const Recording a = testing::random_recording(600, 4), b = testing::random_recording(600, 5);
  Recording mix = a;
  for (std::size_t i = 0; i < mix.data.size(); ++i) mix.data[i] = 2.5 * a.data[i] - 0.75 * b.data[i];
  const Recording fa = apply_filter(a, f), fb = apply_filter(b, f), fm = apply_filter(mix, f);
  double worst = 0, scale = 0;
  for (std::size_t i = 0; i < mix.data.size(); ++i) {
    worst = std::max(worst, std::abs(fm.data[i] - (2.5 * fa.data[i] - 0.75 * fb.data[i])));
    scale = std::max(scale, std::abs(fm.data[i]));
  }
  CHECK(worst <= 1e-9 * scale);
}

TEST_CASE("zero, DC and sinusoid behaviour") {
  const FilterSpec f = design_bandpass(128.0);
  const Recording zero = apply_filter(constant_recording(1280, 0.0), f);
  for (double v : zero.data) CHECK(v == 0.0);

  const Recording dc = apply_filter(constant_recording(1280, 5.0), f);
  for (std::size_t t = 211; t < 1280 - 211; ++t) CHECK(std::abs(dc.channel(std::size_t{0})[t]) <= 0.05);

  Recording sine = constant_recording(1280, 0.0);
  for (std::size_t c = 0; c < kNumChannels; ++c)
    for (std::size_t t = 0; t < 1280; ++t) sine.channel(c)[t] = std::sin(2 * std::numbers::pi * 10.0 * double(t) / 128.0);
  const Recording ys = apply_filter(sine, f);
  double peak = 0;
  for (std::size_t t = 300; t < 980; ++t) peak = std::max(peak, std::abs(ys.channel(std::size_t{3})[t]));
  CHECK(peak == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("apply_filter preconditions") {
  const FilterSpec f = design_bandpass(128.0);
  CHECK(error_code_of([&] { apply_filter(testing::random_recording(422, 1), f); }) == Errc::TooShort);
  CHECK_NOTHROW(apply_filter(testing::random_recording(423, 1), f));
  CHECK(error_code_of([&] { apply_filter(testing::random_recording(600, 1, 256.0), f); }) == Errc::BadConfig);
}

TEST_CASE("segmentation arithmetic") {
  const SegmentConfig cfg;
  CHECK(window_samples(cfg, 128.0) == 384);
  CHECK(hop_samples(cfg, 128.0) == 128);
  const auto segs = segment(testing::random_recording(1280, 2), cfg);
  REQUIRE(segs.size() == 8);
  for (std::size_t i = 0; i < segs.size(); ++i) {
    CHECK(segs[i].start_sample == 128 * i);
    CHECK(segs[i].segment_index == i);
    CHECK(segs[i].subject_id == "r2");
  }
  CHECK(segment(testing::random_recording(384, 2), cfg).size() == 1);
  CHECK(error_code_of([&] { segment(testing::random_recording(371, 2), cfg); }) == Errc::InsufficientLength);
  for (std::size_t n = 384; n <= 5120; n += 37) CHECK(segment_count(n, 384, 128) == (n - 384) / 128 + 1);
  CHECK(segment_count(100, 384, 128) == 0);
}

TEST_CASE("segments are bitwise slices of the source") {
  const Recording r = testing::random_recording(1000, 9);
  const auto segs = segment(r);
  for (const auto& s : segs)
    for (std::size_t c = 0; c < kNumChannels; ++c)
      for (std::size_t t = 0; t < s.n_samples; ++t) REQUIRE(s.channel(c)[t] == r.channel(c)[s.start_sample + t]);
}

TEST_CASE("preprocess pipeline reports short input as InsufficientLength") {
  PipelineConfig cfg;
  CHECK(error_code_of([&] { preprocess_recording(testing::random_recording(256, 1), cfg); }) ==
        Errc::InsufficientLength);
  CHECK(preprocess_recording(testing::random_recording(1280, 1), cfg).size() == 8);
}
