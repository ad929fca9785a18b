// Copyright 2026 The Preictal Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <doctest.h>

#include <cmath>
#include <complex>

#include "preictal/dsp.hpp"
#include "preictal/rng.hpp"
#include "test_util.hpp"

using namespace preictal;

namespace {

// Independent DFT oracle using complex arithmetic (the implementation sums
// real cos/sin terms).
double dft_magnitude(const std::vector<double>& taps, double freq_hz, double fs) {
  std::complex<double> acc(0.0, 0.0);
  for (std::size_t n = 0; n < taps.size(); ++n) {
    const double phase = -2.0 * M_PI * freq_hz * static_cast<double>(n) / fs;
    acc += taps[n] * std::exp(std::complex<double>(0.0, phase));
  }
  return std::abs(acc);
}

Epoch sine_epoch(double freq_hz, double amplitude) {
  Epoch e;
  e.data.resize(1, kEpochSamples);
  for (int t = 0; t < kEpochSamples; ++t) {
    e.data(0, t) = amplitude * std::sin(2.0 * M_PI * freq_hz * t / kSamplingRateHz);
  }
  return e;
}

}  // namespace

TEST_CASE("default kernel: length, symmetry, passband and stopband") {
  const FirKernel k = design_bandpass(FilterSpec{});
  REQUIRE(k.taps.size() == 845);
  const int n = static_cast<int>(k.taps.size());
  for (int i = 0; i < n / 2; ++i) {
    CHECK(k.taps[static_cast<std::size_t>(i)] ==
          doctest::Approx(k.taps[static_cast<std::size_t>(n - 1 - i)]).epsilon(1e-12));
  }
  // DFT oracle agrees with frequency_response
  const std::vector<double> probes = {0.1, 10.0, 25.0, 40.0, 60.0};
  const auto mags = frequency_response(k, probes);
  for (std::size_t i = 0; i < probes.size(); ++i) {
    CHECK(mags[i] == doctest::Approx(dft_magnitude(k.taps, probes[i], 256.0))
                         .epsilon(1e-9));
  }
  CHECK(mags[1] > 0.99);  // 10 Hz
  CHECK(mags[1] < 1.01);
  CHECK(mags[2] > 0.99);  // 25 Hz
  CHECK(mags[2] < 1.01);
  CHECK(mags[3] > 0.99);  // 40 Hz
  CHECK(mags[3] < 1.01);
  CHECK(mags[0] <= 0.01);  // 0.1 Hz
  CHECK(mags[4] <= 0.01);  // 60 Hz
}

TEST_CASE("invalid bands and probes are typed errors") {
  FilterSpec bad;
  bad.low_cut_hz = 50.0;
  bad.high_cut_hz = 1.0;
  CHECK(testutil::throws_errc(errc::invalid_band, [&] { design_bandpass(bad); }));

  FilterSpec even;
  even.num_taps = 844;
  CHECK(testutil::throws_errc(errc::invalid_band, [&] { design_bandpass(even); }));

  const FirKernel k = design_bandpass(FilterSpec{});
  CHECK(testutil::throws_errc(errc::frequency_out_of_range,
                              [&] { frequency_response(k, {256.0}); }));
}

TEST_CASE("identity kernel has unit response everywhere") {
  FirKernel identity;
  identity.taps = {1.0};
  identity.sampling_rate_hz = 256;
  for (double mag : frequency_response(identity, {0.0, 5.0, 60.0, 127.0})) {
    CHECK(mag == doctest::Approx(1.0).epsilon(1e-12));
  }
  // and filtering with it is the identity map
  const Epoch e = sine_epoch(17.0, 3.0);
  const Epoch out = apply_filter(e, identity);
  for (int t = 0; t < kEpochSamples; ++t) {
    CHECK(out.data(0, t) == doctest::Approx(e.data(0, t)).epsilon(1e-12));
  }
}

TEST_CASE("all-zero epoch stays all-zero") {
  const FirKernel k = design_bandpass(FilterSpec{});
  Epoch e;
  e.data = Eigen::MatrixXd::Zero(3, kEpochSamples);
  const Epoch out = apply_filter(e, k);
  CHECK(out.data.cwiseAbs().maxCoeff() == 0.0);
  CHECK(out.data.rows() == 3);
  CHECK(out.data.cols() == kEpochSamples);
}

TEST_CASE("passband sinusoid keeps its amplitude, stopband is crushed") {
  const FirKernel k = design_bandpass(FilterSpec{});
  const int edge = kSamplingRateHz / 2;  // discard 0.5 s per side

  // 25 Hz, 100 uV: FFT amplitude oracle on the interior within 1%
  const Epoch pass = apply_filter(sine_epoch(25.0, 100.0), k);
  std::vector<double> interior;
  for (int t = edge; t < kEpochSamples - edge; ++t) interior.push_back(pass.data(0, t));
  const double amp25 = testutil::tone_amplitude(interior, 25.0, 256.0);
  CHECK(amp25 > 99.0);
  CHECK(amp25 < 101.0);

  // 60 Hz, 100 uV: interior residue at least 40 dB down
  const Epoch stop = apply_filter(sine_epoch(60.0, 100.0), k);
  double peak = 0.0;
  for (int t = edge; t < kEpochSamples - edge; ++t) {
    peak = std::max(peak, std::abs(stop.data(0, t)));
  }
  CHECK(peak <= 1.0);
}

TEST_CASE("linearity within 1e-9 relative") {
  const FirKernel k = design_bandpass(FilterSpec{});
  Rng rng(606);
  Epoch x, y;
  x.data.resize(2, kEpochSamples);
  y.data.resize(2, kEpochSamples);
  for (int c = 0; c < 2; ++c) {
    for (int t = 0; t < kEpochSamples; ++t) {
      x.data(c, t) = rng.gaussian();
      y.data(c, t) = rng.gaussian();
    }
  }
  const double a = 2.5;
  const double b = -0.75;
  Epoch combo;
  combo.data = a * x.data + b * y.data;

  const Epoch lhs = apply_filter(combo, k);
  const Epoch fx = apply_filter(x, k);
  const Epoch fy = apply_filter(y, k);
  const Eigen::MatrixXd rhs = a * fx.data + b * fy.data;
  const double scale = rhs.cwiseAbs().maxCoeff();
  CHECK((lhs.data - rhs).cwiseAbs().maxCoeff() <= 1e-9 * std::max(scale, 1.0));
}

TEST_CASE("constant offset is rejected in the interior") {
  const FirKernel k = design_bandpass(FilterSpec{});
  Epoch e;
  e.data = Eigen::MatrixXd::Constant(1, kEpochSamples, 50.0);
  const Epoch out = apply_filter(e, k);
  const int edge = kSamplingRateHz / 2;
  for (int t = edge; t < kEpochSamples - edge; ++t) {
    CHECK(std::abs(out.data(0, t)) <= 0.5);  // 1% of the 50 uV offset
  }
}

TEST_CASE("symmetric input maps to symmetric output") {
  const FirKernel k = design_bandpass(FilterSpec{});
  Epoch e;
  e.data.resize(1, kEpochSamples);
  const double center = (kEpochSamples - 1) / 2.0;
  for (int t = 0; t < kEpochSamples; ++t) {
    const double d = (t - center) / 64.0;
    e.data(0, t) = std::exp(-d * d);  // even bump about the center
  }
  const Epoch out = apply_filter(e, k);
  for (int t = 0; t < kEpochSamples / 2; ++t) {
    CHECK(out.data(0, t) ==
          doctest::Approx(out.data(0, kEpochSamples - 1 - t)).epsilon(1e-9));
  }
}
