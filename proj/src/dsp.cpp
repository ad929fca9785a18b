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

#include "preictal/dsp.hpp"

#include <cmath>

#include "preictal/error.hpp"

namespace preictal {

namespace {

// Windowed-sinc low-pass, cutoff as a fraction of the sampling rate.
std::vector<double> windowed_sinc_lowpass(double cutoff_hz, int fs, int num_taps) {
  const int m = num_taps - 1;
  const double fc = cutoff_hz / fs;
  std::vector<double> taps(static_cast<std::size_t>(num_taps));
  for (int n = 0; n < num_taps; ++n) {
    const double k = n - m / 2.0;
    const double sinc = k == 0.0 ? 2.0 * fc : std::sin(2.0 * M_PI * fc * k) / (M_PI * k);
    const double hamming = 0.54 - 0.46 * std::cos(2.0 * M_PI * n / m);
    taps[static_cast<std::size_t>(n)] = sinc * hamming;
  }
  return taps;
}

double magnitude_at(const std::vector<double>& taps, int fs, double freq_hz) {
  double re = 0.0;
  double im = 0.0;
  for (std::size_t n = 0; n < taps.size(); ++n) {
    const double phase = 2.0 * M_PI * freq_hz * static_cast<double>(n) / fs;
    re += taps[n] * std::cos(phase);
    im -= taps[n] * std::sin(phase);
  }
  return std::sqrt(re * re + im * im);
}

}  // namespace

FirKernel design_bandpass(const FilterSpec& spec) {
  if (!(spec.low_cut_hz > 0.0) || !(spec.low_cut_hz < spec.high_cut_hz) ||
      !(spec.high_cut_hz < spec.sampling_rate_hz / 2.0)) {
    throw Error(errc::invalid_band,
                "need 0 < low < high < fs/2, got [" + std::to_string(spec.low_cut_hz) +
                    ", " + std::to_string(spec.high_cut_hz) + "] at fs " +
                    std::to_string(spec.sampling_rate_hz));
  }
  if (spec.num_taps < 3 || spec.num_taps % 2 == 0) {
    throw Error(errc::invalid_band, "tap count must be odd and >= 3");
  }

  FirKernel kernel;
  kernel.sampling_rate_hz = spec.sampling_rate_hz;
  kernel.taps = windowed_sinc_lowpass(spec.high_cut_hz, spec.sampling_rate_hz, spec.num_taps);
  const auto low = windowed_sinc_lowpass(spec.low_cut_hz, spec.sampling_rate_hz, spec.num_taps);
  for (std::size_t i = 0; i < kernel.taps.size(); ++i) kernel.taps[i] -= low[i];

  const double f_ref = std::sqrt(spec.low_cut_hz * spec.high_cut_hz);
  const double gain = magnitude_at(kernel.taps, spec.sampling_rate_hz, f_ref);
  for (double& t : kernel.taps) t /= gain;
  return kernel;
}

std::vector<double> filter_channel(const std::vector<double>& x, const FirKernel& kernel) {
  const int nt = static_cast<int>(kernel.taps.size());
  const int half = kernel.half_width();
  const auto n = static_cast<int>(x.size());
  if (n == 0) return {};

  // Reflect padding (edge sample not repeated); short inputs fold repeatedly.
  auto padded_at = [&](int idx) {
    int i = idx - half;
    while (i < 0 || i >= n) {
      if (i < 0) i = -i;
      if (i >= n) i = 2 * (n - 1) - i;
      if (n == 1) return x[0];
    }
    return x[static_cast<std::size_t>(i)];
  };

  std::vector<double> padded(static_cast<std::size_t>(n + 2 * half));
  for (int i = 0; i < n + 2 * half; ++i) padded[static_cast<std::size_t>(i)] = padded_at(i);

  // Valid convolution of the padded input: the padding is the group delay.
  const std::vector<double> reversed(kernel.taps.rbegin(), kernel.taps.rend());
  const Eigen::Map<const Eigen::VectorXd> h(reversed.data(), nt);
  std::vector<double> y(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    y[static_cast<std::size_t>(i)] =
        h.dot(Eigen::Map<const Eigen::VectorXd>(padded.data() + i, nt));
  }
  return y;
}

Epoch apply_filter(const Epoch& epoch, const FirKernel& kernel) {
  Epoch out;
  out.global_start_s = epoch.global_start_s;
  out.patient_id = epoch.patient_id;
  out.data.resize(epoch.data.rows(), epoch.data.cols());

  std::vector<double> channel(static_cast<std::size_t>(epoch.data.cols()));
  for (Eigen::Index c = 0; c < epoch.data.rows(); ++c) {
    for (Eigen::Index t = 0; t < epoch.data.cols(); ++t) {
      channel[static_cast<std::size_t>(t)] = epoch.data(c, t);
    }
    const auto filtered = filter_channel(channel, kernel);
    for (Eigen::Index t = 0; t < epoch.data.cols(); ++t) {
      out.data(c, t) = filtered[static_cast<std::size_t>(t)];
    }
  }
  return out;
}

std::vector<double> frequency_response(const FirKernel& kernel,
                                       const std::vector<double>& freqs_hz) {
  std::vector<double> mags;
  mags.reserve(freqs_hz.size());
  for (double f : freqs_hz) {
    if (f < 0.0 || f >= kernel.sampling_rate_hz / 2.0) {
      throw Error(errc::frequency_out_of_range,
                  "probe " + std::to_string(f) + " Hz outside [0, fs/2)");
    }
    mags.push_back(magnitude_at(kernel.taps, kernel.sampling_rate_hz, f));
  }
  return mags;
}

}  // namespace preictal
