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

#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include "preictal/edf.hpp"
#include "preictal/error.hpp"
#include "preictal/rng.hpp"

namespace preictal::testutil {

/// doctest-friendly check that a callable throws Error with the given code.
template <typename Fn>
bool throws_errc(errc expected, Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code() == expected;
  } catch (...) {
    return false;
  }
  return false;
}

/// DFT amplitude of a real series at one frequency (least-squares projection
/// onto the sin/cos pair) - the independent oracle for filter output levels.
inline double tone_amplitude(const std::vector<double>& x, double freq_hz, double fs) {
  double re = 0.0;
  double im = 0.0;
  for (std::size_t n = 0; n < x.size(); ++n) {
    const double phase = 2.0 * M_PI * freq_hz * static_cast<double>(n) / fs;
    re += x[n] * std::cos(phase);
    im += x[n] * std::sin(phase);
  }
  const auto n = static_cast<double>(x.size());
  return 2.0 * std::sqrt(re * re + im * im) / n;
}

/// Welch band power with Hann windows, 50% overlap; oracle for the synthetic
/// generator's planted bursts.
inline double welch_band_power(const std::vector<double>& x, double fs, int seg_len,
                               double band_lo_hz, double band_hi_hz) {
  const int hop = seg_len / 2;
  const int n_segs = x.size() >= static_cast<std::size_t>(seg_len)
                         ? 1 + (static_cast<int>(x.size()) - seg_len) / hop
                         : 0;
  if (n_segs == 0) return 0.0;

  std::vector<double> window(static_cast<std::size_t>(seg_len));
  for (int i = 0; i < seg_len; ++i) {
    window[static_cast<std::size_t>(i)] =
        0.5 * (1.0 - std::cos(2.0 * M_PI * i / (seg_len - 1)));
  }

  const int bin_lo = static_cast<int>(std::ceil(band_lo_hz * seg_len / fs));
  const int bin_hi = static_cast<int>(std::floor(band_hi_hz * seg_len / fs));
  double total = 0.0;
  for (int s = 0; s < n_segs; ++s) {
    const double* seg = x.data() + static_cast<std::size_t>(s) * hop;
    for (int k = bin_lo; k <= bin_hi; ++k) {
      std::complex<double> acc(0.0, 0.0);
      for (int i = 0; i < seg_len; ++i) {
        const double phase = -2.0 * M_PI * k * i / seg_len;
        acc += seg[i] * window[static_cast<std::size_t>(i)] *
               std::complex<double>(std::cos(phase), std::sin(phase));
      }
      total += std::norm(acc);
    }
  }
  return total / n_segs;
}

/// Valid Recording with seeded random header fields and digital-exact samples.
inline Recording random_recording(std::uint64_t seed) {
  Rng rng(seed);
  Recording rec;
  rec.header.version = "0";
  rec.header.patient_id = "patient " + std::to_string(rng.uniform_int(1, 9999));
  rec.header.recording_id = "rec " + std::to_string(rng.uniform_int(1, 9999));
  char date[16], time[16];
  std::snprintf(date, sizeof(date), "%02d.%02d.%02d",
                static_cast<int>(rng.uniform_int(1, 28)),
                static_cast<int>(rng.uniform_int(1, 12)),
                static_cast<int>(rng.uniform_int(0, 99)));
  std::snprintf(time, sizeof(time), "%02d.%02d.%02d",
                static_cast<int>(rng.uniform_int(0, 23)),
                static_cast<int>(rng.uniform_int(0, 59)),
                static_cast<int>(rng.uniform_int(0, 59)));
  rec.header.start_date = date;
  rec.header.start_time = time;

  static const double durations[] = {1.0, 0.5, 2.0, 0.25, 4.0};
  rec.header.record_duration_s =
      durations[static_cast<std::size_t>(rng.uniform_int(0, 4))];
  rec.header.record_count = static_cast<int>(rng.uniform_int(1, 4));
  const int ns = static_cast<int>(rng.uniform_int(1, 4));
  rec.header.signal_count = ns;
  rec.header.header_bytes = 256 * (ns + 1);

  for (int s = 0; s < ns; ++s) {
    SignalSpec spec;
    spec.label = "CH" + std::to_string(s + 1);
    spec.physical_dim = "uV";
    spec.dig_min = static_cast<int>(rng.uniform_int(-32768, -1));
    spec.dig_max = static_cast<int>(rng.uniform_int(0, 32767));
    spec.phys_min = -std::round(rng.uniform(10.0, 5000.0));
    spec.phys_max = std::round(rng.uniform(10.0, 5000.0));
    spec.samples_per_record = static_cast<int>(rng.uniform_int(1, 64));
    rec.signals.push_back(spec);

    std::vector<double> samples;
    const std::size_t count = static_cast<std::size_t>(rec.header.record_count) *
                              static_cast<std::size_t>(spec.samples_per_record);
    for (std::size_t i = 0; i < count; ++i) {
      const int digital = static_cast<int>(rng.uniform_int(spec.dig_min, spec.dig_max));
      samples.push_back(spec.physical_from_digital(digital));
    }
    rec.samples.push_back(std::move(samples));
  }
  return rec;
}

}  // namespace preictal::testutil
