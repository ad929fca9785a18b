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

#include "preictal/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "preictal/edf.hpp"
#include "preictal/error.hpp"
#include "preictal/rng.hpp"
#include "preictal/segmentation.hpp"

namespace preictal {

const std::vector<std::string>& synth_channel_labels() {
  static const std::vector<std::string> labels = {
      "FP1-F7", "F7-T7",  "T7-P7",  "FP1-F3", "F3-C3",   "C3-P3",
      "P3-O1",  "FP2-F4", "F4-C4",  "C4-P4",  "FP2-F8",  "F8-T8",
      "T8-PO8", "P4-O2",  "T7-FT9", "FT9-FT10",
      // Extra channels the montage drops (center line, duplicate suffixes).
      "FZ-CZ",  "CZ-PZ",  "PZ-OZ",  "P7-O1",  "FT10-T8", "P7-T7", "T8-P8"};
  return labels;
}

namespace {

// Voss-McCartney pink noise, 16 rows plus a white term, unit RMS.
class PinkNoise {
 public:
  explicit PinkNoise(std::uint64_t seed) : rng_(seed) {
    for (double& r : rows_) r = rng_.uniform(-0.5, 0.5);
  }

  double next() {
    ++counter_;
    int row = 0;
    std::uint32_t c = counter_;
    while ((c & 1u) == 0u && row < kRows - 1) {
      c >>= 1;
      ++row;
    }
    rows_[row] = rng_.uniform(-0.5, 0.5);
    double sum = rng_.uniform(-0.5, 0.5);
    for (double r : rows_) sum += r;
    return sum / kNorm;
  }

 private:
  static constexpr int kRows = 16;
  // RMS of the sum of 17 independent uniform(-.5,.5) terms.
  static constexpr double kNorm = 1.19023807;  // sqrt(17/12)
  Rng rng_;
  double rows_[kRows];
  std::uint32_t counter_ = 0;
};

// Share of pink-noise RMS that falls inside the 3-30 Hz band at 256 Hz
// (measured against the Welch estimate of this generator).
constexpr double kPinkBandRmsShare = 0.42;

// Fraction of the planted burst power carried by the fixed tone set; the
// remainder is a per-file stochastic band mixture. The tones run only
// through the middle half of each seizure, so a linear readout can spot at
// most that slice of the ictal epochs.
constexpr double kTonePowerShare = 0.45;

// All multiples of 0.2 Hz: these waveforms repeat every 5 s, so every epoch
// on the 5 s grid sees the same phase. Ictal tones sit in the upper band,
// where the pink background is weakest per unit bandwidth.
constexpr double kToneFreqsHz[] = {10.2, 13.4, 16.6, 19.8, 22.6, 25.4, 28.2};
constexpr int kNumTones = 7;

// Steady alpha-like rhythm carried by all non-ictal data and suppressed
// during seizures, mirroring ictal desynchronization. Its RMS is a fixed
// share of the background amplitude.
constexpr double kRhythmFreqsHz[] = {8.2, 9.4};
constexpr int kNumRhythmTones = 2;
constexpr double kRhythmShare = 1.0 / 3.0;

constexpr int kStochasticSines = 24;

std::string format_clock(std::int64_t seconds_in_day) {
  const std::int64_t s = ((seconds_in_day % 86400) + 86400) % 86400;
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%02d:%02d:%02d", static_cast<int>(s / 3600),
                static_cast<int>((s / 60) % 60), static_cast<int>(s % 60));
  return buf;
}

void validate(const SynthSpec& spec) {
  if (spec.n_files < 1 || spec.file_duration_s < kEpochSeconds ||
      spec.n_channels < 1 || spec.background_uv <= 0.0 ||
      spec.seizure_boost <= 1.0 || spec.duplicate_files < 0 || spec.gap_s < 0) {
    throw Error(errc::spec_invalid, "bad synthetic dataset parameters");
  }
  for (const auto& sz : spec.seizures) {
    if (sz.file_index < 0 || sz.file_index >= spec.n_files || sz.start_s < 0 ||
        sz.start_s >= sz.end_s || sz.end_s > spec.file_duration_s) {
      throw Error(errc::spec_invalid,
                  "seizure [" + std::to_string(sz.start_s) + ", " +
                      std::to_string(sz.end_s) + ") does not fit file " +
                      std::to_string(sz.file_index));
    }
  }
}

std::vector<std::string> channel_labels_for(int n_channels) {
  std::vector<std::string> labels = synth_channel_labels();
  if (n_channels <= static_cast<int>(labels.size())) {
    labels.resize(static_cast<std::size_t>(n_channels));
    return labels;
  }
  for (int i = static_cast<int>(labels.size()); i < n_channels; ++i) {
    labels.push_back("X" + std::to_string(i + 1) + "-AUX" + std::to_string(i + 1));
  }
  return labels;
}

}  // namespace

SynthDataset generate(const SynthSpec& spec) {
  validate(spec);
  const auto labels = channel_labels_for(spec.n_channels);
  const auto n_samples =
      static_cast<std::size_t>(spec.file_duration_s) * kSamplingRateHz;

  // Planted burst amplitude, sized so the seizure-average band power is
  // boost x the background band power (pink share plus rhythm). The
  // stochastic part covers the whole seizure; the tones and the rhythm gap
  // cover only its middle half.
  const double band_rms = spec.background_uv * kPinkBandRmsShare;
  const double pink_band_power = band_rms * band_rms;
  const double rhythm_power =
      spec.background_uv * kRhythmShare * spec.background_uv * kRhythmShare;
  const double bg_band_power = pink_band_power + rhythm_power;
  const double coverage = (1.0 - kTonePowerShare) + 0.5 * kTonePowerShare;
  const double add_power =
      std::max((spec.seizure_boost * bg_band_power - pink_band_power -
                0.5 * rhythm_power) / coverage,
               0.0);
  const double add_rms = std::sqrt(add_power);
  const double tone_amp =
      add_rms * std::sqrt(kTonePowerShare) * std::sqrt(2.0 / kNumTones);
  const double stoch_rms = add_rms * std::sqrt(1.0 - kTonePowerShare);

  SynthDataset out;
  for (int f = 0; f < spec.n_files; ++f) {
    // Shared stochastic burst waveform for this file; channels get gains.
    Rng burst_rng(derive_seed(spec.seed, "synth.burst", f));
    std::vector<double> burst_freq(kStochasticSines);
    std::vector<double> burst_phase(kStochasticSines);
    for (int j = 0; j < kStochasticSines; ++j) {
      burst_freq[static_cast<std::size_t>(j)] = burst_rng.uniform(3.0, 30.0);
      burst_phase[static_cast<std::size_t>(j)] = burst_rng.uniform(0.0, 2.0 * M_PI);
    }
    const double burst_amp = stoch_rms * std::sqrt(2.0 / kStochasticSines);

    struct Window {
      std::size_t begin, end;            // burst extent, samples
      std::size_t tone_begin, tone_end;  // middle half carries the tones
    };
    std::vector<Window> windows;
    for (const auto& sz : spec.seizures) {
      if (sz.file_index == f) {
        const auto b = static_cast<std::size_t>(sz.start_s) * kSamplingRateHz;
        const auto e = static_cast<std::size_t>(sz.end_s) * kSamplingRateHz;
        const std::size_t quarter = (e - b) / 4;
        windows.push_back({b, e, b + quarter, e - quarter});
      }
    }

    Recording rec;
    rec.header.version = "0";
    rec.header.patient_id = "chb99 synthetic patient";
    rec.header.recording_id = "file " + std::to_string(f + 1);
    rec.header.start_date = "04.01.10";
    const std::int64_t start_clock =
        spec.start_clock_s + f * (spec.file_duration_s + spec.gap_s);
    std::string t = format_clock(start_clock);
    std::replace(t.begin(), t.end(), ':', '.');
    rec.header.start_time = t;
    rec.header.record_count = static_cast<int>(spec.file_duration_s);
    rec.header.record_duration_s = 1.0;
    rec.header.signal_count = spec.n_channels;
    rec.header.header_bytes = 256 * (spec.n_channels + 1);

    rec.signals.resize(static_cast<std::size_t>(spec.n_channels));
    rec.samples.resize(static_cast<std::size_t>(spec.n_channels));
    for (int c = 0; c < spec.n_channels; ++c) {
      auto& sig = rec.signals[static_cast<std::size_t>(c)];
      sig.label = labels[static_cast<std::size_t>(c)];
      sig.physical_dim = "uV";
      sig.phys_min = -1000.0;
      sig.phys_max = 1000.0;
      sig.dig_min = -32768;
      sig.dig_max = 32767;
      sig.samples_per_record = kSamplingRateHz;

      Rng ch_rng(derive_seed(spec.seed, "synth.chan", f, c));
      PinkNoise pink(derive_seed(spec.seed, "synth.pink", f, c));
      const double gain = ch_rng.uniform(0.75, 1.25);
      const double rhythm_gain = ch_rng.uniform(0.75, 1.25);

      auto& data = rec.samples[static_cast<std::size_t>(c)];
      data.resize(n_samples);
      for (std::size_t k = 0; k < n_samples; ++k) {
        data[k] = spec.background_uv * pink.next();
      }
      // Rhythm and seizures land on the first 16 channels, which survive the
      // montage.
      if (c < 16) {
        const double rhythm_amp = spec.background_uv * kRhythmShare *
                                  std::sqrt(2.0 / kNumRhythmTones);
        auto rhythm_suppressed = [&](std::size_t k) {
          for (const auto& w : windows) {
            if (k >= w.tone_begin && k < w.tone_end) return true;
          }
          return false;
        };
        for (std::size_t k = 0; k < n_samples; ++k) {
          if (rhythm_suppressed(k)) continue;
          const double tsec = static_cast<double>(k) / kSamplingRateHz;
          double v = 0.0;
          for (int j = 0; j < kNumRhythmTones; ++j) {
            v += rhythm_amp * std::sin(2.0 * M_PI * kRhythmFreqsHz[j] * tsec);
          }
          data[k] += rhythm_gain * v;
        }
        for (const auto& w : windows) {
          for (std::size_t k = w.begin; k < w.end; ++k) {
            const double tsec = static_cast<double>(k) / kSamplingRateHz;
            double v = 0.0;
            if (k >= w.tone_begin && k < w.tone_end) {
              for (int j = 0; j < kNumTones; ++j) {
                v += tone_amp * std::sin(2.0 * M_PI * kToneFreqsHz[j] * tsec);
              }
            }
            for (int j = 0; j < kStochasticSines; ++j) {
              v += burst_amp *
                   std::sin(2.0 * M_PI * burst_freq[static_cast<std::size_t>(j)] * tsec +
                            burst_phase[static_cast<std::size_t>(j)]);
            }
            data[k] += gain * v;
          }
        }
      }
      for (double& v : data) v = std::clamp(v, -1000.0, 1000.0);
    }

    char name[32];
    std::snprintf(name, sizeof(name), "chb99_%02d.edf", f + 1);
    out.files.push_back({name, write_edf(rec)});
  }

  // Summary text, grammar-exact.
  struct Block {
    std::string name;
    std::int64_t start_clock, end_clock;
    std::vector<std::pair<std::int64_t, std::int64_t>> seizures;
  };
  std::vector<Block> blocks;
  for (int f = 0; f < spec.n_files; ++f) {
    Block b;
    b.name = out.files[static_cast<std::size_t>(f)].name;
    b.start_clock = spec.start_clock_s + f * (spec.file_duration_s + spec.gap_s);
    b.end_clock = b.start_clock + spec.file_duration_s;
    for (const auto& sz : spec.seizures) {
      if (sz.file_index == f) b.seizures.emplace_back(sz.start_s, sz.end_s);
    }
    blocks.push_back(std::move(b));
  }
  for (int d = 0; d < spec.duplicate_files; ++d) {
    Block b = blocks.front();  // shares file 0's start time
    char name[32];
    std::snprintf(name, sizeof(name), "chb99_dup%02d.edf", d + 1);
    b.name = name;
    b.seizures.clear();
    blocks.push_back(std::move(b));
    out.files.push_back({name, out.files.front().bytes});
  }
  if (spec.shuffle_order) {
    Rng shuffle_rng(derive_seed(spec.seed, "synth.shuffle"));
    shuffle_rng.shuffle(blocks);
  }

  std::string text = "Data Sampling Rate: 256 Hz\n\n";
  for (std::size_t c = 0; c < labels.size(); ++c) {
    text += "Channel " + std::to_string(c + 1) + ": " + labels[c] + "\n";
  }
  text += "\n";
  for (const auto& b : blocks) {
    text += "File Name: " + b.name + "\n";
    text += "File Start Time: " + format_clock(b.start_clock) + "\n";
    text += "File End Time: " + format_clock(b.end_clock) + "\n";
    text += "Number of Seizures in File: " + std::to_string(b.seizures.size()) + "\n";
    for (const auto& [s, e] : b.seizures) {
      text += "Seizure Start Time: " + std::to_string(s) + " seconds\n";
      text += "Seizure End Time: " + std::to_string(e) + " seconds\n";
    }
    text += "\n";
  }
  out.summary = std::move(text);
  return out;
}

}  // namespace preictal
