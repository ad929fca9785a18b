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

#include <cstdint>
#include <string>
#include <vector>

namespace preictal {

struct PlannedSeizure {
  int file_index = 0;
  std::int64_t start_s = 0;  // file-local seconds
  std::int64_t end_s = 0;
};

/// Deterministic synthetic patient: pink-noise background with 3-30 Hz
/// band-limited bursts planted during the declared seizures.
struct SynthSpec {
  std::uint64_t seed = 0;
  int n_files = 2;
  std::int64_t file_duration_s = 3600;
  int n_channels = 23;  // bipolar-style labels
  std::vector<PlannedSeizure> seizures;
  double background_uv = 12.0;     // background RMS per channel
  double seizure_boost = 8.0;      // band power gain during seizures
  int duplicate_files = 0;         // extra entries sharing file 0's start time
  bool shuffle_order = false;      // permute summary blocks
  std::int64_t start_clock_s = 36000;  // wall clock of the first file, 10:00:00
  std::int64_t gap_s = 0;          // idle seconds between consecutive files
};

struct SynthFile {
  std::string name;
  std::vector<std::uint8_t> bytes;  // complete EDF stream
};

struct SynthDataset {
  std::vector<SynthFile> files;
  std::string summary;
};

/// Byte-deterministic given spec.seed.
SynthDataset generate(const SynthSpec& spec);

/// The 23 default bipolar labels; the first 16 map onto the default roster.
const std::vector<std::string>& synth_channel_labels();

}  // namespace preictal
