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

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "preictal/edf.hpp"
#include "preictal/summary.hpp"

namespace preictal {

inline constexpr int kEpochSeconds = 5;
inline constexpr int kSamplingRateHz = 256;
inline constexpr int kEpochSamples = kEpochSeconds * kSamplingRateHz;  // 1280

/// The 16 retained channels, in output order.
const std::vector<std::string>& default_channel_roster();

struct MontageSpec {
  std::vector<std::string> keep_channels = default_channel_roster();
  // Source label -> montage label. Labels not listed here fall back to the
  // text after the hyphen, uppercased ("FP1-F7" -> "F7").
  std::map<std::string, std::string> rename_map;
};

/// One 5-second window: channels x 1280 samples, physical units.
struct Epoch {
  Eigen::MatrixXd data;
  std::int64_t global_start_s = 0;
  std::string patient_id;
};

/// Lead time between an epoch and the future window it predicts.
struct HorizonConfig {
  std::int64_t horizon_s = 0;
};

struct LabeledDataset {
  std::vector<Epoch> epochs;
  std::vector<int> labels;
  HorizonConfig horizon;
};

/// Keeps exactly the roster channels, in roster order; everything else is
/// dropped. Raises MissingChannel when a roster label has no source.
Recording apply_montage(const Recording& recording, const MontageSpec& spec);

/// Contiguous non-overlapping 5 s windows from the recording start; a
/// trailing partial window is discarded.
std::vector<Epoch> segment_epochs(const Recording& recording,
                                  const std::string& patient_id = "");

/// label = 1 iff [start + horizon, start + horizon + 5) intersects a seizure.
/// With horizon 0 this is plain "epoch overlaps a seizure".
std::vector<int> generate_labels(const std::vector<Epoch>& epochs,
                                 const std::vector<SeizureInterval>& seizures,
                                 const HorizonConfig& horizon);

/// Drops every epoch whose shifted prediction window starts at or after the
/// last seizure's end. No seizures: dataset returned unchanged.
LabeledDataset trim_after_last_seizure(LabeledDataset dataset,
                                       const std::vector<SeizureInterval>& seizures);

/// Chronological split: first floor(train_fraction * N) epochs train, rest
/// test. Optional seed switches to a shuffled split.
std::pair<LabeledDataset, LabeledDataset> split_train_test(
    const LabeledDataset& dataset, double train_fraction,
    std::optional<std::uint64_t> shuffle_seed = std::nullopt);

/// 200000 / 230000: the default chronological train share.
inline constexpr double kDefaultTrainFraction = 200000.0 / 230000.0;

}  // namespace preictal
