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

#include "preictal/segmentation.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>

#include "preictal/error.hpp"
#include "preictal/rng.hpp"

namespace preictal {

const std::vector<std::string>& default_channel_roster() {
  static const std::vector<std::string> roster = {
      "F7", "T7", "P7",  "F3", "C3",  "P3",   "O1", "F4",
      "C4", "P4", "F8",  "T8", "PO8", "O2",   "FT9", "FT10"};
  return roster;
}

namespace {

std::string to_upper(std::string s) {
  for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

std::string montage_label(const std::string& source, const MontageSpec& spec) {
  if (auto it = spec.rename_map.find(source); it != spec.rename_map.end()) {
    return it->second;
  }
  const auto hyphen = source.find('-');
  if (hyphen == std::string::npos) return to_upper(source);
  return to_upper(source.substr(hyphen + 1));
}

}  // namespace

Recording apply_montage(const Recording& recording, const MontageSpec& spec) {
  // First source channel renaming to each roster label claims it.
  std::map<std::string, std::size_t> claimed;
  for (std::size_t i = 0; i < recording.signals.size(); ++i) {
    const std::string renamed = montage_label(recording.signals[i].label, spec);
    claimed.emplace(renamed, i);
  }

  Recording out;
  out.header = recording.header;
  out.global_start_s = recording.global_start_s;
  for (const auto& want : spec.keep_channels) {
    const auto it = claimed.find(want);
    if (it == claimed.end()) {
      throw Error(errc::missing_channel,
                  "no source channel maps to roster label '" + want + "'");
    }
    SignalSpec s = recording.signals[it->second];
    s.label = want;
    out.signals.push_back(std::move(s));
    out.samples.push_back(recording.samples[it->second]);
  }
  out.header.signal_count = static_cast<int>(out.signals.size());
  out.header.header_bytes = 256 * (out.header.signal_count + 1);
  return out;
}

std::vector<Epoch> segment_epochs(const Recording& recording,
                                  const std::string& patient_id) {
  const std::size_t n_channels = recording.samples.size();
  std::vector<Epoch> epochs;
  if (n_channels == 0) return epochs;

  std::size_t n_samples = recording.samples[0].size();
  for (const auto& ch : recording.samples) {
    n_samples = std::min(n_samples, ch.size());
  }

  const std::size_t n_epochs = n_samples / kEpochSamples;
  epochs.reserve(n_epochs);
  const auto base_start = static_cast<std::int64_t>(std::llround(recording.global_start_s));
  for (std::size_t k = 0; k < n_epochs; ++k) {
    Epoch e;
    e.data.resize(static_cast<Eigen::Index>(n_channels), kEpochSamples);
    for (std::size_t c = 0; c < n_channels; ++c) {
      for (int t = 0; t < kEpochSamples; ++t) {
        e.data(static_cast<Eigen::Index>(c), t) =
            recording.samples[c][k * kEpochSamples + static_cast<std::size_t>(t)];
      }
    }
    e.global_start_s = base_start + static_cast<std::int64_t>(k) * kEpochSeconds;
    e.patient_id = patient_id;
    epochs.push_back(std::move(e));
  }
  return epochs;
}

std::vector<int> generate_labels(const std::vector<Epoch>& epochs,
                                 const std::vector<SeizureInterval>& seizures,
                                 const HorizonConfig& horizon) {
  std::vector<int> labels(epochs.size(), 0);
  for (std::size_t i = 0; i < epochs.size(); ++i) {
    const std::int64_t w_begin = epochs[i].global_start_s + horizon.horizon_s;
    const std::int64_t w_end = w_begin + kEpochSeconds;
    for (const auto& sz : seizures) {
      if (w_begin < sz.end_s && sz.start_s < w_end) {
        labels[i] = 1;
        break;
      }
    }
  }
  return labels;
}

LabeledDataset trim_after_last_seizure(LabeledDataset dataset,
                                       const std::vector<SeizureInterval>& seizures) {
  if (seizures.empty()) return dataset;
  std::int64_t last_end = seizures.front().end_s;
  for (const auto& sz : seizures) last_end = std::max(last_end, sz.end_s);

  LabeledDataset out;
  out.horizon = dataset.horizon;
  for (std::size_t i = 0; i < dataset.epochs.size(); ++i) {
    if (dataset.epochs[i].global_start_s + dataset.horizon.horizon_s < last_end) {
      out.epochs.push_back(std::move(dataset.epochs[i]));
      out.labels.push_back(dataset.labels[i]);
    }
  }
  return out;
}

std::pair<LabeledDataset, LabeledDataset> split_train_test(
    const LabeledDataset& dataset, double train_fraction,
    std::optional<std::uint64_t> shuffle_seed) {
  const std::size_t n = dataset.epochs.size();
  if (n == 0) {
    throw Error(errc::degenerate_split, "empty dataset");
  }
  // The nudge keeps floor() exact when fraction*N is a whole number that
  // floating point lands a hair under (e.g. 200000/230000 * 230000).
  const auto n_train = static_cast<std::size_t>(
      std::floor(train_fraction * static_cast<double>(n) + 1e-9));
  if (n_train == 0 || n_train >= n) {
    throw Error(errc::degenerate_split,
                "split " + std::to_string(n_train) + "/" +
                    std::to_string(n - n_train) + " leaves one side empty");
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  if (shuffle_seed) {
    Rng rng(*shuffle_seed);
    rng.shuffle(order);
  }

  // Chronological order is kept inside each side.
  std::vector<std::size_t> train_idx(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  std::vector<std::size_t> test_idx(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  if (shuffle_seed) {
    std::sort(train_idx.begin(), train_idx.end());
    std::sort(test_idx.begin(), test_idx.end());
  }

  auto take = [&](const std::vector<std::size_t>& idx) {
    LabeledDataset part;
    part.horizon = dataset.horizon;
    part.epochs.reserve(idx.size());
    part.labels.reserve(idx.size());
    for (std::size_t i : idx) {
      part.epochs.push_back(dataset.epochs[i]);
      part.labels.push_back(dataset.labels[i]);
    }
    return part;
  };
  return {take(train_idx), take(test_idx)};
}

}  // namespace preictal
