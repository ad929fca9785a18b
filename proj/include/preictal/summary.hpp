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

/// Seizure span on the global (concatenated) patient timeline, seconds,
/// half-open [start_s, end_s).
struct SeizureInterval {
  std::int64_t start_s = 0;
  std::int64_t end_s = 0;
};

/// One file block of a summary, times still wall-clock / file-local.
struct SummaryFileEntry {
  std::string name;
  std::int64_t start_clock_s = 0;  // seconds since midnight (may exceed 24 h)
  std::int64_t end_clock_s = 0;
  std::vector<std::pair<std::int64_t, std::int64_t>> seizures;  // file-local s
};

struct SummaryInfo {
  int sampling_rate_hz = 0;
  std::vector<std::string> channels;  // in declared index order
  std::vector<SummaryFileEntry> files;
};

struct ManifestFile {
  std::string name;
  std::int64_t global_start_s = 0;
  std::int64_t global_end_s = 0;
};

/// Ordered, deduplicated file list with globalized seizure intervals.
struct DatasetManifest {
  std::string patient_id;
  int sampling_rate_hz = 0;
  std::vector<std::string> channel_roster;
  std::vector<ManifestFile> files;
  std::vector<SeizureInterval> seizures;
};

/// Parses the line-oriented summary grammar:
///   Data Sampling Rate: <int> Hz
///   Channel <n>: <label>
///   File Name: <name>
///   File Start Time: <hh:mm:ss>
///   File End Time: <hh:mm:ss>
///   Number of Seizures in File: <int>
///   Seizure Start Time: <int> seconds / Seizure End Time: <int> seconds
/// Blank lines separate file blocks; unrecognized lines are skipped.
SummaryInfo parse_summary(const std::string& text);

/// Deduplicates (same wall-clock start wins first), resolves midnight
/// rollovers, sorts by global start, and globalizes seizure offsets:
/// global = file_global_start + localized offset, integer seconds.
DatasetManifest build_manifest(const SummaryInfo& info);

}  // namespace preictal
