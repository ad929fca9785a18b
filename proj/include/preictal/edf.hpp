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
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace preictal {

// 256-byte ASCII main header. Field widths are fixed by the format:
// version 8, patient 80, recording 80, date 8 (dd.mm.yy), time 8 (hh.mm.ss),
// header bytes 8, reserved 44, record count 8, record duration 8,
// signal count 4.
struct EdfHeader {
  std::string version = "0";
  std::string patient_id;
  std::string recording_id;
  std::string start_date = "01.01.00";
  std::string start_time = "00.00.00";
  int header_bytes = 0;
  int record_count = 0;
  double record_duration_s = 1.0;
  int signal_count = 0;
};

struct SignalSpec {
  std::string label;
  std::string transducer;
  std::string physical_dim = "uV";
  double phys_min = 0.0;
  double phys_max = 0.0;
  int dig_min = 0;
  int dig_max = 0;
  std::string prefiltering;
  int samples_per_record = 0;

  double gain() const {
    return (phys_max - phys_min) / (static_cast<double>(dig_max) - dig_min);
  }
  double physical_from_digital(int digital) const {
    return (static_cast<double>(digital) - dig_min) * gain() + phys_min;
  }
  /// Nearest representable digital code; caller checks the digital range.
  std::int64_t digital_from_physical(double physical) const {
    return std::llround((physical - phys_min) / gain()) +
           static_cast<std::int64_t>(dig_min);
  }
};

/// One decoded EDF file: header, per-signal specs, and samples in physical
/// units, plus the file's offset in the concatenated patient timeline.
struct Recording {
  EdfHeader header;
  std::vector<SignalSpec> signals;
  std::vector<std::vector<double>> samples;  // [signal][sample], physical units
  double global_start_s = 0.0;
};

/// Decodes a complete EDF byte stream. Never reads past the end of input;
/// malformed input raises TruncatedFile / MalformedHeader / InconsistentSignal.
Recording parse_edf(std::span<const std::uint8_t> bytes);

/// Emits a standards-conformant EDF byte stream. parse_edf(write_edf(r))
/// reproduces r's digital sample block exactly.
std::vector<std::uint8_t> write_edf(const Recording& recording);

}  // namespace preictal
