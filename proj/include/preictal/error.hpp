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

#include <stdexcept>
#include <string>

namespace preictal {

enum class errc {
  // edf
  truncated_file,
  malformed_header,
  inconsistent_signal,
  value_out_of_range,
  // annotation summary / manifest
  grammar_error,
  negative_duration,
  overlapping_files,
  // segmentation
  missing_channel,
  degenerate_split,
  // dsp
  invalid_band,
  frequency_out_of_range,
  // ica
  rank_deficient,
  shape_mismatch,
  zero_vector,
  // classifiers
  single_class_training,
  non_finite_loss,
  version_mismatch,
  corrupt_model,
  // metrics
  length_mismatch,
  // synth
  spec_invalid,
  // cli / experiment
  config_error,
  io_error,
};

const char* errc_name(errc c);

/// Exception carrying a machine-checkable error code alongside the message.
class Error : public std::runtime_error {
 public:
  Error(errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message),
        code_(code) {}

  errc code() const { return code_; }

 private:
  errc code_;
};

}  // namespace preictal
