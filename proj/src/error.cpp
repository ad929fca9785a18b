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

#include "preictal/error.hpp"

namespace preictal {

const char* errc_name(errc c) {
  switch (c) {
    case errc::truncated_file: return "TruncatedFile";
    case errc::malformed_header: return "MalformedHeader";
    case errc::inconsistent_signal: return "InconsistentSignal";
    case errc::value_out_of_range: return "ValueOutOfRange";
    case errc::grammar_error: return "GrammarError";
    case errc::negative_duration: return "NegativeDuration";
    case errc::overlapping_files: return "OverlappingFiles";
    case errc::missing_channel: return "MissingChannel";
    case errc::degenerate_split: return "DegenerateSplit";
    case errc::invalid_band: return "InvalidBand";
    case errc::frequency_out_of_range: return "FrequencyOutOfRange";
    case errc::rank_deficient: return "RankDeficient";
    case errc::shape_mismatch: return "ShapeMismatch";
    case errc::zero_vector: return "ZeroVector";
    case errc::single_class_training: return "SingleClassTraining";
    case errc::non_finite_loss: return "NonFiniteLoss";
    case errc::version_mismatch: return "VersionMismatch";
    case errc::corrupt_model: return "CorruptModel";
    case errc::length_mismatch: return "LengthMismatch";
    case errc::spec_invalid: return "SpecInvalid";
    case errc::config_error: return "ConfigError";
    case errc::io_error: return "IoError";
  }
  return "UnknownError";
}

}  // namespace preictal
