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

#include <vector>

#include "preictal/segmentation.hpp"

namespace preictal {

struct FilterSpec {
  double low_cut_hz = 1.0;
  double high_cut_hz = 50.0;
  int sampling_rate_hz = kSamplingRateHz;
  int num_taps = 845;  // odd: linear phase with integer group delay
};

/// Linear-phase FIR kernel, taps symmetric about the center.
struct FirKernel {
  std::vector<double> taps;
  int sampling_rate_hz = kSamplingRateHz;

  int half_width() const { return (static_cast<int>(taps.size()) - 1) / 2; }
};

/// Hamming-windowed sinc bandpass (difference of two low-passes), normalized
/// to unit gain at the geometric mean of the band edges.
FirKernel design_bandpass(const FilterSpec& spec);

/// Convolves each channel with the kernel. Group delay is absorbed by
/// reflect padding of half_width samples per side, so output shape equals
/// input shape.
Epoch apply_filter(const Epoch& epoch, const FirKernel& kernel);

/// In-place channel filtering for whole recordings (same contract).
std::vector<double> filter_channel(const std::vector<double>& x,
                                   const FirKernel& kernel);

/// |H(f)| by direct summation, one value per probe frequency.
std::vector<double> frequency_response(const FirKernel& kernel,
                                       const std::vector<double>& freqs_hz);

}  // namespace preictal
