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

struct ConfusionCounts {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t tn = 0;
  std::int64_t fn = 0;

  std::int64_t total() const { return tp + fp + tn + fn; }
};

/// The six classification scores. Any score whose denominator was zero is
/// reported as 0 and listed in degenerate_flags instead of raising.
struct MetricsRecord {
  double precision = 0.0;
  double accuracy = 0.0;
  double specificity = 0.0;
  double sensitivity = 0.0;
  double f1 = 0.0;
  double mcc = 0.0;
  std::vector<std::string> degenerate_flags;
};

/// Five-number summary plus Tukey outliers (outside q1/q3 -+ 1.5*IQR).
/// Whisker min/max exclude the outliers.
struct DistributionSummary {
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
  std::vector<double> outliers;
  std::size_t n = 0;
};

ConfusionCounts confusion_counts(const std::vector<int>& predicted,
                                 const std::vector<int>& actual);

MetricsRecord compute_metrics(const ConfusionCounts& c);

// Quartiles by linear interpolation between order statistics: the quantile at
// p sits at position p*(n-1) in the sorted sample.
DistributionSummary summarize(const std::vector<double>& values);

}  // namespace preictal
