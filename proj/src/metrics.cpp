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

#include "preictal/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "preictal/error.hpp"

namespace preictal {

ConfusionCounts confusion_counts(const std::vector<int>& predicted,
                                 const std::vector<int>& actual) {
  if (predicted.size() != actual.size()) {
    throw Error(errc::length_mismatch,
                "predicted has " + std::to_string(predicted.size()) +
                    " entries, actual has " + std::to_string(actual.size()));
  }
  if (predicted.empty()) {
    throw Error(errc::length_mismatch, "empty prediction vector");
  }
  ConfusionCounts c;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const bool p = predicted[i] != 0;
    const bool a = actual[i] != 0;
    if (p && a) ++c.tp;
    else if (p && !a) ++c.fp;
    else if (!p && !a) ++c.tn;
    else ++c.fn;
  }
  return c;
}

namespace {

double ratio_or_flag(double num, double den, const char* name,
                     std::vector<std::string>& flags) {
  if (den == 0.0) {
    flags.emplace_back(name);
    return 0.0;
  }
  return num / den;
}

}  // namespace

MetricsRecord compute_metrics(const ConfusionCounts& c) {
  MetricsRecord r;
  const auto tp = static_cast<double>(c.tp);
  const auto fp = static_cast<double>(c.fp);
  const auto tn = static_cast<double>(c.tn);
  const auto fn = static_cast<double>(c.fn);

  r.precision = ratio_or_flag(tp, tp + fp, "precision", r.degenerate_flags);
  r.accuracy = ratio_or_flag(tp + tn, tp + fp + tn + fn, "accuracy", r.degenerate_flags);
  r.specificity = ratio_or_flag(tn, tn + fp, "specificity", r.degenerate_flags);
  r.sensitivity = ratio_or_flag(tp, tp + fn, "sensitivity", r.degenerate_flags);
  r.f1 = ratio_or_flag(2.0 * r.precision * r.sensitivity,
                       r.precision + r.sensitivity, "f1", r.degenerate_flags);

  const double mcc_den =
      std::sqrt((tp + fp) * (tp + fn) * (tn + fp) * (tn + fn));
  if (mcc_den == 0.0) {
    r.degenerate_flags.emplace_back("mcc");
    r.mcc = 0.0;
  } else {
    r.mcc = (tp * tn - fp * fn) / mcc_den;
  }
  return r;
}

namespace {

double quantile_sorted(const std::vector<double>& sorted, double p) {
  const std::size_t n = sorted.size();
  if (n == 1) return sorted[0];
  const double pos = p * static_cast<double>(n - 1);
  const auto lo = static_cast<std::size_t>(pos);
  if (lo + 1 >= n) return sorted[n - 1];
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

}  // namespace

DistributionSummary summarize(const std::vector<double>& values) {
  if (values.empty()) {
    throw Error(errc::length_mismatch, "summarize needs at least one value");
  }
  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());

  DistributionSummary s;
  s.n = sorted.size();
  s.q1 = quantile_sorted(sorted, 0.25);
  s.median = quantile_sorted(sorted, 0.5);
  s.q3 = quantile_sorted(sorted, 0.75);

  const double iqr = s.q3 - s.q1;
  const double lo_fence = s.q1 - 1.5 * iqr;
  const double hi_fence = s.q3 + 1.5 * iqr;

  s.min = s.q1;
  s.max = s.q3;
  bool any_inlier = false;
  for (double v : sorted) {
    if (v < lo_fence || v > hi_fence) {
      s.outliers.push_back(v);
    } else {
      if (!any_inlier || v < s.min) s.min = v;
      if (!any_inlier || v > s.max) s.max = v;
      any_inlier = true;
    }
  }
  return s;
}

}  // namespace preictal
