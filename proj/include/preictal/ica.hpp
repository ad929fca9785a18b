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
#include <string>
#include <vector>

#include "preictal/segmentation.hpp"

namespace preictal {

enum class IcaNonlinearity { logcosh, cube };

struct IcaConfig {
  int n_components = 10;
  IcaNonlinearity nonlinearity = IcaNonlinearity::logcosh;
  double logcosh_alpha = 1.0;
  int max_iterations = 200;
  double tolerance = 1e-4;
  std::uint64_t seed = 0;
};

/// Fitted whitening + unmixing. Components are ordered by descending
/// reconstructed-signal variance and sign-fixed so each component's largest
/// |sample| on the fit data is positive.
struct IcaModel {
  Eigen::VectorXd channel_means;      // n_channels
  Eigen::MatrixXd whitening;          // n_components x n_channels
  Eigen::MatrixXd unmixing;           // n_components x n_components, orthogonal
  bool converged = true;
  int iterations_used = 0;

  Eigen::Index n_components() const { return unmixing.rows(); }
  Eigen::Index n_channels() const { return whitening.cols(); }
  /// Combined map from centered channel space to component space.
  Eigen::MatrixXd component_map() const { return unmixing * whitening; }
};

struct ComponentAttribution {
  int component = 0;
  std::string channel;
  double similarity = 0.0;  // |cosine|, in [0, 1]
};

using ChannelAttribution = std::vector<ComponentAttribution>;

struct WhitenResult {
  Eigen::MatrixXd whitened;        // n_components x T, unit variance, zero mean
  Eigen::VectorXd channel_means;   // n_channels
  Eigen::MatrixXd whitening;       // n_components x n_channels
  Eigen::VectorXd eigenvalues;     // top n_components, descending
};

/// Centers channels, eigendecomposes the covariance, and projects onto the
/// top principal directions scaled to unit variance (denominator T-1).
WhitenResult whiten(const Eigen::MatrixXd& data, int n_components);

/// Symmetric fixed-point FastICA on whitened data; deterministic given seed.
/// Hitting max_iterations flags the model non-converged instead of failing.
IcaModel fit_ica(const Eigen::MatrixXd& data, const IcaConfig& config);

/// Applies (unmixing * whitening)(x - means) to each epoch.
std::vector<Epoch> transform_epochs(const std::vector<Epoch>& epochs,
                                    const IcaModel& model);
Epoch transform_epoch(const Epoch& epoch, const IcaModel& model);

double cosine_similarity(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

/// For each component, the channel whose centered time course has the highest
/// |cosine| with the component's time course. Ties break by roster order; two
/// components may claim the same channel.
ChannelAttribution attribute_channels(const IcaModel& model,
                                      const Eigen::MatrixXd& data,
                                      const std::vector<std::string>& channel_labels);

}  // namespace preictal
