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
#include <span>
#include <string>
#include <vector>

#include "preictal/segmentation.hpp"

namespace preictal {

enum class ModelKind { logistic_regression, knn, rnn, lstm, cnn };

const char* model_kind_name(ModelKind kind);
ModelKind model_kind_from_name(const std::string& name);
bool is_gradient_kind(ModelKind kind);

struct CnnBlock {
  int filters = 0;
  int kernel = 0;
  int pool = 0;
};

struct ModelSpec {
  ModelKind kind = ModelKind::logistic_regression;
  int hidden_size = 32;          // rnn / lstm
  int time_stride = 4;           // recurrent input downsampling (1280 -> 320)
  int knn_k = 5;
  std::vector<CnnBlock> cnn_blocks = {{16, 7, 4}, {32, 5, 4}};
  std::uint64_t seed = 0;
  int train_epochs = 10;
  double learning_rate = 1e-3;
  int batch_size = 32;
  bool balanced_class_weights = false;
};

/// Dense (n_samples x channels x timesteps) block, channel-major per sample.
struct FeatureTensor {
  std::size_t n = 0;
  std::size_t channels = 0;
  std::size_t timesteps = 0;
  std::vector<double> values;

  static FeatureTensor from_epochs(const std::vector<Epoch>& epochs);

  const double* sample_ptr(std::size_t i) const {
    return values.data() + i * channels * timesteps;
  }
  /// (channels x timesteps) view of one sample.
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
  sample(std::size_t i) const {
    return {sample_ptr(i), static_cast<Eigen::Index>(channels),
            static_cast<Eigen::Index>(timesteps)};
  }
};

/// Contiguous sample range of a tensor; avoids copying per-split tensors.
struct FeatureView {
  const FeatureTensor* tensor = nullptr;
  std::size_t offset = 0;
  std::size_t count = 0;

  FeatureView() = default;
  FeatureView(const FeatureTensor& t) : tensor(&t), offset(0), count(t.n) {}
  FeatureView(const FeatureTensor& t, std::size_t off, std::size_t cnt)
      : tensor(&t), offset(off), count(cnt) {}

  std::size_t channels() const { return tensor->channels; }
  std::size_t timesteps() const { return tensor->timesteps; }
  auto sample(std::size_t i) const { return tensor->sample(offset + i); }
};

/// Per-channel mean/scale, fit on the training split only.
struct Standardizer {
  Eigen::VectorXd means;
  Eigen::VectorXd scales;  // always > 0

  static Standardizer fit(const FeatureView& data);
  /// Returns the standardized (channels x timesteps) matrix of one sample.
  Eigen::MatrixXd apply(const FeatureView& data, std::size_t i) const;
};

struct Prediction {
  double probability = 0.0;
  int label = 0;  // probability >= 0.5
};

struct TrainedModel {
  ModelSpec spec;
  std::size_t channels = 0;
  std::size_t timesteps = 0;
  Standardizer standardization;
  std::vector<double> training_log;  // loss per training epoch
  std::vector<double> params;        // gradient-trained kinds
  // k-NN keeps its standardized training set verbatim.
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> knn_features;
  std::vector<int> knn_labels;
};

TrainedModel fit(const ModelSpec& spec, const FeatureView& train,
                 const std::vector<int>& labels);

std::vector<Prediction> predict(const TrainedModel& model, const FeatureView& samples);

/// Max over parameters of |analytic - numeric| / max(|analytic|, |numeric|,
/// 1e-8), numeric by central differences with step 1e-5.
double gradient_check(const ModelSpec& spec, const FeatureView& batch,
                      const std::vector<int>& labels);

std::vector<std::uint8_t> save_model(const TrainedModel& model);
TrainedModel load_model(std::span<const std::uint8_t> bytes);

}  // namespace preictal
