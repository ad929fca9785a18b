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

#include "preictal/models.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "nets.hpp"
#include "preictal/error.hpp"
#include "preictal/rng.hpp"

namespace preictal {

const char* model_kind_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::logistic_regression: return "lr";
    case ModelKind::knn: return "knn";
    case ModelKind::rnn: return "rnn";
    case ModelKind::lstm: return "lstm";
    case ModelKind::cnn: return "cnn";
  }
  return "?";
}

ModelKind model_kind_from_name(const std::string& name) {
  if (name == "lr" || name == "logistic_regression") return ModelKind::logistic_regression;
  if (name == "knn") return ModelKind::knn;
  if (name == "rnn") return ModelKind::rnn;
  if (name == "lstm") return ModelKind::lstm;
  if (name == "cnn") return ModelKind::cnn;
  throw Error(errc::config_error, "unknown model kind '" + name + "'");
}

bool is_gradient_kind(ModelKind kind) { return kind != ModelKind::knn; }

FeatureTensor FeatureTensor::from_epochs(const std::vector<Epoch>& epochs) {
  FeatureTensor t;
  if (epochs.empty()) return t;
  t.n = epochs.size();
  t.channels = static_cast<std::size_t>(epochs[0].data.rows());
  t.timesteps = static_cast<std::size_t>(epochs[0].data.cols());
  t.values.resize(t.n * t.channels * t.timesteps);
  for (std::size_t i = 0; i < t.n; ++i) {
    const Epoch& e = epochs[i];
    if (static_cast<std::size_t>(e.data.rows()) != t.channels ||
        static_cast<std::size_t>(e.data.cols()) != t.timesteps) {
      throw Error(errc::shape_mismatch, "epochs disagree on shape");
    }
    double* dst = t.values.data() + i * t.channels * t.timesteps;
    for (std::size_t c = 0; c < t.channels; ++c) {
      for (std::size_t k = 0; k < t.timesteps; ++k) {
        dst[c * t.timesteps + k] =
            e.data(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(k));
      }
    }
  }
  return t;
}

Standardizer Standardizer::fit(const FeatureView& data) {
  const auto c = static_cast<Eigen::Index>(data.channels());
  Standardizer s;
  s.means = Eigen::VectorXd::Zero(c);
  s.scales = Eigen::VectorXd::Ones(c);
  if (data.count == 0) return s;

  const double count = static_cast<double>(data.count * data.timesteps());
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(c);
  Eigen::VectorXd sq = Eigen::VectorXd::Zero(c);
  for (std::size_t i = 0; i < data.count; ++i) {
    const auto m = data.sample(i);
    sum += m.rowwise().sum();
    sq += m.array().square().matrix().rowwise().sum();
  }
  s.means = sum / count;
  for (Eigen::Index ch = 0; ch < c; ++ch) {
    const double var = sq(ch) / count - s.means(ch) * s.means(ch);
    s.scales(ch) = std::sqrt(std::max(var, 0.0));
    if (s.scales(ch) <= 0.0) s.scales(ch) = 1.0;
  }
  return s;
}

Eigen::MatrixXd Standardizer::apply(const FeatureView& data, std::size_t i) const {
  Eigen::MatrixXd m = data.sample(i);
  m.array().colwise() -= means.array();
  m.array().colwise() /= scales.array();
  return m;
}

namespace {

std::pair<double, double> class_weights(const std::vector<int>& labels, bool balanced) {
  if (!balanced) return {1.0, 1.0};
  const auto n = static_cast<double>(labels.size());
  double n1 = 0.0;
  for (int y : labels) n1 += y != 0 ? 1.0 : 0.0;
  const double n0 = n - n1;
  return {n / (2.0 * n0), n / (2.0 * n1)};
}

void validate_spec(const ModelSpec& spec) {
  if (spec.kind == ModelKind::knn) {
    if (spec.knn_k < 1) throw Error(errc::config_error, "k must be >= 1");
    return;
  }
  if (spec.train_epochs < 1 || spec.batch_size < 1 || !(spec.learning_rate > 0.0)) {
    throw Error(errc::config_error, "bad training hyperparameters");
  }
  if ((spec.kind == ModelKind::rnn || spec.kind == ModelKind::lstm) &&
      (spec.hidden_size < 1 || spec.time_stride < 1)) {
    throw Error(errc::config_error, "bad recurrent hyperparameters");
  }
  if (spec.kind == ModelKind::cnn && spec.cnn_blocks.empty()) {
    throw Error(errc::config_error, "cnn needs at least one block");
  }
}

constexpr double kGradClipNorm = 5.0;

TrainedModel fit_gradient_kind(const ModelSpec& spec, const FeatureView& train,
                               const std::vector<int>& labels) {
  bool has0 = false;
  bool has1 = false;
  for (int y : labels) (y != 0 ? has1 : has0) = true;
  if (!has0 || !has1) {
    throw Error(errc::single_class_training,
                "gradient training needs both classes present");
  }

  TrainedModel model;
  model.spec = spec;
  model.channels = train.channels();
  model.timesteps = train.timesteps();
  model.standardization = Standardizer::fit(train);

  auto net = detail::make_net(spec, train.channels(), train.timesteps());
  Rng rng(spec.seed);
  net->init_params(rng);

  const auto [w0, w1] = class_weights(labels, spec.balanced_class_weights);
  const bool clip = spec.kind == ModelKind::rnn || spec.kind == ModelKind::lstm;

  std::vector<std::size_t> order(train.count);
  std::iota(order.begin(), order.end(), 0);

  std::vector<double> grad(net->params().size());
  for (int epoch = 0; epoch < spec.train_epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0.0;
    std::size_t seen = 0;
    for (std::size_t at = 0; at < order.size(); at += static_cast<std::size_t>(spec.batch_size)) {
      const std::size_t b = std::min(order.size() - at,
                                     static_cast<std::size_t>(spec.batch_size));
      std::vector<Eigen::MatrixXd> xs;
      std::vector<int> ys;
      std::vector<double> ws;
      xs.reserve(b);
      for (std::size_t j = 0; j < b; ++j) {
        const std::size_t idx = order[at + j];
        xs.push_back(model.standardization.apply(train, idx));
        ys.push_back(labels[idx]);
        ws.push_back(labels[idx] != 0 ? w1 : w0);
      }

      std::fill(grad.begin(), grad.end(), 0.0);
      const double loss = net->loss(xs, ys, ws, &grad);
      if (!std::isfinite(loss)) {
        throw Error(errc::non_finite_loss,
                    "training diverged at epoch " + std::to_string(epoch) +
                        " after " + std::to_string(model.training_log.size()) +
                        " logged epochs");
      }
      epoch_loss += loss * static_cast<double>(b);
      seen += b;

      if (clip) {
        double norm_sq = 0.0;
        for (double g : grad) norm_sq += g * g;
        const double norm = std::sqrt(norm_sq);
        if (norm > kGradClipNorm) {
          const double scale = kGradClipNorm / norm;
          for (double& g : grad) g *= scale;
        }
      }
      auto& params = net->params();
      for (std::size_t i = 0; i < params.size(); ++i) {
        params[i] -= spec.learning_rate * grad[i];
      }
    }
    model.training_log.push_back(epoch_loss / static_cast<double>(seen));
  }

  model.params = net->params();
  return model;
}

TrainedModel fit_knn(const ModelSpec& spec, const FeatureView& train,
                     const std::vector<int>& labels) {
  TrainedModel model;
  model.spec = spec;
  model.channels = train.channels();
  model.timesteps = train.timesteps();
  model.standardization = Standardizer::fit(train);

  const auto d = static_cast<Eigen::Index>(train.channels() * train.timesteps());
  model.knn_features.resize(static_cast<Eigen::Index>(train.count), d);
  for (std::size_t i = 0; i < train.count; ++i) {
    const Eigen::MatrixXd std_sample = model.standardization.apply(train, i);
    // Row layout matches the sample's channel-major memory order.
    for (Eigen::Index c = 0; c < std_sample.rows(); ++c) {
      for (Eigen::Index k = 0; k < std_sample.cols(); ++k) {
        model.knn_features(static_cast<Eigen::Index>(i), c * std_sample.cols() + k) =
            std_sample(c, k);
      }
    }
  }
  model.knn_labels = labels;
  return model;
}

}  // namespace

TrainedModel fit(const ModelSpec& spec, const FeatureView& train,
                 const std::vector<int>& labels) {
  validate_spec(spec);
  if (train.count == 0 || labels.size() != train.count) {
    throw Error(errc::length_mismatch, "training labels do not match samples");
  }
  if (spec.kind == ModelKind::knn) return fit_knn(spec, train, labels);
  return fit_gradient_kind(spec, train, labels);
}

namespace {

std::vector<Prediction> predict_knn(const TrainedModel& model, const FeatureView& samples) {
  const auto n_train = static_cast<std::size_t>(model.knn_features.rows());
  const auto k = static_cast<std::size_t>(
      std::min<std::size_t>(static_cast<std::size_t>(model.spec.knn_k), n_train));

  std::vector<Prediction> out;
  out.reserve(samples.count);
  std::vector<std::pair<double, std::size_t>> dist(n_train);
  Eigen::VectorXd q(model.knn_features.cols());
  for (std::size_t i = 0; i < samples.count; ++i) {
    const Eigen::MatrixXd std_sample = model.standardization.apply(samples, i);
    for (Eigen::Index c = 0; c < std_sample.rows(); ++c) {
      for (Eigen::Index t = 0; t < std_sample.cols(); ++t) {
        q(c * std_sample.cols() + t) = std_sample(c, t);
      }
    }
    for (std::size_t j = 0; j < n_train; ++j) {
      dist[j] = {(model.knn_features.row(static_cast<Eigen::Index>(j)).transpose() - q)
                     .squaredNorm(),
                 j};
    }
    // Distance ties break toward the lower training index.
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k),
                      dist.end());
    double votes = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      votes += model.knn_labels[dist[j].second] != 0 ? 1.0 : 0.0;
    }
    Prediction p;
    p.probability = votes / static_cast<double>(k);
    p.label = p.probability >= 0.5 ? 1 : 0;
    out.push_back(p);
  }
  return out;
}

}  // namespace

std::vector<Prediction> predict(const TrainedModel& model, const FeatureView& samples) {
  if (samples.channels() != model.channels || samples.timesteps() != model.timesteps) {
    throw Error(errc::shape_mismatch,
                "prediction input is " + std::to_string(samples.channels()) + "x" +
                    std::to_string(samples.timesteps()) + ", model expects " +
                    std::to_string(model.channels) + "x" + std::to_string(model.timesteps));
  }
  if (model.spec.kind == ModelKind::knn) return predict_knn(model, samples);

  auto net = detail::make_net(model.spec, model.channels, model.timesteps);
  if (net->params().size() != model.params.size()) {
    throw Error(errc::corrupt_model, "parameter count mismatch");
  }
  net->params() = model.params;

  std::vector<Prediction> out;
  out.reserve(samples.count);
  for (std::size_t i = 0; i < samples.count; ++i) {
    const double z = net->logit(model.standardization.apply(samples, i));
    Prediction p;
    p.probability = detail::sigmoid(z);
    p.label = p.probability >= 0.5 ? 1 : 0;
    out.push_back(p);
  }
  return out;
}

double gradient_check(const ModelSpec& spec, const FeatureView& batch,
                      const std::vector<int>& labels) {
  if (!is_gradient_kind(spec.kind)) {
    throw Error(errc::config_error, "gradient check needs a gradient-trained kind");
  }
  if (batch.count == 0 || labels.size() != batch.count) {
    throw Error(errc::length_mismatch, "batch labels do not match samples");
  }

  auto net = detail::make_net(spec, batch.channels(), batch.timesteps());
  Rng rng(spec.seed);
  net->init_params(rng);

  std::vector<Eigen::MatrixXd> xs;
  std::vector<double> ws(batch.count, 1.0);
  for (std::size_t i = 0; i < batch.count; ++i) {
    xs.push_back(Eigen::MatrixXd(batch.sample(i)));
  }

  std::vector<double> analytic(net->params().size(), 0.0);
  net->loss(xs, labels, ws, &analytic);

  constexpr double kStep = 1e-5;
  double worst = 0.0;
  auto& params = net->params();
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double saved = params[i];
    params[i] = saved + kStep;
    const double up = net->loss(xs, labels, ws, nullptr);
    params[i] = saved - kStep;
    const double down = net->loss(xs, labels, ws, nullptr);
    params[i] = saved;
    const double numeric = (up - down) / (2.0 * kStep);
    const double rel = std::abs(analytic[i] - numeric) /
                       std::max({std::abs(analytic[i]), std::abs(numeric), 1e-8});
    worst = std::max(worst, rel);
  }
  return worst;
}

}  // namespace preictal
