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

#include "preictal/ica.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "preictal/error.hpp"
#include "preictal/rng.hpp"

namespace preictal {

namespace {

// W <- (W W^T)^{-1/2} W, via the eigendecomposition of the symmetric W W^T.
Eigen::MatrixXd symmetric_decorrelate(const Eigen::MatrixXd& w) {
  const Eigen::MatrixXd wwt = w * w.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(wwt);
  const Eigen::VectorXd inv_sqrt =
      es.eigenvalues().cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
  return es.eigenvectors() * inv_sqrt.asDiagonal() *
         es.eigenvectors().transpose() * w;
}

}  // namespace

WhitenResult whiten(const Eigen::MatrixXd& data, int n_components) {
  const Eigen::Index n_channels = data.rows();
  const Eigen::Index t = data.cols();
  if (n_components < 1 || n_components > n_channels) {
    throw Error(errc::shape_mismatch,
                "cannot keep " + std::to_string(n_components) + " components of " +
                    std::to_string(n_channels) + " channels");
  }
  if (t <= n_channels) {
    throw Error(errc::shape_mismatch,
                "need more samples than channels, got T=" + std::to_string(t));
  }

  WhitenResult r;
  r.channel_means = data.rowwise().mean();
  const Eigen::MatrixXd centered = data.colwise() - r.channel_means;
  const Eigen::MatrixXd cov =
      centered * centered.transpose() / static_cast<double>(t - 1);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);  // eigenvalues ascending
  const double max_eig = es.eigenvalues().maxCoeff();
  int usable = 0;
  for (Eigen::Index i = 0; i < n_channels; ++i) {
    if (es.eigenvalues()(i) > 1e-12 * std::max(max_eig, 0.0)) ++usable;
  }
  if (max_eig <= 0.0 || usable < n_components) {
    throw Error(errc::rank_deficient,
                "only " + std::to_string(usable) + " usable directions for " +
                    std::to_string(n_components) + " components");
  }

  r.eigenvalues.resize(n_components);
  r.whitening.resize(n_components, n_channels);
  for (int k = 0; k < n_components; ++k) {
    const Eigen::Index src = n_channels - 1 - k;  // descending order
    r.eigenvalues(k) = es.eigenvalues()(src);
    r.whitening.row(k) =
        es.eigenvectors().col(src).transpose() / std::sqrt(es.eigenvalues()(src));
  }
  r.whitened = r.whitening * centered;
  return r;
}

IcaModel fit_ica(const Eigen::MatrixXd& data, const IcaConfig& config) {
  WhitenResult wh = whiten(data, config.n_components);
  const Eigen::MatrixXd& z = wh.whitened;
  const auto t = static_cast<double>(z.cols());
  const int nc = config.n_components;

  Rng rng(config.seed);
  Eigen::MatrixXd w(nc, nc);
  for (Eigen::Index i = 0; i < w.rows(); ++i) {
    for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = rng.gaussian();
  }
  w = symmetric_decorrelate(w);

  IcaModel model;
  model.converged = false;
  const double alpha = config.logcosh_alpha;

  for (int iter = 1; iter <= config.max_iterations; ++iter) {
    const Eigen::MatrixXd proj = w * z;  // nc x T

    Eigen::MatrixXd g(proj.rows(), proj.cols());
    Eigen::VectorXd g_prime_mean(nc);
    if (config.nonlinearity == IcaNonlinearity::logcosh) {
      g = (alpha * proj.array()).tanh();
      g_prime_mean =
          alpha * (1.0 - g.array().square()).rowwise().mean().matrix();
    } else {
      g = proj.array().cube();
      g_prime_mean = 3.0 * proj.array().square().rowwise().mean().matrix();
    }

    Eigen::MatrixXd w_new =
        g * z.transpose() / t - g_prime_mean.asDiagonal() * w;
    w_new = symmetric_decorrelate(w_new);

    // max_i |1 - |<w_new_i, w_i>||
    double delta = 0.0;
    for (int i = 0; i < nc; ++i) {
      delta = std::max(delta, std::abs(1.0 - std::abs(w_new.row(i).dot(w.row(i)))));
    }
    w = std::move(w_new);
    model.iterations_used = iter;
    if (delta < config.tolerance) {
      model.converged = true;
      break;
    }
  }

  // Components ordered by the variance each one reconstructs in channel
  // space: mixing column norms of pinv(W*K) = K^+ W^T, with K^+ = E D^{1/2}.
  Eigen::MatrixXd back_map(wh.whitening.cols(), nc);  // n_channels x nc
  for (int k = 0; k < nc; ++k) {
    // whitening row k is e_k^T / sqrt(d_k), so e_k sqrt(d_k) = row_k^T d_k.
    back_map.col(k) = wh.whitening.row(k).transpose() * wh.eigenvalues(k);
  }
  const Eigen::MatrixXd mixing = back_map * w.transpose();
  std::vector<int> order(static_cast<std::size_t>(nc));
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> explained(static_cast<std::size_t>(nc));
  for (int k = 0; k < nc; ++k) {
    explained[static_cast<std::size_t>(k)] = mixing.col(k).squaredNorm();
  }
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return explained[static_cast<std::size_t>(a)] > explained[static_cast<std::size_t>(b)];
  });

  Eigen::MatrixXd w_sorted(nc, nc);
  for (int k = 0; k < nc; ++k) {
    w_sorted.row(k) = w.row(order[static_cast<std::size_t>(k)]);
  }

  // Sign convention: the largest-|value| sample of each component on the fit
  // data is positive.
  const Eigen::MatrixXd sources = w_sorted * z;
  for (int k = 0; k < nc; ++k) {
    Eigen::Index at = 0;
    sources.row(k).cwiseAbs().maxCoeff(&at);
    if (sources(k, at) < 0.0) w_sorted.row(k) = -w_sorted.row(k);
  }

  model.channel_means = std::move(wh.channel_means);
  model.whitening = std::move(wh.whitening);
  model.unmixing = std::move(w_sorted);
  return model;
}

Epoch transform_epoch(const Epoch& epoch, const IcaModel& model) {
  if (epoch.data.rows() != model.n_channels()) {
    throw Error(errc::shape_mismatch,
                "epoch has " + std::to_string(epoch.data.rows()) +
                    " channels, model expects " + std::to_string(model.n_channels()));
  }
  Epoch out;
  out.global_start_s = epoch.global_start_s;
  out.patient_id = epoch.patient_id;
  out.data = model.component_map() * (epoch.data.colwise() - model.channel_means);
  return out;
}

std::vector<Epoch> transform_epochs(const std::vector<Epoch>& epochs,
                                    const IcaModel& model) {
  std::vector<Epoch> out;
  out.reserve(epochs.size());
  const Eigen::MatrixXd map = model.component_map();
  for (const auto& e : epochs) {
    if (e.data.rows() != model.n_channels()) {
      throw Error(errc::shape_mismatch,
                  "epoch has " + std::to_string(e.data.rows()) +
                      " channels, model expects " + std::to_string(model.n_channels()));
    }
    Epoch te;
    te.global_start_s = e.global_start_s;
    te.patient_id = e.patient_id;
    te.data = map * (e.data.colwise() - model.channel_means);
    out.push_back(std::move(te));
  }
  return out;
}

double cosine_similarity(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size()) {
    throw Error(errc::shape_mismatch, "cosine of different-length vectors");
  }
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) {
    throw Error(errc::zero_vector, "cosine similarity of a zero vector");
  }
  return a.dot(b) / (na * nb);
}

ChannelAttribution attribute_channels(const IcaModel& model,
                                      const Eigen::MatrixXd& data,
                                      const std::vector<std::string>& channel_labels) {
  if (data.rows() != model.n_channels() ||
      static_cast<Eigen::Index>(channel_labels.size()) != model.n_channels()) {
    throw Error(errc::shape_mismatch, "attribution data/labels shape mismatch");
  }
  const Eigen::MatrixXd centered = data.colwise() - model.channel_means;
  const Eigen::MatrixXd sources = model.component_map() * centered;

  ChannelAttribution attribution;
  for (Eigen::Index k = 0; k < sources.rows(); ++k) {
    double best = -1.0;
    Eigen::Index best_ch = 0;
    for (Eigen::Index c = 0; c < centered.rows(); ++c) {
      const double sim =
          std::abs(cosine_similarity(centered.row(c).transpose(),
                                     sources.row(k).transpose()));
      if (sim > best) {  // ties keep the earlier (roster-order) channel
        best = sim;
        best_ch = c;
      }
    }
    attribution.push_back({static_cast<int>(k),
                           channel_labels[static_cast<std::size_t>(best_ch)], best});
  }
  return attribution;
}

}  // namespace preictal
