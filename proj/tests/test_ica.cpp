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

#include <doctest.h>

#include <cmath>

#include "preictal/ica.hpp"
#include "preictal/rng.hpp"
#include "test_util.hpp"

using namespace preictal;

namespace {

double corr(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const Eigen::VectorXd ca = a.array() - a.mean();
  const Eigen::VectorXd cb = b.array() - b.mean();
  return ca.dot(cb) / (ca.norm() * cb.norm());
}

// sine 5 Hz, square 11 Hz, sawtooth 17 Hz: the classic separable trio.
Eigen::MatrixXd three_sources(int t_samples) {
  Eigen::MatrixXd s(3, t_samples);
  for (int t = 0; t < t_samples; ++t) {
    const double sec = static_cast<double>(t) / 256.0;
    s(0, t) = std::sin(2.0 * M_PI * 5.0 * sec);
    s(1, t) = std::sin(2.0 * M_PI * 11.0 * sec) >= 0.0 ? 1.0 : -1.0;
    const double phase = 17.0 * sec;
    s(2, t) = 2.0 * (phase - std::floor(phase + 0.5));
  }
  return s;
}

// Best |correlation| match per source over components, greedy without reuse.
double worst_match(const Eigen::MatrixXd& sources, const Eigen::MatrixXd& components) {
  std::vector<bool> used(static_cast<std::size_t>(components.rows()), false);
  double worst = 1.0;
  for (Eigen::Index s = 0; s < sources.rows(); ++s) {
    double best = 0.0;
    Eigen::Index best_k = -1;
    for (Eigen::Index k = 0; k < components.rows(); ++k) {
      if (used[static_cast<std::size_t>(k)]) continue;
      const double c = std::abs(corr(sources.row(s).transpose(),
                                     components.row(k).transpose()));
      if (c > best) {
        best = c;
        best_k = k;
      }
    }
    if (best_k >= 0) used[static_cast<std::size_t>(best_k)] = true;
    worst = std::min(worst, best);
  }
  return worst;
}

}  // namespace

TEST_CASE("whitened output has identity covariance") {
  Rng rng(12);
  Eigen::MatrixXd data(16, 4000);
  for (Eigen::Index i = 0; i < data.rows(); ++i) {
    for (Eigen::Index j = 0; j < data.cols(); ++j) {
      data(i, j) = rng.gaussian() * (1.0 + static_cast<double>(i)) +
                   (i > 0 ? 0.3 * data(i - 1, j) : 0.0);
    }
  }
  const WhitenResult w = whiten(data, 10);
  CHECK(w.whitened.rows() == 10);
  CHECK(w.whitened.cols() == 4000);
  const Eigen::MatrixXd cov =
      w.whitened * w.whitened.transpose() / static_cast<double>(w.whitened.cols() - 1);
  CHECK((cov - Eigen::MatrixXd::Identity(10, 10)).cwiseAbs().maxCoeff() < 1e-6);
  CHECK(w.whitened.rowwise().mean().cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("already-white data whitens to a rotation of itself") {
  Rng rng(77);
  Eigen::MatrixXd data(16, 20000);
  for (Eigen::Index i = 0; i < data.rows(); ++i) {
    for (Eigen::Index j = 0; j < data.cols(); ++j) data(i, j) = rng.gaussian();
  }
  const WhitenResult w = whiten(data, 10);
  // rows of the whitening map must be near-orthonormal in channel space once
  // scaled back by the eigenvalues (covariance is close to identity)
  const Eigen::MatrixXd cov =
      w.whitened * w.whitened.transpose() / static_cast<double>(w.whitened.cols() - 1);
  CHECK((cov - Eigen::MatrixXd::Identity(10, 10)).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("constant input is rank deficient") {
  const Eigen::MatrixXd flat = Eigen::MatrixXd::Constant(16, 256, 3.0);
  CHECK(testutil::throws_errc(errc::rank_deficient, [&] { whiten(flat, 10); }));
}

TEST_CASE("fastica recovers three planted sources through a random mixing") {
  const int t_len = 6 * 1280;
  const Eigen::MatrixXd sources = three_sources(t_len);

  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng(1000 + seed);
    Eigen::MatrixXd mixing(16, 3);
    for (Eigen::Index i = 0; i < 16; ++i) {
      for (Eigen::Index j = 0; j < 3; ++j) mixing(i, j) = rng.gaussian();
    }
    Eigen::MatrixXd observed = mixing * sources;
    for (Eigen::Index i = 0; i < observed.rows(); ++i) {
      for (Eigen::Index j = 0; j < observed.cols(); ++j) {
        observed(i, j) += 0.01 * rng.gaussian();
      }
    }

    IcaConfig cfg;
    cfg.n_components = 3;
    cfg.seed = seed;
    const IcaModel model = fit_ica(observed, cfg);
    CHECK(model.converged);
    CHECK((model.unmixing * model.unmixing.transpose() -
           Eigen::MatrixXd::Identity(3, 3))
              .cwiseAbs()
              .maxCoeff() < 1e-8);

    const Eigen::MatrixXd components =
        model.component_map() * (observed.colwise() - model.channel_means);
    CHECK(worst_match(sources, components) > 0.95);
  }
}

TEST_CASE("identity mixing of independent sources gives a signed permutation") {
  const int t_len = 4 * 1280;
  Eigen::MatrixXd sources = three_sources(t_len);
  IcaConfig cfg;
  cfg.n_components = 3;
  cfg.seed = 9;
  const IcaModel model = fit_ica(sources, cfg);
  const Eigen::MatrixXd components =
      model.component_map() * (sources.colwise() - model.channel_means);
  CHECK(worst_match(sources, components) > 0.99);
}

TEST_CASE("same seed and data produce a bitwise-identical model") {
  const Eigen::MatrixXd sources = three_sources(2 * 1280);
  Rng rng(5);
  Eigen::MatrixXd mixing(16, 3);
  for (Eigen::Index i = 0; i < 16; ++i) {
    for (Eigen::Index j = 0; j < 3; ++j) mixing(i, j) = rng.gaussian();
  }
  const Eigen::MatrixXd observed = mixing * sources;

  IcaConfig cfg;
  cfg.n_components = 3;
  cfg.seed = 42;
  const IcaModel a = fit_ica(observed, cfg);
  const IcaModel b = fit_ica(observed, cfg);
  CHECK(a.iterations_used == b.iterations_used);
  REQUIRE(a.unmixing.size() == b.unmixing.size());
  for (Eigen::Index i = 0; i < a.unmixing.size(); ++i) {
    CHECK(a.unmixing.data()[i] == b.unmixing.data()[i]);
  }
  for (Eigen::Index i = 0; i < a.whitening.size(); ++i) {
    CHECK(a.whitening.data()[i] == b.whitening.data()[i]);
  }
}

TEST_CASE("components come out in descending reconstructed-variance order") {
  Rng rng(321);
  Eigen::MatrixXd data(16, 8000);
  for (Eigen::Index i = 0; i < data.rows(); ++i) {
    const double scale = 1.0 + 2.0 * static_cast<double>(i);
    for (Eigen::Index j = 0; j < data.cols(); ++j) {
      data(i, j) = scale * (rng.uniform() < 0.2 ? 4.0 * rng.gaussian() : rng.gaussian());
    }
  }
  IcaConfig cfg;
  cfg.n_components = 6;
  cfg.seed = 3;
  const IcaModel model = fit_ica(data, cfg);

  // mixing column norm = the variance each component reconstructs
  Eigen::MatrixXd back(16, 6);
  const WhitenResult w = whiten(data, 6);
  for (int k = 0; k < 6; ++k) {
    back.col(k) = w.whitening.row(k).transpose() * w.eigenvalues(k);
  }
  const Eigen::MatrixXd mixing = back * model.unmixing.transpose();
  for (int k = 1; k < 6; ++k) {
    CHECK(mixing.col(k).squaredNorm() <= mixing.col(k - 1).squaredNorm() + 1e-9);
  }
}

TEST_CASE("transform_epochs maps 16x1280 to 10x1280 and centers exactly") {
  Rng rng(88);
  Eigen::MatrixXd data(16, 16 * 1280);
  for (Eigen::Index i = 0; i < data.rows(); ++i) {
    for (Eigen::Index j = 0; j < data.cols(); ++j) {
      data(i, j) = rng.gaussian() * (1.0 + 0.1 * static_cast<double>(i));
    }
  }
  IcaConfig cfg;
  cfg.seed = 1;
  const IcaModel model = fit_ica(data, cfg);

  Epoch e;
  e.data = data.leftCols(1280);
  e.global_start_s = 35;
  const Epoch out = transform_epoch(e, model);
  CHECK(out.data.rows() == 10);
  CHECK(out.data.cols() == 1280);
  CHECK(out.global_start_s == 35);

  Epoch means_epoch;
  means_epoch.data = model.channel_means.replicate(1, 1280);
  const Epoch zero = transform_epoch(means_epoch, model);
  CHECK(zero.data.cwiseAbs().maxCoeff() < 1e-9);

  Epoch wrong;
  wrong.data = Eigen::MatrixXd::Zero(15, 1280);
  CHECK(testutil::throws_errc(errc::shape_mismatch,
                              [&] { transform_epoch(wrong, model); }));
}

TEST_CASE("cosine similarity basics") {
  Eigen::VectorXd a(3), b(3);
  a << 1, 2, 3;
  b << 1, 2, 3;
  CHECK(cosine_similarity(a, b) == doctest::Approx(1.0).epsilon(1e-12));
  b << -1, -2, -3;
  CHECK(cosine_similarity(a, b) == doctest::Approx(-1.0).epsilon(1e-12));
  b << 3, 0, -1;
  CHECK(cosine_similarity(a, b) == doctest::Approx(0.0).epsilon(1e-12));
  b.setZero();
  CHECK(testutil::throws_errc(errc::zero_vector, [&] { cosine_similarity(a, b); }));
}

TEST_CASE("diagonal mixing attributes every component to its source channel") {
  // ten distinct sources, each injected into exactly one of 16 channels
  const std::vector<int> source_channels = {0, 1, 4, 5, 7, 8, 9, 10, 11, 12};
  std::vector<std::string> labels;
  for (int c = 0; c < 16; ++c) labels.push_back("CH" + std::to_string(c));

  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng(9000 + seed);
    const int t_len = 4 * 1280;
    Eigen::MatrixXd data = Eigen::MatrixXd::Zero(16, t_len);
    for (Eigen::Index i = 0; i < 16; ++i) {
      for (int t = 0; t < t_len; ++t) data(i, t) = 0.02 * rng.gaussian();
    }
    for (std::size_t k = 0; k < source_channels.size(); ++k) {
      const double freq = 3.0 + 2.5 * static_cast<double>(k);
      const double phase = rng.uniform(0.0, 2.0 * M_PI);
      const double amp = 2.0 + 0.3 * static_cast<double>(k);
      const int ch = source_channels[k];
      for (int t = 0; t < t_len; ++t) {
        const double sec = static_cast<double>(t) / 256.0;
        const double wave = std::sin(2.0 * M_PI * freq * sec + phase) >= 0 ? 1.0 : -1.0;
        data(ch, t) += amp * wave;
      }
    }

    IcaConfig cfg;
    cfg.n_components = 10;
    cfg.seed = seed;
    const IcaModel model = fit_ica(data, cfg);
    const auto attribution = attribute_channels(model, data, labels);
    REQUIRE(attribution.size() == 10);

    std::vector<bool> seen(16, false);
    for (const auto& a : attribution) {
      CHECK(a.similarity > 0.9);
      const int ch = std::stoi(a.channel.substr(2));
      const bool is_source =
          std::find(source_channels.begin(), source_channels.end(), ch) !=
          source_channels.end();
      CHECK(is_source);
      seen[static_cast<std::size_t>(ch)] = true;
    }
    // all ten source channels are claimed by some component
    for (const int ch : source_channels) {
      CHECK(seen[static_cast<std::size_t>(ch)]);
    }
  }
}

TEST_CASE("attribution uses |cosine|: a negated copy still matches") {
  Rng rng(4242);
  const int t_len = 2 * 1280;
  Eigen::MatrixXd data = Eigen::MatrixXd::Zero(3, t_len);
  for (int t = 0; t < t_len; ++t) {
    const double sec = static_cast<double>(t) / 256.0;
    data(0, t) = std::sin(2.0 * M_PI * 7.0 * sec) >= 0 ? 1.0 : -1.0;
    data(1, t) = 0.05 * rng.gaussian();
    data(2, t) = 0.05 * rng.gaussian();
  }

  IcaConfig cfg;
  cfg.n_components = 1;
  cfg.seed = 0;
  const IcaModel model = fit_ica(data, cfg);
  const auto attribution = attribute_channels(model, data, {"A", "B", "C"});
  REQUIRE(attribution.size() == 1);
  CHECK(attribution[0].channel == "A");
  CHECK(attribution[0].similarity > 0.99);
  CHECK(attribution[0].similarity <= 1.0 + 1e-12);
}
