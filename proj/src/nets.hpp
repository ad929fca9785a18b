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
#include <memory>
#include <vector>

#include "preictal/models.hpp"
#include "preictal/rng.hpp"

namespace preictal::detail {

double sigmoid(double z);
/// log(1 + e^z), overflow-safe.
double softplus(double z);

/// Gradient-trained classifier with a flat parameter vector, so finite
/// differences and the optimizer see every kind the same way.
class Net {
 public:
  virtual ~Net() = default;

  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }

  virtual void init_params(Rng& rng) = 0;

  /// Weighted mean binary cross-entropy over the batch (samples are
  /// standardized channels x timesteps matrices). Accumulates d(loss)/d(params)
  /// into *grad when non-null.
  virtual double loss(const std::vector<Eigen::MatrixXd>& x,
                      const std::vector<int>& y, const std::vector<double>& w,
                      std::vector<double>* grad) const = 0;

  virtual double logit(const Eigen::MatrixXd& sample) const = 0;

 protected:
  std::vector<double> params_;
};

std::unique_ptr<Net> make_net(const ModelSpec& spec, std::size_t channels,
                              std::size_t timesteps);

class LogisticNet : public Net {
 public:
  LogisticNet(std::size_t channels, std::size_t timesteps);
  void init_params(Rng& rng) override;
  double loss(const std::vector<Eigen::MatrixXd>& x, const std::vector<int>& y,
              const std::vector<double>& w, std::vector<double>* grad) const override;
  double logit(const Eigen::MatrixXd& sample) const override;

 private:
  std::size_t dim_;
};

class RnnNet : public Net {
 public:
  RnnNet(std::size_t channels, std::size_t timesteps, int hidden, int stride);
  void init_params(Rng& rng) override;
  double loss(const std::vector<Eigen::MatrixXd>& x, const std::vector<int>& y,
              const std::vector<double>& w, std::vector<double>* grad) const override;
  double logit(const Eigen::MatrixXd& sample) const override;

 private:
  int in_, hidden_, stride_, steps_;
  // layout: Wx (h*in), Wh (h*h), bh (h), v (h), c (1)
  std::size_t wx_at_, wh_at_, bh_at_, v_at_, c_at_;
};

class LstmNet : public Net {
 public:
  LstmNet(std::size_t channels, std::size_t timesteps, int hidden, int stride);
  void init_params(Rng& rng) override;
  double loss(const std::vector<Eigen::MatrixXd>& x, const std::vector<int>& y,
              const std::vector<double>& w, std::vector<double>* grad) const override;
  double logit(const Eigen::MatrixXd& sample) const override;

 private:
  int in_, hidden_, stride_, steps_;
  // gate order i, f, g, o; layout Wx (4h*in), Wh (4h*h), b (4h), v (h), c (1)
  std::size_t wx_at_, wh_at_, b_at_, v_at_, c_at_;
};

class CnnNet : public Net {
 public:
  CnnNet(std::size_t channels, std::size_t timesteps, std::vector<CnnBlock> blocks);
  void init_params(Rng& rng) override;
  double loss(const std::vector<Eigen::MatrixXd>& x, const std::vector<int>& y,
              const std::vector<double>& w, std::vector<double>* grad) const override;
  double logit(const Eigen::MatrixXd& sample) const override;

 private:
  struct BlockDims {
    int in_ch, in_t, filters, kernel, pool, conv_t, pool_t;
    std::size_t k_at, b_at;  // filter bank (filters x in_ch*kernel), bias
  };

  // Forward pass with intermediates kept for backprop.
  struct Trace {
    std::vector<Eigen::MatrixXd> inputs;        // per block: in_ch x in_t
    std::vector<Eigen::MatrixXd> relu_out;      // filters x conv_t
    std::vector<Eigen::MatrixXi> argmax;        // filters x pool_t
    std::vector<Eigen::MatrixXd> pooled;        // filters x pool_t
    double z = 0.0;
  };
  Trace forward(const Eigen::MatrixXd& sample) const;
  void backward(const Trace& trace, double dz, std::vector<double>* grad) const;

  std::vector<BlockDims> blocks_;
  int flat_dim_;
  std::size_t wd_at_, bd_at_;
};

/// Uniform(-s, s) with s = 1/sqrt(fan_in) over a parameter span.
void init_uniform(std::vector<double>& params, std::size_t at, std::size_t count,
                  std::size_t fan_in, Rng& rng);

}  // namespace preictal::detail
