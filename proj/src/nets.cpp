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

#include "nets.hpp"

#include <cmath>

#include "preictal/error.hpp"

namespace preictal::detail {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double softplus(double z) {
  return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)));
}

void init_uniform(std::vector<double>& params, std::size_t at, std::size_t count,
                  std::size_t fan_in, Rng& rng) {
  const double s = 1.0 / std::sqrt(static_cast<double>(fan_in));
  for (std::size_t i = 0; i < count; ++i) params[at + i] = rng.uniform(-s, s);
}

namespace {

using Map = Eigen::Map<Eigen::MatrixXd>;
using CMap = Eigen::Map<const Eigen::MatrixXd>;
using VMap = Eigen::Map<Eigen::VectorXd>;
using CVMap = Eigen::Map<const Eigen::VectorXd>;

// Batch of logits -> weighted mean BCE; per-sample dL/dz when grad wanted.
double bce_batch(const Eigen::VectorXd& z, const std::vector<int>& y,
                 const std::vector<double>& w, Eigen::VectorXd* dz) {
  const auto b = static_cast<double>(z.size());
  double total = 0.0;
  if (dz) dz->resize(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const double yi = y[static_cast<std::size_t>(i)];
    const double wi = w[static_cast<std::size_t>(i)];
    total += wi * (softplus(z(i)) - yi * z(i));
    if (dz) (*dz)(i) = wi * (sigmoid(z(i)) - yi) / b;
  }
  return total / b;
}

}  // namespace

// ---------------------------------------------------------------------------
// Logistic regression: sigmoid of an affine map on the flattened features.
// ---------------------------------------------------------------------------

LogisticNet::LogisticNet(std::size_t channels, std::size_t timesteps)
    : dim_(channels * timesteps) {
  params_.assign(dim_ + 1, 0.0);
}

void LogisticNet::init_params(Rng& rng) {
  init_uniform(params_, 0, dim_, dim_, rng);
  params_[dim_] = 0.0;
}

double LogisticNet::logit(const Eigen::MatrixXd& sample) const {
  CVMap w(params_.data(), static_cast<Eigen::Index>(dim_));
  CVMap x(sample.data(), sample.size());
  return w.dot(x) + params_[dim_];
}

double LogisticNet::loss(const std::vector<Eigen::MatrixXd>& x,
                         const std::vector<int>& y, const std::vector<double>& w,
                         std::vector<double>* grad) const {
  Eigen::VectorXd z(static_cast<Eigen::Index>(x.size()));
  for (std::size_t i = 0; i < x.size(); ++i) z(static_cast<Eigen::Index>(i)) = logit(x[i]);

  Eigen::VectorXd dz;
  const double loss = bce_batch(z, y, w, grad ? &dz : nullptr);
  if (grad) {
    VMap dw(grad->data(), static_cast<Eigen::Index>(dim_));
    for (std::size_t i = 0; i < x.size(); ++i) {
      CVMap xi(x[i].data(), x[i].size());
      dw += dz(static_cast<Eigen::Index>(i)) * xi;
      (*grad)[dim_] += dz(static_cast<Eigen::Index>(i));
    }
  }
  return loss;
}

// ---------------------------------------------------------------------------
// RNN: tanh recurrence consumed over the strided time axis, sigmoid readout
// on the final hidden state, trained by backpropagation through time.
// ---------------------------------------------------------------------------

RnnNet::RnnNet(std::size_t channels, std::size_t timesteps, int hidden, int stride)
    : in_(static_cast<int>(channels)),
      hidden_(hidden),
      stride_(stride),
      steps_(static_cast<int>(timesteps) / stride) {
  if (steps_ < 1) throw Error(errc::shape_mismatch, "time stride leaves no steps");
  const std::size_t h = static_cast<std::size_t>(hidden_);
  const std::size_t in = static_cast<std::size_t>(in_);
  wx_at_ = 0;
  wh_at_ = wx_at_ + h * in;
  bh_at_ = wh_at_ + h * h;
  v_at_ = bh_at_ + h;
  c_at_ = v_at_ + h;
  params_.assign(c_at_ + 1, 0.0);
}

void RnnNet::init_params(Rng& rng) {
  const auto h = static_cast<std::size_t>(hidden_);
  const auto in = static_cast<std::size_t>(in_);
  init_uniform(params_, wx_at_, h * in, in, rng);
  init_uniform(params_, wh_at_, h * h, h, rng);
  init_uniform(params_, v_at_, h, h, rng);
}

double RnnNet::logit(const Eigen::MatrixXd& sample) const {
  CMap wx(params_.data() + wx_at_, hidden_, in_);
  CMap wh(params_.data() + wh_at_, hidden_, hidden_);
  CVMap bh(params_.data() + bh_at_, hidden_);
  CVMap v(params_.data() + v_at_, hidden_);

  Eigen::VectorXd h = Eigen::VectorXd::Zero(hidden_);
  for (int t = 0; t < steps_; ++t) {
    h = (wx * sample.col(static_cast<Eigen::Index>(t) * stride_) + wh * h + bh)
            .array()
            .tanh()
            .matrix();
  }
  return v.dot(h) + params_[c_at_];
}

double RnnNet::loss(const std::vector<Eigen::MatrixXd>& x, const std::vector<int>& y,
                    const std::vector<double>& w, std::vector<double>* grad) const {
  const auto batch = static_cast<Eigen::Index>(x.size());
  CMap wx(params_.data() + wx_at_, hidden_, in_);
  CMap wh(params_.data() + wh_at_, hidden_, hidden_);
  CVMap bh(params_.data() + bh_at_, hidden_);
  CVMap v(params_.data() + v_at_, hidden_);

  // Forward over the whole batch at once, states kept for BPTT.
  std::vector<Eigen::MatrixXd> xs(static_cast<std::size_t>(steps_));
  std::vector<Eigen::MatrixXd> hs(static_cast<std::size_t>(steps_));
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(hidden_, batch);
  for (int t = 0; t < steps_; ++t) {
    Eigen::MatrixXd xt(in_, batch);
    for (Eigen::Index i = 0; i < batch; ++i) {
      xt.col(i) = x[static_cast<std::size_t>(i)].col(static_cast<Eigen::Index>(t) * stride_);
    }
    h = ((wx * xt + wh * h).colwise() + bh).array().tanh().matrix();
    xs[static_cast<std::size_t>(t)] = std::move(xt);
    hs[static_cast<std::size_t>(t)] = h;
  }

  Eigen::VectorXd z = (v.transpose() * h).transpose();
  z.array() += params_[c_at_];

  Eigen::VectorXd dz;
  const double loss = bce_batch(z, y, w, grad ? &dz : nullptr);
  if (!grad) return loss;

  Map dwx(grad->data() + wx_at_, hidden_, in_);
  Map dwh(grad->data() + wh_at_, hidden_, hidden_);
  VMap dbh(grad->data() + bh_at_, hidden_);
  VMap dv(grad->data() + v_at_, hidden_);

  dv += h * dz;
  (*grad)[c_at_] += dz.sum();

  Eigen::MatrixXd dh = v * dz.transpose();  // hidden x batch
  for (int t = steps_ - 1; t >= 0; --t) {
    const Eigen::MatrixXd& ht = hs[static_cast<std::size_t>(t)];
    const Eigen::MatrixXd da =
        (dh.array() * (1.0 - ht.array().square())).matrix();
    dwx += da * xs[static_cast<std::size_t>(t)].transpose();
    if (t > 0) dwh += da * hs[static_cast<std::size_t>(t - 1)].transpose();
    dbh += da.rowwise().sum();
    dh = wh.transpose() * da;
  }
  return loss;
}

// ---------------------------------------------------------------------------
// LSTM: input/forget/output gates and cell candidate, same readout and
// training as the RNN.
// ---------------------------------------------------------------------------

LstmNet::LstmNet(std::size_t channels, std::size_t timesteps, int hidden, int stride)
    : in_(static_cast<int>(channels)),
      hidden_(hidden),
      stride_(stride),
      steps_(static_cast<int>(timesteps) / stride) {
  if (steps_ < 1) throw Error(errc::shape_mismatch, "time stride leaves no steps");
  const auto h = static_cast<std::size_t>(hidden_);
  const auto in = static_cast<std::size_t>(in_);
  wx_at_ = 0;
  wh_at_ = wx_at_ + 4 * h * in;
  b_at_ = wh_at_ + 4 * h * h;
  v_at_ = b_at_ + 4 * h;
  c_at_ = v_at_ + h;
  params_.assign(c_at_ + 1, 0.0);
}

void LstmNet::init_params(Rng& rng) {
  const auto h = static_cast<std::size_t>(hidden_);
  const auto in = static_cast<std::size_t>(in_);
  init_uniform(params_, wx_at_, 4 * h * in, in, rng);
  init_uniform(params_, wh_at_, 4 * h * h, h, rng);
  init_uniform(params_, v_at_, h, h, rng);
}

namespace {

struct LstmStep {
  Eigen::MatrixXd x, i, f, g, o, c, c_tanh, h;
};

}  // namespace

double LstmNet::logit(const Eigen::MatrixXd& sample) const {
  CMap wx(params_.data() + wx_at_, 4 * hidden_, in_);
  CMap wh(params_.data() + wh_at_, 4 * hidden_, hidden_);
  CVMap b(params_.data() + b_at_, 4 * hidden_);
  CVMap v(params_.data() + v_at_, hidden_);

  Eigen::VectorXd h = Eigen::VectorXd::Zero(hidden_);
  Eigen::VectorXd c = Eigen::VectorXd::Zero(hidden_);
  for (int t = 0; t < steps_; ++t) {
    const Eigen::VectorXd gates =
        wx * sample.col(static_cast<Eigen::Index>(t) * stride_) + wh * h + b;
    for (int j = 0; j < hidden_; ++j) {
      const double ig = sigmoid(gates(j));
      const double fg = sigmoid(gates(hidden_ + j));
      const double gg = std::tanh(gates(2 * hidden_ + j));
      const double og = sigmoid(gates(3 * hidden_ + j));
      c(j) = fg * c(j) + ig * gg;
      h(j) = og * std::tanh(c(j));
    }
  }
  return v.dot(h) + params_[c_at_];
}

double LstmNet::loss(const std::vector<Eigen::MatrixXd>& x, const std::vector<int>& y,
                     const std::vector<double>& w, std::vector<double>* grad) const {
  const auto batch = static_cast<Eigen::Index>(x.size());
  CMap wx(params_.data() + wx_at_, 4 * hidden_, in_);
  CMap wh(params_.data() + wh_at_, 4 * hidden_, hidden_);
  CVMap b(params_.data() + b_at_, 4 * hidden_);
  CVMap v(params_.data() + v_at_, hidden_);

  std::vector<LstmStep> steps(static_cast<std::size_t>(steps_));
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(hidden_, batch);
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(hidden_, batch);
  for (int t = 0; t < steps_; ++t) {
    LstmStep& st = steps[static_cast<std::size_t>(t)];
    st.x.resize(in_, batch);
    for (Eigen::Index i = 0; i < batch; ++i) {
      st.x.col(i) = x[static_cast<std::size_t>(i)].col(static_cast<Eigen::Index>(t) * stride_);
    }
    const Eigen::MatrixXd gates = ((wx * st.x + wh * h).colwise() + b);
    st.i = gates.topRows(hidden_).unaryExpr([](double u) { return sigmoid(u); });
    st.f = gates.middleRows(hidden_, hidden_).unaryExpr([](double u) { return sigmoid(u); });
    st.g = gates.middleRows(2 * hidden_, hidden_).array().tanh().matrix();
    st.o = gates.bottomRows(hidden_).unaryExpr([](double u) { return sigmoid(u); });
    c = (st.f.array() * c.array() + st.i.array() * st.g.array()).matrix();
    st.c = c;
    st.c_tanh = c.array().tanh().matrix();
    h = (st.o.array() * st.c_tanh.array()).matrix();
    st.h = h;
  }

  Eigen::VectorXd z = (v.transpose() * h).transpose();
  z.array() += params_[c_at_];

  Eigen::VectorXd dz;
  const double loss = bce_batch(z, y, w, grad ? &dz : nullptr);
  if (!grad) return loss;

  Map dwx(grad->data() + wx_at_, 4 * hidden_, in_);
  Map dwh(grad->data() + wh_at_, 4 * hidden_, hidden_);
  VMap db(grad->data() + b_at_, 4 * hidden_);
  VMap dv(grad->data() + v_at_, hidden_);

  dv += h * dz;
  (*grad)[c_at_] += dz.sum();

  Eigen::MatrixXd dh = v * dz.transpose();
  Eigen::MatrixXd dc = Eigen::MatrixXd::Zero(hidden_, batch);
  Eigen::MatrixXd dgates(4 * hidden_, batch);
  for (int t = steps_ - 1; t >= 0; --t) {
    const LstmStep& st = steps[static_cast<std::size_t>(t)];
    const Eigen::MatrixXd d_o = (dh.array() * st.c_tanh.array()).matrix();
    dc.array() += dh.array() * st.o.array() * (1.0 - st.c_tanh.array().square());

    Eigen::MatrixXd d_f;
    if (t > 0) {
      d_f = (dc.array() * steps[static_cast<std::size_t>(t - 1)].c.array()).matrix();
    } else {
      d_f = Eigen::MatrixXd::Zero(hidden_, batch);
    }
    const Eigen::MatrixXd d_i = (dc.array() * st.g.array()).matrix();
    const Eigen::MatrixXd d_g = (dc.array() * st.i.array()).matrix();

    dgates.topRows(hidden_) =
        (d_i.array() * st.i.array() * (1.0 - st.i.array())).matrix();
    dgates.middleRows(hidden_, hidden_) =
        (d_f.array() * st.f.array() * (1.0 - st.f.array())).matrix();
    dgates.middleRows(2 * hidden_, hidden_) =
        (d_g.array() * (1.0 - st.g.array().square())).matrix();
    dgates.bottomRows(hidden_) =
        (d_o.array() * st.o.array() * (1.0 - st.o.array())).matrix();

    dwx += dgates * st.x.transpose();
    if (t > 0) dwh += dgates * steps[static_cast<std::size_t>(t - 1)].h.transpose();
    db += dgates.rowwise().sum();

    dh = wh.transpose() * dgates;
    dc = (dc.array() * st.f.array()).matrix();
  }
  return loss;
}

// ---------------------------------------------------------------------------
// CNN: 1-D convolutions over time with the channels as input feature maps,
// ReLU, max-pooling per block, then a dense sigmoid head.
// ---------------------------------------------------------------------------

CnnNet::CnnNet(std::size_t channels, std::size_t timesteps, std::vector<CnnBlock> blocks) {
  int in_ch = static_cast<int>(channels);
  int in_t = static_cast<int>(timesteps);
  std::size_t at = 0;
  for (const CnnBlock& spec : blocks) {
    BlockDims d;
    d.in_ch = in_ch;
    d.in_t = in_t;
    d.filters = spec.filters;
    d.kernel = spec.kernel;
    d.pool = spec.pool;
    d.conv_t = in_t - spec.kernel + 1;
    d.pool_t = d.conv_t / spec.pool;
    if (spec.filters < 1 || spec.kernel < 1 || spec.pool < 1 || d.conv_t < 1 ||
        d.pool_t < 1) {
      throw Error(errc::shape_mismatch, "convolution block does not fit the input");
    }
    d.k_at = at;
    at += static_cast<std::size_t>(d.filters) * static_cast<std::size_t>(d.in_ch) *
          static_cast<std::size_t>(d.kernel);
    d.b_at = at;
    at += static_cast<std::size_t>(d.filters);
    blocks_.push_back(d);
    in_ch = d.filters;
    in_t = d.pool_t;
  }
  flat_dim_ = in_ch * in_t;
  wd_at_ = at;
  bd_at_ = wd_at_ + static_cast<std::size_t>(flat_dim_);
  params_.assign(bd_at_ + 1, 0.0);
}

void CnnNet::init_params(Rng& rng) {
  for (const BlockDims& d : blocks_) {
    const auto fan_in = static_cast<std::size_t>(d.in_ch) * static_cast<std::size_t>(d.kernel);
    init_uniform(params_, d.k_at,
                 static_cast<std::size_t>(d.filters) * fan_in, fan_in, rng);
  }
  init_uniform(params_, wd_at_, static_cast<std::size_t>(flat_dim_),
               static_cast<std::size_t>(flat_dim_), rng);
}

CnnNet::Trace CnnNet::forward(const Eigen::MatrixXd& sample) const {
  Trace tr;
  Eigen::MatrixXd cur = sample;
  for (const BlockDims& d : blocks_) {
    tr.inputs.push_back(cur);
    CMap k(params_.data() + d.k_at, d.filters, d.in_ch * d.kernel);
    CVMap b(params_.data() + d.b_at, d.filters);

    // im2col: column t stacks the kernel-wide input patch at offset t.
    Eigen::MatrixXd patches(d.in_ch * d.kernel, d.conv_t);
    for (int t = 0; t < d.conv_t; ++t) {
      for (int dk = 0; dk < d.kernel; ++dk) {
        patches.block(static_cast<Eigen::Index>(dk) * d.in_ch, t, d.in_ch, 1) =
            cur.col(t + dk);
      }
    }
    Eigen::MatrixXd conv = (k * patches).colwise() + b;
    conv = conv.cwiseMax(0.0);  // ReLU
    tr.relu_out.push_back(conv);

    Eigen::MatrixXd pooled(d.filters, d.pool_t);
    Eigen::MatrixXi argmax(d.filters, d.pool_t);
    for (int f = 0; f < d.filters; ++f) {
      for (int p = 0; p < d.pool_t; ++p) {
        int best = p * d.pool;
        double best_v = conv(f, best);
        for (int j = 1; j < d.pool; ++j) {
          const int idx = p * d.pool + j;
          if (conv(f, idx) > best_v) {
            best_v = conv(f, idx);
            best = idx;
          }
        }
        pooled(f, p) = best_v;
        argmax(f, p) = best;
      }
    }
    tr.pooled.push_back(pooled);
    tr.argmax.push_back(std::move(argmax));
    cur = std::move(pooled);
  }

  CVMap wd(params_.data() + wd_at_, flat_dim_);
  CVMap flat(tr.pooled.back().data(), flat_dim_);
  tr.z = wd.dot(flat) + params_[bd_at_];
  return tr;
}

void CnnNet::backward(const Trace& tr, double dz, std::vector<double>* grad) const {
  CVMap wd(params_.data() + wd_at_, flat_dim_);
  VMap dwd(grad->data() + wd_at_, flat_dim_);
  CVMap flat(tr.pooled.back().data(), flat_dim_);
  dwd += dz * flat;
  (*grad)[bd_at_] += dz;

  const Eigen::VectorXd d_flat = dz * wd;
  Eigen::MatrixXd d_cur = Eigen::Map<const Eigen::MatrixXd>(
      d_flat.data(), blocks_.back().filters, blocks_.back().pool_t);

  for (int bi = static_cast<int>(blocks_.size()) - 1; bi >= 0; --bi) {
    const BlockDims& d = blocks_[static_cast<std::size_t>(bi)];
    const auto ui = static_cast<std::size_t>(bi);

    // Unpool: route gradient to the argmax positions.
    Eigen::MatrixXd d_conv = Eigen::MatrixXd::Zero(d.filters, d.conv_t);
    for (int f = 0; f < d.filters; ++f) {
      for (int p = 0; p < d.pool_t; ++p) {
        d_conv(f, tr.argmax[ui](f, p)) += d_cur(f, p);
      }
    }
    // ReLU mask.
    d_conv = ((tr.relu_out[ui].array() > 0.0).cast<double>() * d_conv.array()).matrix();

    Eigen::MatrixXd patches(d.in_ch * d.kernel, d.conv_t);
    for (int t = 0; t < d.conv_t; ++t) {
      for (int dk = 0; dk < d.kernel; ++dk) {
        patches.block(static_cast<Eigen::Index>(dk) * d.in_ch, t, d.in_ch, 1) =
            tr.inputs[ui].col(t + dk);
      }
    }

    Map dk_map(grad->data() + d.k_at, d.filters, d.in_ch * d.kernel);
    VMap db_map(grad->data() + d.b_at, d.filters);
    dk_map += d_conv * patches.transpose();
    db_map += d_conv.rowwise().sum();

    if (bi > 0) {
      CMap k(params_.data() + d.k_at, d.filters, d.in_ch * d.kernel);
      const Eigen::MatrixXd d_patches = k.transpose() * d_conv;  // (in_ch*kernel) x conv_t
      Eigen::MatrixXd d_in = Eigen::MatrixXd::Zero(d.in_ch, d.in_t);
      for (int t = 0; t < d.conv_t; ++t) {
        for (int dk = 0; dk < d.kernel; ++dk) {
          d_in.col(t + dk) +=
              d_patches.block(static_cast<Eigen::Index>(dk) * d.in_ch, t, d.in_ch, 1);
        }
      }
      d_cur = std::move(d_in);
    }
  }
}

double CnnNet::logit(const Eigen::MatrixXd& sample) const { return forward(sample).z; }

double CnnNet::loss(const std::vector<Eigen::MatrixXd>& x, const std::vector<int>& y,
                    const std::vector<double>& w, std::vector<double>* grad) const {
  Eigen::VectorXd z(static_cast<Eigen::Index>(x.size()));
  std::vector<Trace> traces;
  if (grad) traces.reserve(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    Trace tr = forward(x[i]);
    z(static_cast<Eigen::Index>(i)) = tr.z;
    if (grad) traces.push_back(std::move(tr));
  }

  Eigen::VectorXd dz;
  const double loss = bce_batch(z, y, w, grad ? &dz : nullptr);
  if (grad) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      backward(traces[i], dz(static_cast<Eigen::Index>(i)), grad);
    }
  }
  return loss;
}

std::unique_ptr<Net> make_net(const ModelSpec& spec, std::size_t channels,
                              std::size_t timesteps) {
  switch (spec.kind) {
    case ModelKind::logistic_regression:
      return std::make_unique<LogisticNet>(channels, timesteps);
    case ModelKind::rnn:
      return std::make_unique<RnnNet>(channels, timesteps, spec.hidden_size,
                                      spec.time_stride);
    case ModelKind::lstm:
      return std::make_unique<LstmNet>(channels, timesteps, spec.hidden_size,
                                       spec.time_stride);
    case ModelKind::cnn:
      return std::make_unique<CnnNet>(channels, timesteps, spec.cnn_blocks);
    case ModelKind::knn:
      break;
  }
  throw Error(errc::shape_mismatch, "k-NN has no gradient network");
}

}  // namespace preictal::detail
