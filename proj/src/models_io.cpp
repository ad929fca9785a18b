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

#include <array>

#include "binio.hpp"
#include "preictal/models.hpp"

namespace preictal {

namespace detail {

std::uint32_t crc32(std::span<const std::uint8_t> bytes) {
  static const auto table = [] {
    std::array<std::uint32_t, 256> t{};
    for (std::uint32_t i = 0; i < 256; ++i) {
      std::uint32_t c = i;
      for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xedb88320u ^ (c >> 1) : c >> 1;
      t[i] = c;
    }
    return t;
  }();
  std::uint32_t crc = 0xffffffffu;
  for (std::uint8_t b : bytes) crc = table[(crc ^ b) & 0xffu] ^ (crc >> 8);
  return crc ^ 0xffffffffu;
}

}  // namespace detail

namespace {

constexpr char kMagic[8] = {'P', 'I', 'C', 'T', 'M', 'O', 'D', 'L'};
constexpr std::uint32_t kFormatVersion = 1;

void write_spec(detail::ByteWriter& w, const ModelSpec& s) {
  w.u8(static_cast<std::uint8_t>(s.kind));
  w.i32(s.hidden_size);
  w.i32(s.time_stride);
  w.i32(s.knn_k);
  w.u32(static_cast<std::uint32_t>(s.cnn_blocks.size()));
  for (const auto& b : s.cnn_blocks) {
    w.i32(b.filters);
    w.i32(b.kernel);
    w.i32(b.pool);
  }
  w.u64(s.seed);
  w.i32(s.train_epochs);
  w.f64(s.learning_rate);
  w.i32(s.batch_size);
  w.u8(s.balanced_class_weights ? 1 : 0);
}

ModelSpec read_spec(detail::ByteReader& r) {
  ModelSpec s;
  const std::uint8_t kind = r.u8();
  if (kind > static_cast<std::uint8_t>(ModelKind::cnn)) {
    throw Error(errc::corrupt_model, "unknown model kind tag");
  }
  s.kind = static_cast<ModelKind>(kind);
  s.hidden_size = r.i32();
  s.time_stride = r.i32();
  s.knn_k = r.i32();
  s.cnn_blocks.clear();
  const std::uint32_t nb = r.u32();
  for (std::uint32_t i = 0; i < nb; ++i) {
    CnnBlock b;
    b.filters = r.i32();
    b.kernel = r.i32();
    b.pool = r.i32();
    s.cnn_blocks.push_back(b);
  }
  s.seed = r.u64();
  s.train_epochs = r.i32();
  s.learning_rate = r.f64();
  s.batch_size = r.i32();
  s.balanced_class_weights = r.u8() != 0;
  return s;
}

}  // namespace

std::vector<std::uint8_t> save_model(const TrainedModel& model) {
  detail::ByteWriter payload;
  write_spec(payload, model.spec);
  payload.u64(model.channels);
  payload.u64(model.timesteps);
  payload.f64_block(model.standardization.means.data(),
                    static_cast<std::size_t>(model.standardization.means.size()));
  payload.f64_block(model.standardization.scales.data(),
                    static_cast<std::size_t>(model.standardization.scales.size()));
  payload.f64_block(model.training_log.data(), model.training_log.size());

  if (model.spec.kind == ModelKind::knn) {
    payload.u64(static_cast<std::uint64_t>(model.knn_features.rows()));
    payload.u64(static_cast<std::uint64_t>(model.knn_features.cols()));
    payload.f64_block(model.knn_features.data(),
                      static_cast<std::size_t>(model.knn_features.size()));
    for (int y : model.knn_labels) payload.u8(y != 0 ? 1 : 0);
  } else {
    payload.f64_block(model.params.data(), model.params.size());
  }

  detail::ByteWriter out;
  for (char c : kMagic) out.u8(static_cast<std::uint8_t>(c));
  out.u32(kFormatVersion);
  const auto& body = payload.bytes();
  out.u64(body.size());
  for (std::uint8_t b : body) out.u8(b);
  out.u32(detail::crc32(body));
  return out.take();
}

TrainedModel load_model(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < sizeof(kMagic) + 4 + 8 + 4) {
    throw Error(errc::corrupt_model, "model file too short");
  }
  for (std::size_t i = 0; i < sizeof(kMagic); ++i) {
    if (bytes[i] != static_cast<std::uint8_t>(kMagic[i])) {
      throw Error(errc::corrupt_model, "bad magic tag");
    }
  }
  detail::ByteReader header(bytes.subspan(sizeof(kMagic)));
  const std::uint32_t version = header.u32();
  if (version != kFormatVersion) {
    throw Error(errc::version_mismatch,
                "model format version " + std::to_string(version) +
                    ", this build reads " + std::to_string(kFormatVersion));
  }
  const std::uint64_t body_size = header.u64();
  const std::size_t body_at = sizeof(kMagic) + 4 + 8;
  if (bytes.size() < body_at + body_size + 4) {
    throw Error(errc::corrupt_model, "model file truncated");
  }
  const auto body = bytes.subspan(body_at, body_size);
  detail::ByteReader tail(bytes.subspan(body_at + body_size));
  if (detail::crc32(body) != tail.u32()) {
    throw Error(errc::corrupt_model, "checksum mismatch");
  }

  detail::ByteReader r(body);
  TrainedModel model;
  model.spec = read_spec(r);
  model.channels = r.u64();
  model.timesteps = r.u64();

  const auto means = r.f64_block();
  const auto scales = r.f64_block();
  model.standardization.means =
      Eigen::Map<const Eigen::VectorXd>(means.data(), static_cast<Eigen::Index>(means.size()));
  model.standardization.scales =
      Eigen::Map<const Eigen::VectorXd>(scales.data(), static_cast<Eigen::Index>(scales.size()));
  model.training_log = r.f64_block();

  if (model.spec.kind == ModelKind::knn) {
    const std::uint64_t n = r.u64();
    const std::uint64_t d = r.u64();
    const auto data = r.f64_block();
    if (data.size() != n * d) {
      throw Error(errc::corrupt_model, "k-NN matrix size mismatch");
    }
    model.knn_features.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    std::memcpy(model.knn_features.data(), data.data(), data.size() * 8);
    model.knn_labels.resize(n);
    for (std::uint64_t i = 0; i < n; ++i) model.knn_labels[i] = r.u8();
  } else {
    model.params = r.f64_block();
  }
  return model;
}

}  // namespace preictal
