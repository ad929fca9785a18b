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

#include "preictal/experiment.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <memory>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include "binio.hpp"
#include "preictal/edf.hpp"
#include "preictal/error.hpp"
#include "preictal/io.hpp"
#include "preictal/rng.hpp"

namespace preictal {

using json = nlohmann::ordered_json;

std::uint64_t cell_seed(std::uint64_t master, ModelKind kind,
                        std::int64_t horizon_s, int iteration) {
  return derive_seed(master, model_kind_name(kind),
                     static_cast<std::uint64_t>(horizon_s),
                     static_cast<std::uint64_t>(iteration));
}

// ---------------------------------------------------------------------------
// Report emission
// ---------------------------------------------------------------------------

namespace {

std::string fmt(double v, const char* spec = "%.6f") {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

std::string join_flags(const std::vector<std::string>& flags) {
  std::string s;
  for (const auto& f : flags) {
    if (!s.empty()) s += ';';
    s += f;
  }
  return s;
}

constexpr const char* kMetricNames[] = {"precision", "accuracy",    "specificity",
                                        "sensitivity", "f1", "mcc"};

double metric_value(const MetricsRecord& m, const std::string& name) {
  if (name == "precision") return m.precision;
  if (name == "accuracy") return m.accuracy;
  if (name == "specificity") return m.specificity;
  if (name == "sensitivity") return m.sensitivity;
  if (name == "f1") return m.f1;
  return m.mcc;
}

}  // namespace

void emit_report(const std::vector<ReportCell>& cells, const std::string& out_dir) {
  if (cells.empty()) {
    throw Error(errc::length_mismatch, "no report cells to emit");
  }
  make_directories(out_dir);

  // cells.csv
  std::string csv =
      "model,horizon_s,iteration,tp,fp,tn,fn,precision,accuracy,specificity,"
      "sensitivity,f1,mcc,degenerate_flags,wall_time_s\n";
  for (const auto& c : cells) {
    csv += std::string(model_kind_name(c.model)) + ',' +
           std::to_string(c.horizon_s) + ',' + std::to_string(c.iteration) + ',' +
           std::to_string(c.counts.tp) + ',' + std::to_string(c.counts.fp) + ',' +
           std::to_string(c.counts.tn) + ',' + std::to_string(c.counts.fn) + ',' +
           fmt(c.metrics.precision) + ',' + fmt(c.metrics.accuracy) + ',' +
           fmt(c.metrics.specificity) + ',' + fmt(c.metrics.sensitivity) + ',' +
           fmt(c.metrics.f1) + ',' + fmt(c.metrics.mcc) + ',' +
           join_flags(c.metrics.degenerate_flags) + ',' +
           fmt(c.wall_time_s, "%.3f") + '\n';
  }
  write_text_file(out_dir + "/cells.csv", csv);

  // Sorted unique horizons and the model kinds that actually appear.
  std::vector<std::int64_t> horizons;
  std::vector<ModelKind> kinds;
  for (const auto& c : cells) {
    if (std::find(horizons.begin(), horizons.end(), c.horizon_s) == horizons.end()) {
      horizons.push_back(c.horizon_s);
    }
    if (std::find(kinds.begin(), kinds.end(), c.model) == kinds.end()) {
      kinds.push_back(c.model);
    }
  }
  std::sort(horizons.begin(), horizons.end());

  // summary.json: per model x horizon x metric five-number summaries.
  json summary;
  for (const ModelKind kind : kinds) {
    json per_horizon;
    for (const std::int64_t h : horizons) {
      json per_metric;
      for (const char* metric : kMetricNames) {
        std::vector<double> values;
        for (const auto& c : cells) {
          if (c.model == kind && c.horizon_s == h) {
            values.push_back(metric_value(c.metrics, metric));
          }
        }
        if (values.empty()) continue;
        const DistributionSummary s = summarize(values);
        per_metric[metric] = {{"min", s.min},         {"q1", s.q1},
                              {"median", s.median},   {"q3", s.q3},
                              {"max", s.max},         {"outliers", s.outliers},
                              {"n", s.n}};
      }
      if (!per_metric.empty()) per_horizon[std::to_string(h)] = std::move(per_metric);
    }
    summary[model_kind_name(kind)] = std::move(per_horizon);
  }
  write_text_file(out_dir + "/summary.json", summary.dump(2) + "\n");

  // best.csv: per horizon, the best cell value per metric and its model.
  std::string best = "horizon_s";
  for (const char* metric : kMetricNames) {
    best += std::string(",") + metric + ',' + metric + "_model";
  }
  best += '\n';
  for (const std::int64_t h : horizons) {
    best += std::to_string(h);
    for (const char* metric : kMetricNames) {
      double top = 0.0;
      const char* top_model = "";
      bool any = false;
      for (const auto& c : cells) {
        if (c.horizon_s != h) continue;
        const double v = metric_value(c.metrics, metric);
        if (!any || v > top) {
          top = v;
          top_model = model_kind_name(c.model);
          any = true;
        }
      }
      best += ',' + fmt(top) + ',' + top_model;
    }
    best += '\n';
  }
  write_text_file(out_dir + "/best.csv", best);
}

void write_attribution_csv(const ChannelAttribution& attribution, const std::string& path) {
  std::string csv = "component,channel,similarity\n";
  for (const auto& a : attribution) {
    csv += std::to_string(a.component) + ',' + a.channel + ',' + fmt(a.similarity) + '\n';
  }
  write_text_file(path, csv);
}

std::vector<ReportCell> read_cells_csv(const std::string& path) {
  const std::string text = read_text_file(path);
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) {
    throw Error(errc::io_error, "empty cells file " + path);
  }
  std::vector<ReportCell> cells;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::string col;
    std::istringstream ls(line);
    while (std::getline(ls, col, ',')) cols.push_back(col);
    if (cols.size() < 15) {
      throw Error(errc::io_error, "short row in " + path + ": " + line);
    }
    ReportCell c;
    c.model = model_kind_from_name(cols[0]);
    c.horizon_s = std::stoll(cols[1]);
    c.iteration = std::stoi(cols[2]);
    c.counts.tp = std::stoll(cols[3]);
    c.counts.fp = std::stoll(cols[4]);
    c.counts.tn = std::stoll(cols[5]);
    c.counts.fn = std::stoll(cols[6]);
    c.metrics.precision = std::stod(cols[7]);
    c.metrics.accuracy = std::stod(cols[8]);
    c.metrics.specificity = std::stod(cols[9]);
    c.metrics.sensitivity = std::stod(cols[10]);
    c.metrics.f1 = std::stod(cols[11]);
    c.metrics.mcc = std::stod(cols[12]);
    if (!cols[13].empty()) {
      std::istringstream fs_(cols[13]);
      std::string flag;
      while (std::getline(fs_, flag, ';')) c.metrics.degenerate_flags.push_back(flag);
    }
    c.wall_time_s = std::stod(cols[14]);
    cells.push_back(std::move(c));
  }
  return cells;
}

// ---------------------------------------------------------------------------
// Pipeline model serialization
// ---------------------------------------------------------------------------

namespace {

constexpr char kPipeMagic[8] = {'P', 'I', 'C', 'T', 'P', 'I', 'P', 'E'};
constexpr std::uint32_t kPipeVersion = 1;

void write_matrix(detail::ByteWriter& w, const Eigen::MatrixXd& m) {
  w.u64(static_cast<std::uint64_t>(m.rows()));
  w.u64(static_cast<std::uint64_t>(m.cols()));
  w.f64_block(m.data(), static_cast<std::size_t>(m.size()));
}

Eigen::MatrixXd read_matrix(detail::ByteReader& r) {
  const auto rows = static_cast<Eigen::Index>(r.u64());
  const auto cols = static_cast<Eigen::Index>(r.u64());
  const auto data = r.f64_block();
  if (static_cast<Eigen::Index>(data.size()) != rows * cols) {
    throw Error(errc::corrupt_model, "matrix block size mismatch");
  }
  Eigen::MatrixXd m(rows, cols);
  std::memcpy(m.data(), data.data(), data.size() * 8);
  return m;
}

}  // namespace

std::vector<std::uint8_t> save_pipeline(const PipelineModel& pipeline) {
  detail::ByteWriter payload;
  payload.u32(static_cast<std::uint32_t>(pipeline.montage.keep_channels.size()));
  for (const auto& ch : pipeline.montage.keep_channels) payload.str(ch);
  payload.u32(static_cast<std::uint32_t>(pipeline.montage.rename_map.size()));
  for (const auto& [from, to] : pipeline.montage.rename_map) {
    payload.str(from);
    payload.str(to);
  }
  payload.f64(pipeline.filter.low_cut_hz);
  payload.f64(pipeline.filter.high_cut_hz);
  payload.i32(pipeline.filter.sampling_rate_hz);
  payload.i32(pipeline.filter.num_taps);

  payload.f64_block(pipeline.ica.channel_means.data(),
                    static_cast<std::size_t>(pipeline.ica.channel_means.size()));
  write_matrix(payload, pipeline.ica.whitening);
  write_matrix(payload, pipeline.ica.unmixing);
  payload.u8(pipeline.ica.converged ? 1 : 0);
  payload.i32(pipeline.ica.iterations_used);
  payload.i64(pipeline.horizon_s);

  const auto core = save_model(pipeline.core);
  payload.u64(core.size());
  for (std::uint8_t b : core) payload.u8(b);

  detail::ByteWriter out;
  for (char c : kPipeMagic) out.u8(static_cast<std::uint8_t>(c));
  out.u32(kPipeVersion);
  const auto& body = payload.bytes();
  out.u64(body.size());
  for (std::uint8_t b : body) out.u8(b);
  out.u32(detail::crc32(body));
  return out.take();
}

PipelineModel load_pipeline(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < sizeof(kPipeMagic) + 4 + 8 + 4) {
    throw Error(errc::corrupt_model, "pipeline file too short");
  }
  for (std::size_t i = 0; i < sizeof(kPipeMagic); ++i) {
    if (bytes[i] != static_cast<std::uint8_t>(kPipeMagic[i])) {
      throw Error(errc::corrupt_model, "bad pipeline magic tag");
    }
  }
  detail::ByteReader header(bytes.subspan(sizeof(kPipeMagic)));
  const std::uint32_t version = header.u32();
  if (version != kPipeVersion) {
    throw Error(errc::version_mismatch,
                "pipeline format version " + std::to_string(version));
  }
  const std::uint64_t body_size = header.u64();
  const std::size_t body_at = sizeof(kPipeMagic) + 4 + 8;
  if (bytes.size() < body_at + body_size + 4) {
    throw Error(errc::corrupt_model, "pipeline file truncated");
  }
  const auto body = bytes.subspan(body_at, body_size);
  detail::ByteReader tail(bytes.subspan(body_at + body_size));
  if (detail::crc32(body) != tail.u32()) {
    throw Error(errc::corrupt_model, "pipeline checksum mismatch");
  }

  detail::ByteReader r(body);
  PipelineModel p;
  p.montage.keep_channels.clear();
  const std::uint32_t keep = r.u32();
  for (std::uint32_t i = 0; i < keep; ++i) p.montage.keep_channels.push_back(r.str());
  const std::uint32_t renames = r.u32();
  for (std::uint32_t i = 0; i < renames; ++i) {
    const std::string from = r.str();
    p.montage.rename_map[from] = r.str();
  }
  p.filter.low_cut_hz = r.f64();
  p.filter.high_cut_hz = r.f64();
  p.filter.sampling_rate_hz = r.i32();
  p.filter.num_taps = r.i32();

  const auto means = r.f64_block();
  p.ica.channel_means = Eigen::Map<const Eigen::VectorXd>(
      means.data(), static_cast<Eigen::Index>(means.size()));
  p.ica.whitening = read_matrix(r);
  p.ica.unmixing = read_matrix(r);
  p.ica.converged = r.u8() != 0;
  p.ica.iterations_used = r.i32();
  p.horizon_s = r.i64();

  const std::uint64_t core_size = r.u64();
  if (core_size > r.remaining()) {
    throw Error(errc::corrupt_model, "embedded model truncated");
  }
  std::vector<std::uint8_t> core(core_size);
  for (std::uint64_t i = 0; i < core_size; ++i) core[i] = r.u8();
  p.core = load_model(core);
  return p;
}

// ---------------------------------------------------------------------------
// Dataset loading
// ---------------------------------------------------------------------------

namespace {

struct IngestResult {
  DatasetManifest manifest;
  std::vector<Epoch> epochs;              // montage channels x 1280
  std::uint64_t data_hash = 0;            // over raw summary + EDF bytes
};

std::uint64_t mix(std::uint64_t h, std::uint64_t v) { return splitmix64(h ^ v); }

std::uint64_t hash_bytes(std::uint64_t h, const std::uint8_t* p, std::size_t n) {
  std::uint64_t acc = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < n; ++i) {
    acc ^= p[i];
    acc *= 0x100000001b3ULL;
  }
  return mix(h, acc);
}

// Parses one EDF, reduces to the montage, and appends its epochs.
void ingest_recording(const std::vector<std::uint8_t>& bytes,
                      const ManifestFile& file, const MontageSpec& montage,
                      const std::string& patient_id, std::vector<Epoch>& epochs) {
  Recording rec = parse_edf(bytes);
  rec.global_start_s = static_cast<double>(file.global_start_s);
  const Recording reduced = apply_montage(rec, montage);
  auto file_epochs = segment_epochs(reduced, patient_id);
  for (auto& e : file_epochs) epochs.push_back(std::move(e));
}

IngestResult ingest_directory(const std::string& dir, const MontageSpec& montage) {
  IngestResult r;
  const std::string summary_path = find_summary_file(dir);
  const std::string summary_text = read_text_file(summary_path);
  r.manifest = build_manifest(parse_summary(summary_text));

  std::uint64_t h = hash_bytes(0, reinterpret_cast<const std::uint8_t*>(summary_text.data()),
                               summary_text.size());
  for (const auto& f : r.manifest.files) {
    const auto bytes = read_binary_file(dir + "/" + f.name);
    h = hash_bytes(h, bytes.data(), bytes.size());
    ingest_recording(bytes, f, montage, r.manifest.patient_id, r.epochs);
  }
  r.data_hash = h;
  return r;
}

IngestResult ingest_synth(const SynthSpec& spec, const MontageSpec& montage,
                          const std::string& dataset_dir) {
  const SynthDataset data = generate(spec);
  make_directories(dataset_dir);
  write_text_file(dataset_dir + "/chb99-summary.txt", data.summary);
  for (const auto& f : data.files) {
    write_binary_file(dataset_dir + "/" + f.name, f.bytes);
  }

  IngestResult r;
  r.manifest = build_manifest(parse_summary(data.summary));
  std::uint64_t h = hash_bytes(0, reinterpret_cast<const std::uint8_t*>(data.summary.data()),
                               data.summary.size());
  for (const auto& f : r.manifest.files) {
    const auto it = std::find_if(data.files.begin(), data.files.end(),
                                 [&](const SynthFile& sf) { return sf.name == f.name; });
    if (it == data.files.end()) {
      throw Error(errc::io_error, "generated dataset is missing " + f.name);
    }
    h = hash_bytes(h, it->bytes.data(), it->bytes.size());
    ingest_recording(it->bytes, f, montage, r.manifest.patient_id, r.epochs);
  }
  r.data_hash = h;
  return r;
}

// ---------------------------------------------------------------------------
// Preprocessing cache
// ---------------------------------------------------------------------------

struct Preprocessed {
  FeatureTensor features;
  std::vector<std::int64_t> start_times;
  IcaModel ica;
  ChannelAttribution attribution;
};

constexpr std::uint32_t kCacheVersion = 2;

std::string cache_key(const ExperimentConfig& cfg, std::uint64_t data_hash,
                      std::size_t ica_fit_count) {
  std::uint64_t h = data_hash;
  h = mix(h, kCacheVersion);
  h = mix(h, static_cast<std::uint64_t>(cfg.filter.num_taps));
  h = mix(h, std::bit_cast<std::uint64_t>(cfg.filter.low_cut_hz));
  h = mix(h, std::bit_cast<std::uint64_t>(cfg.filter.high_cut_hz));
  h = mix(h, static_cast<std::uint64_t>(cfg.filter.sampling_rate_hz));
  h = mix(h, static_cast<std::uint64_t>(cfg.ica.n_components));
  h = mix(h, static_cast<std::uint64_t>(cfg.ica.nonlinearity));
  h = mix(h, std::bit_cast<std::uint64_t>(cfg.ica.logcosh_alpha));
  h = mix(h, static_cast<std::uint64_t>(cfg.ica.max_iterations));
  h = mix(h, std::bit_cast<std::uint64_t>(cfg.ica.tolerance));
  h = mix(h, cfg.ica.seed);
  h = mix(h, static_cast<std::uint64_t>(ica_fit_count));
  for (const auto& ch : cfg.montage.keep_channels) h = mix(h, fnv1a64(ch));
  for (const auto& [from, to] : cfg.montage.rename_map) {
    h = mix(h, fnv1a64(from));
    h = mix(h, fnv1a64(to));
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void cache_store(const std::string& path, const Preprocessed& p) {
  detail::ByteWriter w;
  w.u64(p.features.n);
  w.u64(p.features.channels);
  w.u64(p.features.timesteps);
  w.f64_block(p.features.values.data(), p.features.values.size());
  w.u64(p.start_times.size());
  for (std::int64_t t : p.start_times) w.i64(t);
  w.f64_block(p.ica.channel_means.data(),
              static_cast<std::size_t>(p.ica.channel_means.size()));
  write_matrix(w, p.ica.whitening);
  write_matrix(w, p.ica.unmixing);
  w.u8(p.ica.converged ? 1 : 0);
  w.i32(p.ica.iterations_used);
  w.u32(static_cast<std::uint32_t>(p.attribution.size()));
  for (const auto& a : p.attribution) {
    w.i32(a.component);
    w.str(a.channel);
    w.f64(a.similarity);
  }
  detail::ByteWriter out;
  const auto& body = w.bytes();
  out.u64(body.size());
  for (std::uint8_t b : body) out.u8(b);
  out.u32(detail::crc32(body));
  write_binary_file(path, out.bytes());
}

bool cache_load(const std::string& path, Preprocessed& p) {
  std::vector<std::uint8_t> bytes;
  try {
    bytes = read_binary_file(path);
  } catch (const Error&) {
    return false;
  }
  try {
    detail::ByteReader header(bytes);
    const std::uint64_t body_size = header.u64();
    if (bytes.size() < 8 + body_size + 4) return false;
    const auto body = std::span<const std::uint8_t>(bytes).subspan(8, body_size);
    detail::ByteReader tail(std::span<const std::uint8_t>(bytes).subspan(8 + body_size));
    if (detail::crc32(body) != tail.u32()) return false;

    detail::ByteReader r(body);
    p.features.n = r.u64();
    p.features.channels = r.u64();
    p.features.timesteps = r.u64();
    p.features.values = r.f64_block();
    if (p.features.values.size() != p.features.n * p.features.channels * p.features.timesteps) {
      return false;
    }
    const std::uint64_t nt = r.u64();
    p.start_times.resize(nt);
    for (std::uint64_t i = 0; i < nt; ++i) p.start_times[i] = r.i64();
    const auto means = r.f64_block();
    p.ica.channel_means = Eigen::Map<const Eigen::VectorXd>(
        means.data(), static_cast<Eigen::Index>(means.size()));
    p.ica.whitening = read_matrix(r);
    p.ica.unmixing = read_matrix(r);
    p.ica.converged = r.u8() != 0;
    p.ica.iterations_used = r.i32();
    p.attribution.clear();
    const std::uint32_t na = r.u32();
    for (std::uint32_t i = 0; i < na; ++i) {
      ComponentAttribution a;
      a.component = r.i32();
      a.channel = r.str();
      a.similarity = r.f64();
      p.attribution.push_back(std::move(a));
    }
    return true;
  } catch (const Error&) {
    return false;
  }
}

// ---------------------------------------------------------------------------
// Grid execution
// ---------------------------------------------------------------------------

FeatureTensor gather(const FeatureTensor& t, const std::vector<std::size_t>& idx) {
  FeatureTensor out;
  out.n = idx.size();
  out.channels = t.channels;
  out.timesteps = t.timesteps;
  out.values.resize(out.n * out.channels * out.timesteps);
  const std::size_t stride = t.channels * t.timesteps;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    std::copy_n(t.values.data() + idx[i] * stride, stride,
                out.values.data() + i * stride);
  }
  return out;
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& config) {
  RunResult result;
  auto stage = [&](const std::string& name) { result.stage_log.push_back(name); };
  make_directories(config.out_dir);
  std::string current_stage = "setup";

  try {
    // --- data -------------------------------------------------------------
    current_stage = "data";
    stage("data");
    IngestResult ingest;
    if (config.source == ExperimentConfig::Source::synth) {
      ingest = ingest_synth(config.synth, config.montage, config.out_dir + "/dataset");
    } else {
      ingest = ingest_directory(config.data_directory, config.montage);
    }
    const DatasetManifest& manifest = ingest.manifest;
    const std::size_t n_all = ingest.epochs.size();
    result.n_epochs_total = n_all;
    if (n_all == 0) {
      throw Error(errc::degenerate_split, "dataset produced no epochs");
    }
    stage("ingest n=" + std::to_string(n_all));

    std::vector<std::int64_t> start_times(n_all);
    for (std::size_t i = 0; i < n_all; ++i) {
      start_times[i] = ingest.epochs[i].global_start_s;
    }

    // Per-horizon usable epoch count after trimming on the shifted window.
    std::int64_t last_seizure_end = 0;
    const bool have_seizures = !manifest.seizures.empty();
    for (const auto& sz : manifest.seizures) {
      last_seizure_end = std::max(last_seizure_end, sz.end_s);
    }
    auto trimmed_count = [&](std::int64_t horizon) {
      if (!have_seizures) return n_all;
      std::size_t n = 0;
      for (const std::int64_t t : start_times) {
        if (t + horizon < last_seizure_end) ++n;
      }
      return n;
    };
    std::size_t min_train = n_all;
    for (const std::int64_t h : config.horizons_s) {
      const std::size_t n_h = trimmed_count(h);
      const auto train_h = static_cast<std::size_t>(
          std::floor(config.train_fraction * static_cast<double>(n_h) + 1e-9));
      min_train = std::min(min_train, train_h);
    }
    // The ICA fit set is inside every horizon's training split, so no test
    // epoch leaks into the fitted transform.
    std::size_t ica_fit_count = min_train;
    if (ica_fit_count < 2) {
      throw Error(errc::degenerate_split, "not enough training epochs for ICA");
    }

    // --- preprocess (filter -> ICA), cached --------------------------------
    Preprocessed pre;
    const std::string cache_dir = config.out_dir + "/cache";
    const std::string key = cache_key(config, ingest.data_hash, ica_fit_count);
    const std::string cache_path = cache_dir + "/" + key + ".bin";
    bool cached = false;
    if (config.cache_enabled && cache_load(cache_path, pre) &&
        pre.start_times == start_times) {
      cached = true;
      stage("filter (cached)");
      stage("ica_fit (cached)");
      stage("ica_transform (cached)");
    }

    if (!cached) {
      current_stage = "filter";
      const FirKernel kernel = design_bandpass(config.filter);
      {
        const int jobs = std::max(1, config.jobs);
        std::vector<std::thread> workers;
        for (int w = 0; w < jobs; ++w) {
          workers.emplace_back([&, w] {
            for (std::size_t i = static_cast<std::size_t>(w); i < n_all;
                 i += static_cast<std::size_t>(jobs)) {
              ingest.epochs[i] = apply_filter(ingest.epochs[i], kernel);
            }
          });
        }
        for (auto& t : workers) t.join();
      }
      stage("filter");

      current_stage = "ica_fit";
      std::size_t fit_epochs = ica_fit_count;
      std::size_t fit_stride = 1;
      if (config.ica_fit_max_epochs > 0 && fit_epochs > config.ica_fit_max_epochs) {
        fit_stride = (fit_epochs + config.ica_fit_max_epochs - 1) / config.ica_fit_max_epochs;
      }
      std::vector<std::size_t> fit_idx;
      for (std::size_t i = 0; i < fit_epochs; i += fit_stride) fit_idx.push_back(i);

      const auto n_channels = static_cast<Eigen::Index>(ingest.epochs[0].data.rows());
      Eigen::MatrixXd concat(n_channels,
                             static_cast<Eigen::Index>(fit_idx.size()) * kEpochSamples);
      for (std::size_t j = 0; j < fit_idx.size(); ++j) {
        concat.middleCols(static_cast<Eigen::Index>(j) * kEpochSamples, kEpochSamples) =
            ingest.epochs[fit_idx[j]].data;
      }
      IcaConfig ica_cfg = config.ica;
      ica_cfg.seed = derive_seed(config.master_seed, "ica", config.ica.seed);
      pre.ica = fit_ica(concat, ica_cfg);
      stage("ica_fit epochs=" + std::to_string(fit_idx.size()) +
            (pre.ica.converged ? "" : " (not converged)"));

      std::vector<std::string> labels;
      for (const auto& sig : config.montage.keep_channels) labels.push_back(sig);
      pre.attribution = attribute_channels(pre.ica, concat, labels);
      concat.resize(0, 0);

      current_stage = "ica_transform";
      pre.features.n = n_all;
      pre.features.channels = static_cast<std::size_t>(config.ica.n_components);
      pre.features.timesteps = kEpochSamples;
      pre.features.values.resize(pre.features.n * pre.features.channels *
                                 pre.features.timesteps);
      const Eigen::MatrixXd map = pre.ica.component_map();
      for (std::size_t i = 0; i < n_all; ++i) {
        const Eigen::MatrixXd y =
            map * (ingest.epochs[i].data.colwise() - pre.ica.channel_means);
        double* dst = pre.features.values.data() +
                      i * pre.features.channels * pre.features.timesteps;
        for (std::size_t c = 0; c < pre.features.channels; ++c) {
          for (std::size_t t = 0; t < pre.features.timesteps; ++t) {
            dst[c * pre.features.timesteps + t] =
                y(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(t));
          }
        }
        ingest.epochs[i].data.resize(0, 0);  // release the 16-channel copy
      }
      pre.start_times = start_times;
      stage("ica_transform");

      if (config.cache_enabled) {
        make_directories(cache_dir);
        cache_store(cache_path, pre);
      }
    }
    result.attribution = pre.attribution;
    result.ica_converged = pre.ica.converged;
    ingest.epochs.clear();
    ingest.epochs.shrink_to_fit();

    // --- grid ---------------------------------------------------------------
    current_stage = "grid";
    struct Task {
      ModelKind kind;
      std::int64_t horizon;
      int iteration;
      FeatureView train_view, test_view;
      const FeatureTensor* train_owned = nullptr;  // shuffle mode only
      const FeatureTensor* test_owned = nullptr;
      const std::vector<int>* train_labels = nullptr;
      const std::vector<int>* test_labels = nullptr;
    };

    // Per-horizon label vectors and (for shuffle mode) materialized tensors.
    struct HorizonData {
      std::vector<int> train_labels, test_labels;
      std::unique_ptr<FeatureTensor> train_tensor, test_tensor;  // shuffle mode
      std::size_t train_begin = 0, train_count = 0, test_begin = 0, test_count = 0;
    };
    std::vector<std::unique_ptr<HorizonData>> horizon_data;
    std::vector<Task> tasks;

    for (const std::int64_t h : config.horizons_s) {
      const std::size_t n_h = trimmed_count(h);
      if (n_h < 2) {
        throw Error(errc::degenerate_split,
                    "horizon " + std::to_string(h) + " trims the dataset to " +
                        std::to_string(n_h) + " epochs");
      }
      stage("label h=" + std::to_string(h));

      std::vector<int> labels(n_h, 0);
      for (std::size_t i = 0; i < n_h; ++i) {
        const std::int64_t b = start_times[i] + h;
        for (const auto& sz : manifest.seizures) {
          if (b < sz.end_s && sz.start_s < b + kEpochSeconds) {
            labels[i] = 1;
            break;
          }
        }
      }

      const auto n_train = static_cast<std::size_t>(
          std::floor(config.train_fraction * static_cast<double>(n_h) + 1e-9));
      if (n_train == 0 || n_train >= n_h) {
        throw Error(errc::degenerate_split,
                    "horizon " + std::to_string(h) + " split is degenerate");
      }
      stage("split h=" + std::to_string(h) + " train=" + std::to_string(n_train) +
            " test=" + std::to_string(n_h - n_train));

      auto hd = std::make_unique<HorizonData>();
      std::vector<std::size_t> order(n_h);
      std::iota(order.begin(), order.end(), 0);
      if (config.shuffle_split_seed) {
        Rng rng(derive_seed(*config.shuffle_split_seed, "split", static_cast<std::uint64_t>(h)));
        rng.shuffle(order);
        std::vector<std::size_t> train_idx(order.begin(),
                                           order.begin() + static_cast<std::ptrdiff_t>(n_train));
        std::vector<std::size_t> test_idx(order.begin() + static_cast<std::ptrdiff_t>(n_train),
                                          order.end());
        std::sort(train_idx.begin(), train_idx.end());
        std::sort(test_idx.begin(), test_idx.end());
        hd->train_tensor = std::make_unique<FeatureTensor>(gather(pre.features, train_idx));
        hd->test_tensor = std::make_unique<FeatureTensor>(gather(pre.features, test_idx));
        for (std::size_t i : train_idx) hd->train_labels.push_back(labels[i]);
        for (std::size_t i : test_idx) hd->test_labels.push_back(labels[i]);
      } else {
        hd->train_begin = 0;
        hd->train_count = n_train;
        hd->test_begin = n_train;
        hd->test_count = n_h - n_train;
        hd->train_labels.assign(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(n_train));
        hd->test_labels.assign(labels.begin() + static_cast<std::ptrdiff_t>(n_train),
                               labels.begin() + static_cast<std::ptrdiff_t>(n_h));
      }

      for (const ModelKind kind : config.models) {
        for (int it = 0; it < config.iterations; ++it) {
          Task task;
          task.kind = kind;
          task.horizon = h;
          task.iteration = it;
          if (config.shuffle_split_seed) {
            task.train_view = FeatureView(*hd->train_tensor);
            task.test_view = FeatureView(*hd->test_tensor);
          } else {
            task.train_view = FeatureView(pre.features, hd->train_begin, hd->train_count);
            task.test_view = FeatureView(pre.features, hd->test_begin, hd->test_count);
          }
          task.train_labels = &hd->train_labels;
          task.test_labels = &hd->test_labels;
          tasks.push_back(task);
        }
      }
      horizon_data.push_back(std::move(hd));
    }

    result.cells.resize(tasks.size());
    std::vector<std::unique_ptr<PipelineModel>> saved(tasks.size());
    std::atomic<std::size_t> failed{0};
    std::string first_error;
    std::mutex error_mutex;

    auto run_task = [&](std::size_t ti) {
      const Task& task = tasks[ti];
      ModelSpec spec = config.spec_for(task.kind);
      if (config.iterations_mode == ExperimentConfig::IterationsMode::checkpoint) {
        // One conceptual training run; iteration k reports the model after
        // k+1 training epochs (mini-batch order is seed-stable, so a fresh
        // shorter run equals a checkpoint of the long one).
        spec.seed = cell_seed(config.master_seed, task.kind, task.horizon, 0);
        spec.train_epochs = task.iteration + 1;
      } else {
        spec.seed = cell_seed(config.master_seed, task.kind, task.horizon, task.iteration);
      }

      const auto t0 = std::chrono::steady_clock::now();
      const TrainedModel model = fit(spec, task.train_view, *task.train_labels);
      const auto preds = predict(model, task.test_view);
      const auto t1 = std::chrono::steady_clock::now();

      std::vector<int> predicted;
      predicted.reserve(preds.size());
      for (const auto& p : preds) predicted.push_back(p.label);

      ReportCell cell;
      cell.model = task.kind;
      cell.horizon_s = task.horizon;
      cell.iteration = task.iteration;
      cell.counts = confusion_counts(predicted, *task.test_labels);
      cell.metrics = compute_metrics(cell.counts);
      cell.wall_time_s =
          config.deterministic_timing
              ? 0.0
              : std::chrono::duration<double>(t1 - t0).count();
      result.cells[ti] = std::move(cell);

      if (config.save_models && task.iteration == 0) {
        auto pm = std::make_unique<PipelineModel>();
        pm->core = model;
        pm->montage = config.montage;
        pm->filter = config.filter;
        pm->ica = pre.ica;
        pm->horizon_s = task.horizon;
        saved[ti] = std::move(pm);
      }
    };

    const int jobs = std::max(1, config.jobs);
    if (jobs == 1) {
      for (std::size_t ti = 0; ti < tasks.size(); ++ti) {
        stage("train model=" + std::string(model_kind_name(tasks[ti].kind)) +
              " h=" + std::to_string(tasks[ti].horizon) +
              " i=" + std::to_string(tasks[ti].iteration));
        run_task(ti);
      }
    } else {
      for (const auto& t : tasks) {
        stage("train model=" + std::string(model_kind_name(t.kind)) +
              " h=" + std::to_string(t.horizon) + " i=" + std::to_string(t.iteration));
      }
      std::vector<std::thread> workers;
      for (int w = 0; w < jobs; ++w) {
        workers.emplace_back([&, w] {
          for (std::size_t ti = static_cast<std::size_t>(w); ti < tasks.size();
               ti += static_cast<std::size_t>(jobs)) {
            try {
              run_task(ti);
            } catch (const std::exception& e) {
              ++failed;
              const std::lock_guard<std::mutex> lock(error_mutex);
              if (first_error.empty()) first_error = e.what();
            }
          }
        });
      }
      for (auto& t : workers) t.join();
      if (failed > 0) {
        throw Error(errc::non_finite_loss, "grid cell failed: " + first_error);
      }
    }

    // --- reports -------------------------------------------------------------
    current_stage = "report";
    stage("report");
    emit_report(result.cells, config.out_dir);
    write_attribution_csv(result.attribution, config.out_dir + "/attribution.csv");

    if (config.save_models) {
      make_directories(config.out_dir + "/models");
      for (std::size_t ti = 0; ti < tasks.size(); ++ti) {
        if (!saved[ti]) continue;
        const std::string path = config.out_dir + "/models/" +
                                 model_kind_name(tasks[ti].kind) + "_h" +
                                 std::to_string(tasks[ti].horizon) + ".ppm";
        write_binary_file(path, save_pipeline(*saved[ti]));
      }
    }

    std::string log;
    for (const auto& line : result.stage_log) log += line + '\n';
    write_text_file(config.out_dir + "/run.log", log);
    return result;
  } catch (const Error& e) {
    // Failure manifest: keep whatever partial results exist.
    std::string note = "stage: " + current_stage + "\nerror: " + e.what() + "\n";
    try {
      write_text_file(config.out_dir + "/failure.txt", note);
      std::vector<ReportCell> partial;
      for (const auto& c : result.cells) {
        if (c.counts.total() > 0) partial.push_back(c);
      }
      if (!partial.empty()) emit_report(partial, config.out_dir);
    } catch (...) {
    }
    throw Error(e.code(), "[" + current_stage + "] " + e.what());
  }
}

ReportCell evaluate_pipeline(const PipelineModel& pipeline, const std::string& dataset_dir) {
  IngestResult ingest = ingest_directory(dataset_dir, pipeline.montage);
  if (ingest.epochs.empty()) {
    throw Error(errc::degenerate_split, "dataset produced no epochs");
  }

  const FirKernel kernel = design_bandpass(pipeline.filter);
  for (auto& e : ingest.epochs) e = apply_filter(e, kernel);

  const auto transformed = transform_epochs(ingest.epochs, pipeline.ica);
  const FeatureTensor features = FeatureTensor::from_epochs(transformed);
  const auto labels = generate_labels(transformed, ingest.manifest.seizures,
                                      HorizonConfig{pipeline.horizon_s});

  const auto preds = predict(pipeline.core, FeatureView(features));
  std::vector<int> predicted;
  predicted.reserve(preds.size());
  for (const auto& p : preds) predicted.push_back(p.label);

  ReportCell cell;
  cell.model = pipeline.core.spec.kind;
  cell.horizon_s = pipeline.horizon_s;
  cell.counts = confusion_counts(predicted, labels);
  cell.metrics = compute_metrics(cell.counts);
  return cell;
}

}  // namespace preictal
