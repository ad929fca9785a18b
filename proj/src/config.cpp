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

#include <algorithm>
#include <cctype>
#include <charconv>
#include <map>
#include <sstream>

#include "preictal/error.hpp"
#include "preictal/experiment.hpp"
#include "preictal/io.hpp"

namespace preictal {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) {
    cur = trim(cur);
    if (!cur.empty()) parts.push_back(cur);
  }
  return parts;
}

class KeyValues {
 public:
  explicit KeyValues(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line = line.substr(0, hash);
      line = trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) {
        throw Error(errc::config_error,
                    "line " + std::to_string(line_no) + ": expected key = value");
      }
      values_[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string str(const std::string& key, const std::string& fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }

  std::int64_t integer(const std::string& key, std::int64_t fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::int64_t v = 0;
    const std::string& s = it->second;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) {
      throw Error(errc::config_error, "'" + key + "' is not an integer: " + s);
    }
    return v;
  }

  double real(const std::string& key, double fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    char* end = nullptr;
    const double v = std::strtod(it->second.c_str(), &end);
    if (end != it->second.c_str() + it->second.size()) {
      throw Error(errc::config_error, "'" + key + "' is not a number: " + it->second);
    }
    return v;
  }

  bool boolean(const std::string& key, bool fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    if (it->second == "true" || it->second == "1" || it->second == "on") return true;
    if (it->second == "false" || it->second == "0" || it->second == "off") return false;
    throw Error(errc::config_error, "'" + key + "' is not a boolean: " + it->second);
  }

  const std::map<std::string, std::string>& all() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

// "0:1100-1300, 1:3200-3400" -> planted seizures (file:start-end seconds).
std::vector<PlannedSeizure> parse_seizure_plan(const std::string& text) {
  std::vector<PlannedSeizure> plan;
  for (const auto& item : split(text, ',')) {
    PlannedSeizure sz;
    const auto colon = item.find(':');
    const auto dash = item.find('-', colon == std::string::npos ? 0 : colon);
    if (colon == std::string::npos || dash == std::string::npos) {
      throw Error(errc::config_error,
                  "seizure plan entry '" + item + "' is not file:start-end");
    }
    try {
      sz.file_index = std::stoi(item.substr(0, colon));
      sz.start_s = std::stoll(item.substr(colon + 1, dash - colon - 1));
      sz.end_s = std::stoll(item.substr(dash + 1));
    } catch (const std::exception&) {
      throw Error(errc::config_error,
                  "seizure plan entry '" + item + "' is not file:start-end");
    }
    plan.push_back(sz);
  }
  return plan;
}

// "16x7x4, 32x5x4" -> conv blocks.
std::vector<CnnBlock> parse_cnn_blocks(const std::string& text) {
  std::vector<CnnBlock> blocks;
  for (const auto& item : split(text, ',')) {
    const auto parts = split(item, 'x');
    if (parts.size() != 3) {
      throw Error(errc::config_error,
                  "cnn block '" + item + "' is not filters x kernel x pool");
    }
    try {
      blocks.push_back({std::stoi(parts[0]), std::stoi(parts[1]), std::stoi(parts[2])});
    } catch (const std::exception&) {
      throw Error(errc::config_error, "cnn block '" + item + "' has bad numbers");
    }
  }
  return blocks;
}

void apply_model_keys(const KeyValues& kv, const std::string& prefix, ModelSpec& spec) {
  spec.hidden_size = static_cast<int>(kv.integer(prefix + "hidden_size", spec.hidden_size));
  spec.time_stride = static_cast<int>(kv.integer(prefix + "time_stride", spec.time_stride));
  spec.knn_k = static_cast<int>(kv.integer(prefix + "knn_k", spec.knn_k));
  spec.train_epochs = static_cast<int>(kv.integer(prefix + "train_epochs", spec.train_epochs));
  spec.learning_rate = kv.real(prefix + "learning_rate", spec.learning_rate);
  spec.batch_size = static_cast<int>(kv.integer(prefix + "batch_size", spec.batch_size));
  spec.balanced_class_weights =
      kv.boolean(prefix + "balanced", spec.balanced_class_weights);
  if (kv.has(prefix + "cnn_blocks")) {
    spec.cnn_blocks = parse_cnn_blocks(kv.str(prefix + "cnn_blocks", ""));
  }
}

}  // namespace

ModelSpec ExperimentConfig::spec_for(ModelKind kind) const {
  ModelSpec spec = base_model;
  if (const auto it = model_overrides.find(kind); it != model_overrides.end()) {
    spec = it->second;
  }
  spec.kind = kind;
  return spec;
}

ExperimentConfig parse_config(const std::string& text) {
  const KeyValues kv(text);
  ExperimentConfig cfg;

  const std::string source = kv.str("data.source", "synth");
  if (source == "synth") {
    cfg.source = ExperimentConfig::Source::synth;
  } else if (source == "directory") {
    cfg.source = ExperimentConfig::Source::directory;
    cfg.data_directory = kv.str("data.directory", "");
    if (cfg.data_directory.empty()) {
      throw Error(errc::config_error, "data.directory is required");
    }
  } else {
    throw Error(errc::config_error, "data.source must be synth or directory");
  }

  cfg.synth.seed = static_cast<std::uint64_t>(kv.integer("synth.seed", 0));
  cfg.synth.n_files = static_cast<int>(kv.integer("synth.n_files", cfg.synth.n_files));
  cfg.synth.file_duration_s = kv.integer("synth.file_duration_s", cfg.synth.file_duration_s);
  cfg.synth.n_channels = static_cast<int>(kv.integer("synth.n_channels", cfg.synth.n_channels));
  cfg.synth.background_uv = kv.real("synth.background_uv", cfg.synth.background_uv);
  cfg.synth.seizure_boost = kv.real("synth.seizure_boost", cfg.synth.seizure_boost);
  cfg.synth.duplicate_files =
      static_cast<int>(kv.integer("synth.duplicate_files", cfg.synth.duplicate_files));
  cfg.synth.shuffle_order = kv.boolean("synth.shuffle_order", cfg.synth.shuffle_order);
  cfg.synth.start_clock_s = kv.integer("synth.start_clock_s", cfg.synth.start_clock_s);
  cfg.synth.gap_s = kv.integer("synth.gap_s", cfg.synth.gap_s);
  if (kv.has("synth.seizures")) {
    cfg.synth.seizures = parse_seizure_plan(kv.str("synth.seizures", ""));
  }

  if (kv.has("montage.keep")) {
    cfg.montage.keep_channels = split(kv.str("montage.keep", ""), ',');
  }
  if (kv.has("montage.rename")) {
    for (const auto& pair : split(kv.str("montage.rename", ""), ',')) {
      const auto colon = pair.find(':');
      if (colon == std::string::npos) {
        throw Error(errc::config_error, "montage.rename entry '" + pair +
                                            "' is not source:target");
      }
      cfg.montage.rename_map[trim(pair.substr(0, colon))] = trim(pair.substr(colon + 1));
    }
  }

  cfg.filter.low_cut_hz = kv.real("filter.low_cut_hz", cfg.filter.low_cut_hz);
  cfg.filter.high_cut_hz = kv.real("filter.high_cut_hz", cfg.filter.high_cut_hz);
  cfg.filter.sampling_rate_hz =
      static_cast<int>(kv.integer("filter.sampling_rate_hz", cfg.filter.sampling_rate_hz));
  cfg.filter.num_taps = static_cast<int>(kv.integer("filter.num_taps", cfg.filter.num_taps));

  cfg.ica.n_components = static_cast<int>(kv.integer("ica.n_components", cfg.ica.n_components));
  const std::string nl = kv.str("ica.nonlinearity", "logcosh");
  if (nl == "logcosh") cfg.ica.nonlinearity = IcaNonlinearity::logcosh;
  else if (nl == "cube") cfg.ica.nonlinearity = IcaNonlinearity::cube;
  else throw Error(errc::config_error, "ica.nonlinearity must be logcosh or cube");
  cfg.ica.logcosh_alpha = kv.real("ica.alpha", cfg.ica.logcosh_alpha);
  cfg.ica.max_iterations =
      static_cast<int>(kv.integer("ica.max_iterations", cfg.ica.max_iterations));
  cfg.ica.tolerance = kv.real("ica.tolerance", cfg.ica.tolerance);
  cfg.ica_fit_max_epochs =
      static_cast<std::size_t>(kv.integer("ica.fit_max_epochs", 0));

  if (kv.has("models")) {
    cfg.models.clear();
    for (const auto& name : split(kv.str("models", ""), ',')) {
      cfg.models.push_back(model_kind_from_name(name));
    }
  }
  if (cfg.models.empty()) throw Error(errc::config_error, "models list is empty");

  if (kv.has("horizons_s")) {
    cfg.horizons_s.clear();
    for (const auto& h : split(kv.str("horizons_s", ""), ',')) {
      try {
        cfg.horizons_s.push_back(std::stoll(h));
      } catch (const std::exception&) {
        throw Error(errc::config_error, "bad horizon '" + h + "'");
      }
    }
  }
  for (const std::int64_t h : cfg.horizons_s) {
    if (h < 0 || h % kEpochSeconds != 0) {
      throw Error(errc::config_error,
                  "horizons must be non-negative multiples of 5 s, got " +
                      std::to_string(h));
    }
  }
  if (cfg.horizons_s.empty()) throw Error(errc::config_error, "horizons list is empty");

  cfg.iterations = static_cast<int>(kv.integer("iterations", cfg.iterations));
  if (cfg.iterations < 1) throw Error(errc::config_error, "iterations must be >= 1");
  const std::string mode = kv.str("iterations_mode", "reseed");
  if (mode == "reseed") cfg.iterations_mode = ExperimentConfig::IterationsMode::reseed;
  else if (mode == "checkpoint") cfg.iterations_mode = ExperimentConfig::IterationsMode::checkpoint;
  else throw Error(errc::config_error, "iterations_mode must be reseed or checkpoint");

  cfg.train_fraction = kv.real("train_fraction", cfg.train_fraction);
  if (!(cfg.train_fraction > 0.0) || !(cfg.train_fraction < 1.0)) {
    throw Error(errc::config_error, "train_fraction must be in (0, 1)");
  }
  if (kv.has("shuffle_split_seed")) {
    cfg.shuffle_split_seed =
        static_cast<std::uint64_t>(kv.integer("shuffle_split_seed", 0));
  }

  apply_model_keys(kv, "model.", cfg.base_model);
  for (const ModelKind kind : {ModelKind::logistic_regression, ModelKind::knn,
                               ModelKind::rnn, ModelKind::lstm, ModelKind::cnn}) {
    const std::string prefix = std::string("model.") + model_kind_name(kind) + ".";
    bool any = false;
    for (const auto& [key, value] : kv.all()) {
      (void)value;
      if (key.rfind(prefix, 0) == 0) { any = true; break; }
    }
    if (any) {
      ModelSpec spec = cfg.base_model;
      apply_model_keys(kv, prefix, spec);
      cfg.model_overrides[kind] = spec;
    }
  }

  cfg.master_seed = static_cast<std::uint64_t>(kv.integer("seed", 0));
  cfg.out_dir = kv.str("out", cfg.out_dir);
  cfg.jobs = static_cast<int>(kv.integer("jobs", cfg.jobs));
  if (cfg.jobs < 1) throw Error(errc::config_error, "jobs must be >= 1");
  cfg.deterministic_timing =
      kv.boolean("report.deterministic_timing", cfg.deterministic_timing);
  cfg.save_models = kv.boolean("save_models", cfg.save_models);
  cfg.cache_enabled = kv.boolean("cache.enabled", cfg.cache_enabled);
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  return parse_config(read_text_file(path));
}

}  // namespace preictal
