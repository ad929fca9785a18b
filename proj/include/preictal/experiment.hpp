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

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "preictal/dsp.hpp"
#include "preictal/ica.hpp"
#include "preictal/metrics.hpp"
#include "preictal/models.hpp"
#include "preictal/segmentation.hpp"
#include "preictal/synth.hpp"

namespace preictal {

struct ExperimentConfig {
  enum class Source { synth, directory };
  enum class IterationsMode { reseed, checkpoint };

  Source source = Source::synth;
  std::string data_directory;
  SynthSpec synth;

  MontageSpec montage;
  FilterSpec filter;
  IcaConfig ica;
  std::size_t ica_fit_max_epochs = 0;  // 0 = every training epoch

  std::vector<ModelKind> models = {ModelKind::logistic_regression, ModelKind::knn,
                                   ModelKind::rnn, ModelKind::lstm, ModelKind::cnn};
  std::vector<std::int64_t> horizons_s = {1200, 2400, 3600, 4800, 6000, 7200};
  int iterations = 10;
  IterationsMode iterations_mode = IterationsMode::reseed;
  double train_fraction = kDefaultTrainFraction;
  std::optional<std::uint64_t> shuffle_split_seed;

  ModelSpec base_model;
  std::map<ModelKind, ModelSpec> model_overrides;  // resolved per-kind specs

  std::uint64_t master_seed = 0;
  std::string out_dir = "out";
  int jobs = 1;
  bool deterministic_timing = true;  // report wall times as 0 for byte-stable output
  bool save_models = false;
  bool cache_enabled = true;

  /// Per-kind spec: override when present, base otherwise (kind forced).
  ModelSpec spec_for(ModelKind kind) const;
};

/// Parses the key-value config text (see README for the schema).
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

struct ReportCell {
  ModelKind model = ModelKind::logistic_regression;
  std::int64_t horizon_s = 0;
  int iteration = 0;
  ConfusionCounts counts;
  MetricsRecord metrics;
  double wall_time_s = 0.0;
};

struct RunResult {
  std::vector<ReportCell> cells;
  ChannelAttribution attribution;
  std::vector<std::string> stage_log;
  bool ica_converged = true;
  std::size_t n_epochs_total = 0;
};

/// Ingest -> montage -> epochs -> filter -> ICA -> per-horizon label/split/
/// train/evaluate grid; writes cells.csv, summary.json, best.csv,
/// attribution.csv and run.log under config.out_dir.
RunResult run_experiment(const ExperimentConfig& config);

/// cells.csv + summary.json + best.csv under out_dir.
void emit_report(const std::vector<ReportCell>& cells, const std::string& out_dir);

void write_attribution_csv(const ChannelAttribution& attribution,
                           const std::string& path);

std::vector<ReportCell> read_cells_csv(const std::string& path);

/// Stable grid-cell seed: splitmix64 chain over (master, kind name, horizon,
/// iteration).
std::uint64_t cell_seed(std::uint64_t master, ModelKind kind,
                        std::int64_t horizon_s, int iteration);

/// A trained classifier bundled with everything needed to score raw EDF
/// input: montage, filter, ICA model and the training horizon.
struct PipelineModel {
  TrainedModel core;
  MontageSpec montage;
  FilterSpec filter;
  IcaModel ica;
  std::int64_t horizon_s = 0;
};

std::vector<std::uint8_t> save_pipeline(const PipelineModel& pipeline);
PipelineModel load_pipeline(std::span<const std::uint8_t> bytes);

/// Scores a dataset directory with a pipeline model: returns one cell worth
/// of metrics over every labeled epoch (no trimming, no split).
ReportCell evaluate_pipeline(const PipelineModel& pipeline,
                             const std::string& dataset_dir);

}  // namespace preictal
