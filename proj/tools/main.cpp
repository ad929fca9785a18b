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

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "preictal/edf.hpp"
#include "preictal/error.hpp"
#include "preictal/experiment.hpp"
#include "preictal/io.hpp"
#include "preictal/metrics.hpp"
#include "preictal/models.hpp"
#include "preictal/rng.hpp"
#include "preictal/summary.hpp"
#include "preictal/synth.hpp"

namespace {

using namespace preictal;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

int exit_code_for(errc code) {
  switch (code) {
    case errc::non_finite_loss:
    case errc::rank_deficient:
      return kExitNumeric;
    case errc::config_error:
      return kExitUsage;
    default:
      return kExitData;
  }
}

struct CommonFlags {
  std::string config_path;
  std::optional<std::int64_t> seed;
  std::string out;
  std::optional<int> jobs;
  std::optional<std::int64_t> shuffle_split;
};

ExperimentConfig resolve_config(const CommonFlags& flags) {
  ExperimentConfig cfg =
      flags.config_path.empty() ? ExperimentConfig{} : load_config(flags.config_path);
  if (flags.seed) cfg.master_seed = static_cast<std::uint64_t>(*flags.seed);
  if (!flags.out.empty()) cfg.out_dir = flags.out;
  if (flags.jobs) cfg.jobs = *flags.jobs;
  if (flags.shuffle_split) {
    cfg.shuffle_split_seed = static_cast<std::uint64_t>(*flags.shuffle_split);
  }
  return cfg;
}

void add_common_flags(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path, "experiment config file");
  cmd->add_option("--seed", flags.seed, "master seed (overrides config)");
  cmd->add_option("--out", flags.out, "output directory (overrides config)");
  cmd->add_option("--jobs", flags.jobs, "worker threads for the training grid");
  cmd->add_option("--shuffle-split", flags.shuffle_split,
                  "use a shuffled train/test split with this seed");
}

int cmd_synth(const CommonFlags& flags) {
  ExperimentConfig cfg = resolve_config(flags);
  const SynthDataset data = generate(cfg.synth);
  const std::string dir = cfg.out_dir;
  make_directories(dir);
  write_text_file(dir + "/chb99-summary.txt", data.summary);
  for (const auto& f : data.files) write_binary_file(dir + "/" + f.name, f.bytes);
  std::printf("wrote %zu EDF files + summary to %s\n", data.files.size(), dir.c_str());
  return kExitOk;
}

int cmd_ingest(const CommonFlags& flags, const std::string& directory) {
  ExperimentConfig cfg = resolve_config(flags);
  const std::string summary_path = find_summary_file(directory);
  const DatasetManifest manifest =
      build_manifest(parse_summary(read_text_file(summary_path)));

  nlohmann::ordered_json j;
  j["patient_id"] = manifest.patient_id;
  j["sampling_rate_hz"] = manifest.sampling_rate_hz;
  j["channels"] = manifest.channel_roster;
  auto files = nlohmann::ordered_json::array();
  for (const auto& f : manifest.files) {
    files.push_back({{"name", f.name},
                     {"global_start_s", f.global_start_s},
                     {"global_end_s", f.global_end_s}});
  }
  j["files"] = std::move(files);
  auto seizures = nlohmann::ordered_json::array();
  for (const auto& s : manifest.seizures) {
    seizures.push_back({{"start_s", s.start_s}, {"end_s", s.end_s}});
  }
  j["seizures"] = std::move(seizures);

  make_directories(cfg.out_dir);
  write_text_file(cfg.out_dir + "/manifest.json", j.dump(2) + "\n");
  std::printf("manifest: %zu files, %zu seizures -> %s/manifest.json\n",
              manifest.files.size(), manifest.seizures.size(), cfg.out_dir.c_str());
  return kExitOk;
}

int cmd_train(const CommonFlags& flags) {
  ExperimentConfig cfg = resolve_config(flags);
  const RunResult result = run_experiment(cfg);
  std::printf("ran %zu cells over %zu epochs; reports in %s\n", result.cells.size(),
              result.n_epochs_total, cfg.out_dir.c_str());
  if (!result.ica_converged) {
    std::fprintf(stderr, "warning: ICA stopped at max iterations without converging\n");
  }
  return kExitOk;
}

int cmd_evaluate(const std::string& model_path, const std::string& dataset_dir) {
  const PipelineModel pipeline = load_pipeline(read_binary_file(model_path));
  const ReportCell cell = evaluate_pipeline(pipeline, dataset_dir);
  std::printf("model=%s horizon_s=%lld\n", model_kind_name(cell.model),
              static_cast<long long>(cell.horizon_s));
  std::printf("tp=%lld fp=%lld tn=%lld fn=%lld\n",
              static_cast<long long>(cell.counts.tp),
              static_cast<long long>(cell.counts.fp),
              static_cast<long long>(cell.counts.tn),
              static_cast<long long>(cell.counts.fn));
  std::printf(
      "precision=%.6f accuracy=%.6f specificity=%.6f sensitivity=%.6f f1=%.6f "
      "mcc=%.6f\n",
      cell.metrics.precision, cell.metrics.accuracy, cell.metrics.specificity,
      cell.metrics.sensitivity, cell.metrics.f1, cell.metrics.mcc);
  return kExitOk;
}

int cmd_gradcheck(const CommonFlags& flags) {
  ExperimentConfig cfg = resolve_config(flags);

  // Small nets, 64-bit, a handful of samples.
  FeatureTensor batch;
  batch.n = 6;
  batch.channels = 3;
  batch.timesteps = 32;
  batch.values.resize(batch.n * batch.channels * batch.timesteps);
  Rng rng(derive_seed(cfg.master_seed, "gradcheck.data"));
  for (double& v : batch.values) v = rng.gaussian();
  const std::vector<int> labels = {0, 1, 0, 1, 1, 0};

  bool ok = true;
  for (const ModelKind kind :
       {ModelKind::logistic_regression, ModelKind::rnn, ModelKind::lstm, ModelKind::cnn}) {
    ModelSpec spec = cfg.spec_for(kind);
    spec.hidden_size = 4;
    spec.time_stride = 2;
    spec.cnn_blocks = {{4, 5, 2}};
    spec.seed = derive_seed(cfg.master_seed, "gradcheck", static_cast<int>(kind));
    const double err = gradient_check(spec, FeatureView(batch), labels);
    const double bound = kind == ModelKind::logistic_regression ? 1e-6 : 1e-4;
    const bool pass = err < bound;
    ok = ok && pass;
    std::printf("%-4s max relative error %.3e (bound %.0e) %s\n", model_kind_name(kind),
                err, bound, pass ? "ok" : "FAIL");
  }
  return ok ? kExitOk : kExitNumeric;
}

int cmd_report(const std::string& cells_path, const CommonFlags& flags) {
  ExperimentConfig cfg = resolve_config(flags);
  const auto cells = read_cells_csv(cells_path);
  emit_report(cells, cfg.out_dir);
  std::printf("summary.json and best.csv rebuilt from %zu cells in %s\n", cells.size(),
              cfg.out_dir.c_str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"EEG seizure prediction experiments"};
  app.require_subcommand(1);

  CommonFlags flags;
  std::string ingest_dir;
  std::string model_path;
  std::string dataset_dir;
  std::string cells_path;

  auto* synth = app.add_subcommand("synth", "generate a synthetic dataset");
  add_common_flags(synth, flags);

  auto* ingest = app.add_subcommand("ingest", "parse a dataset directory into a manifest");
  ingest->add_option("directory", ingest_dir, "dataset directory")->required();
  add_common_flags(ingest, flags);

  auto* train = app.add_subcommand("train", "run the full experiment grid");
  add_common_flags(train, flags);

  auto* evaluate = app.add_subcommand("evaluate", "score a dataset with a saved pipeline");
  evaluate->add_option("model", model_path, "pipeline model file (.ppm)")->required();
  evaluate->add_option("dataset", dataset_dir, "dataset directory")->required();

  auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference gradient audit");
  add_common_flags(gradcheck, flags);

  auto* report = app.add_subcommand("report", "rebuild summary/best from cells.csv");
  report->add_option("cells", cells_path, "cells.csv path")->required();
  add_common_flags(report, flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (synth->parsed()) return cmd_synth(flags);
    if (ingest->parsed()) return cmd_ingest(flags, ingest_dir);
    if (train->parsed()) return cmd_train(flags);
    if (evaluate->parsed()) return cmd_evaluate(model_path, dataset_dir);
    if (gradcheck->parsed()) return cmd_gradcheck(flags);
    if (report->parsed()) return cmd_report(cells_path, flags);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitData;
  }
  return kExitUsage;
}
