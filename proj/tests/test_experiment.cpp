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
#include <json.hpp>

#include <filesystem>
#include <string>

#include "preictal/error.hpp"
#include "preictal/experiment.hpp"
#include "preictal/io.hpp"
#include "test_util.hpp"

using namespace preictal;
namespace fs = std::filesystem;

namespace {

// Small but complete: 600 s, one train seizure and one test seizure, fast
// models. The grid is 3 models x 2 horizons x 3 iterations = 18 cells.
std::string tiny_config(const std::string& out_dir) {
  return
      "data.source = synth\n"
      "synth.n_files = 2\n"
      "synth.file_duration_s = 300\n"
      "synth.seizures = 0:200-230, 1:220-250\n"
      "synth.seed = 12\n"
      "models = lr,knn,lstm\n"
      "horizons_s = 0,60\n"
      "iterations = 3\n"
      "train_fraction = 0.8\n"
      "model.train_epochs = 2\n"
      "model.hidden_size = 4\n"
      "model.time_stride = 16\n"
      "model.learning_rate = 0.01\n"
      "seed = 77\n"
      "out = " + out_dir + "\n";
}

std::string temp_dir(const std::string& tag) {
  const auto dir = fs::temp_directory_path() / ("preictal_test_" + tag);
  fs::remove_all(dir);
  return dir.string();
}

}  // namespace

TEST_CASE("config parsing: defaults, overrides and errors") {
  const ExperimentConfig defaults = parse_config("");
  CHECK(defaults.models.size() == 5);
  CHECK(defaults.horizons_s ==
        std::vector<std::int64_t>{1200, 2400, 3600, 4800, 6000, 7200});
  CHECK(defaults.iterations == 10);
  CHECK(defaults.filter.num_taps == 845);
  CHECK(defaults.ica.n_components == 10);
  CHECK(defaults.base_model.hidden_size == 32);
  CHECK(defaults.base_model.knn_k == 5);
  CHECK(defaults.train_fraction == doctest::Approx(200000.0 / 230000.0));

  const ExperimentConfig cfg = parse_config(
      "models = lstm\n"
      "model.train_epochs = 4\n"
      "model.lstm.train_epochs = 9\n"
      "horizons_s = 0\n"
      "synth.seizures = 0:10-20\n");
  CHECK(cfg.spec_for(ModelKind::lstm).train_epochs == 9);
  CHECK(cfg.spec_for(ModelKind::cnn).train_epochs == 4);
  REQUIRE(cfg.synth.seizures.size() == 1);
  CHECK(cfg.synth.seizures[0].file_index == 0);
  CHECK(cfg.synth.seizures[0].start_s == 10);
  CHECK(cfg.synth.seizures[0].end_s == 20);

  CHECK(testutil::throws_errc(errc::config_error,
                              [] { parse_config("horizons_s = 7\n"); }));
  CHECK(testutil::throws_errc(errc::config_error,
                              [] { parse_config("models = \n"); }));
  CHECK(testutil::throws_errc(errc::config_error,
                              [] { parse_config("iterations = 0\n"); }));
  CHECK(testutil::throws_errc(errc::config_error,
                              [] { parse_config("nonsense line\n"); }));
}

TEST_CASE("grid produces exactly models x horizons x iterations cells") {
  const std::string out = temp_dir("grid");
  const ExperimentConfig cfg = parse_config(tiny_config(out));
  const RunResult result = run_experiment(cfg);
  CHECK(result.cells.size() == 18);  // 3 x 2 x 3

  // every cell present exactly once
  for (const ModelKind kind : cfg.models) {
    for (const std::int64_t h : cfg.horizons_s) {
      for (int i = 0; i < cfg.iterations; ++i) {
        int found = 0;
        for (const auto& c : result.cells) {
          if (c.model == kind && c.horizon_s == h && c.iteration == i) ++found;
        }
        CHECK(found == 1);
      }
    }
  }
  CHECK(fs::exists(out + "/cells.csv"));
  CHECK(fs::exists(out + "/summary.json"));
  CHECK(fs::exists(out + "/best.csv"));
  CHECK(fs::exists(out + "/attribution.csv"));
  CHECK(fs::exists(out + "/run.log"));
  CHECK(result.attribution.size() == 10);
  fs::remove_all(out);
}

TEST_CASE("stage order: filter before ICA fit before transform before training") {
  const std::string out = temp_dir("stages");
  ExperimentConfig cfg = parse_config(tiny_config(out));
  cfg.models = {ModelKind::logistic_regression};
  cfg.iterations = 1;
  cfg.cache_enabled = false;
  const RunResult result = run_experiment(cfg);

  auto first_index = [&](const std::string& prefix) {
    for (std::size_t i = 0; i < result.stage_log.size(); ++i) {
      if (result.stage_log[i].rfind(prefix, 0) == 0) return i;
    }
    return result.stage_log.size();
  };
  const std::size_t f = first_index("filter");
  const std::size_t fit = first_index("ica_fit");
  const std::size_t tr = first_index("ica_transform");
  const std::size_t train = first_index("train");
  CHECK(f < fit);
  CHECK(fit < tr);
  CHECK(tr < train);
  CHECK(train < result.stage_log.size());
  fs::remove_all(out);
}

TEST_CASE("double run is byte-identical; cached rerun matches too") {
  const std::string out_a = temp_dir("det_a");
  const std::string out_b = temp_dir("det_b");
  ExperimentConfig cfg_a = parse_config(tiny_config(out_a));
  ExperimentConfig cfg_b = parse_config(tiny_config(out_b));
  cfg_a.models = {ModelKind::logistic_regression, ModelKind::knn};
  cfg_b.models = cfg_a.models;
  cfg_a.iterations = cfg_b.iterations = 2;

  run_experiment(cfg_a);
  run_experiment(cfg_b);
  for (const char* name : {"cells.csv", "summary.json", "best.csv", "attribution.csv"}) {
    CHECK(read_text_file(out_a + "/" + name) == read_text_file(out_b + "/" + name));
  }

  // second run in the same out dir goes through the preprocessing cache
  run_experiment(cfg_a);
  CHECK(read_text_file(out_a + "/cells.csv") == read_text_file(out_b + "/cells.csv"));
  CHECK(fs::exists(out_a + "/cache"));
  fs::remove_all(out_a);
  fs::remove_all(out_b);
}

TEST_CASE("iterations=1 gives a singleton distribution in summary.json") {
  const std::string out = temp_dir("singleton");
  ExperimentConfig cfg = parse_config(tiny_config(out));
  cfg.models = {ModelKind::logistic_regression};
  cfg.horizons_s = {0};
  cfg.iterations = 1;
  run_experiment(cfg);

  const auto j = nlohmann::json::parse(read_text_file(out + "/summary.json"));
  const auto& acc = j["lr"]["0"]["accuracy"];
  CHECK(acc["min"] == acc["max"]);
  CHECK(acc["min"] == acc["median"]);
  CHECK(acc["n"] == 1);
  fs::remove_all(out);
}

TEST_CASE("emit_report: best.csv names the top model, empty cells error") {
  std::vector<ReportCell> cells;
  ReportCell a;
  a.model = ModelKind::lstm;
  a.horizon_s = 0;
  a.iteration = 0;
  a.counts = {8, 1, 9, 2};
  a.metrics = compute_metrics(a.counts);
  ReportCell b = a;
  b.model = ModelKind::knn;
  b.counts = {5, 4, 6, 5};
  b.metrics = compute_metrics(b.counts);
  cells = {a, b};

  const std::string out = temp_dir("report");
  emit_report(cells, out);
  const std::string best = read_text_file(out + "/best.csv");
  std::istringstream in(best);
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  CHECK(header.rfind("horizon_s,precision,precision_model,accuracy", 0) == 0);
  CHECK(row.find("lstm") != std::string::npos);  // lstm wins accuracy
  CHECK(row.rfind("0,", 0) == 0);

  // cells.csv round-trips through the reader
  const auto parsed = read_cells_csv(out + "/cells.csv");
  REQUIRE(parsed.size() == 2);
  CHECK(parsed[0].model == ModelKind::lstm);
  CHECK(parsed[0].counts.tp == 8);
  CHECK(parsed[0].metrics.accuracy == doctest::Approx(a.metrics.accuracy).epsilon(1e-5));

  CHECK(testutil::throws_errc(errc::length_mismatch, [&] { emit_report({}, out); }));
  fs::remove_all(out);
}

TEST_CASE("saved pipeline evaluates the dataset it was trained on") {
  const std::string out = temp_dir("pipeline");
  ExperimentConfig cfg = parse_config(tiny_config(out));
  cfg.models = {ModelKind::logistic_regression};
  cfg.horizons_s = {0};
  cfg.iterations = 1;
  cfg.save_models = true;
  const RunResult result = run_experiment(cfg);
  REQUIRE(result.cells.size() == 1);

  const std::string model_path = out + "/models/lr_h0.ppm";
  REQUIRE(fs::exists(model_path));
  const PipelineModel pipeline = load_pipeline(read_binary_file(model_path));
  CHECK(pipeline.core.spec.kind == ModelKind::logistic_regression);
  CHECK(pipeline.horizon_s == 0);
  CHECK(pipeline.ica.n_components() == 10);

  const ReportCell cell = evaluate_pipeline(pipeline, out + "/dataset");
  // evaluation covers every epoch (no trim, no split): 600 s -> 120 epochs
  CHECK(cell.counts.total() == 120);
  CHECK(cell.metrics.accuracy > 0.5);

  // corrupting the file must be caught by the checksum
  auto bytes = read_binary_file(model_path);
  bytes[bytes.size() / 2] ^= 1;
  CHECK(testutil::throws_errc(errc::corrupt_model, [&] { load_pipeline(bytes); }));
  fs::remove_all(out);
}

TEST_CASE("checkpoint iterations mode: later iterations are checkpoints") {
  const std::string out = temp_dir("ckpt");
  ExperimentConfig cfg = parse_config(tiny_config(out));
  cfg.models = {ModelKind::logistic_regression};
  cfg.horizons_s = {0};
  cfg.iterations = 3;
  cfg.iterations_mode = ExperimentConfig::IterationsMode::checkpoint;
  const RunResult result = run_experiment(cfg);
  CHECK(result.cells.size() == 3);
  // all three evaluated; iteration index is the checkpoint (epoch count - 1)
  for (int i = 0; i < 3; ++i) {
    CHECK(result.cells[static_cast<std::size_t>(i)].iteration == i);
    CHECK(result.cells[static_cast<std::size_t>(i)].counts.total() > 0);
  }
  fs::remove_all(out);
}

TEST_CASE("failure manifest lands next to partial results") {
  const std::string out = temp_dir("failure");
  ExperimentConfig cfg = parse_config(tiny_config(out));
  // horizon far beyond the data: everything is trimmed away
  cfg.horizons_s = {0, 864000};
  bool threw = false;
  try {
    run_experiment(cfg);
  } catch (const Error& e) {
    threw = true;
    CHECK(e.code() == errc::degenerate_split);
  }
  CHECK(threw);
  CHECK(fs::exists(out + "/failure.txt"));
  fs::remove_all(out);
}

TEST_CASE("cell seeds are distinct across the grid and stable") {
  const auto s1 = cell_seed(42, ModelKind::lstm, 1200, 3);
  const auto s2 = cell_seed(42, ModelKind::lstm, 1200, 4);
  const auto s3 = cell_seed(42, ModelKind::rnn, 1200, 3);
  const auto s4 = cell_seed(42, ModelKind::lstm, 2400, 3);
  const auto s5 = cell_seed(43, ModelKind::lstm, 1200, 3);
  CHECK(s1 != s2);
  CHECK(s1 != s3);
  CHECK(s1 != s4);
  CHECK(s1 != s5);
  CHECK(s1 == cell_seed(42, ModelKind::lstm, 1200, 3));
}
