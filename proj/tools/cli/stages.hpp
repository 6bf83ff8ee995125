#pragma once

// Pipeline stages behind the `cartcredit` command line. Each stage reads its
// inputs, writes its artifacts into the output directory and returns an exit
// code: 0 success, 2 configuration/usage, 3 data/schema, 4 numerical failure.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace cartcredit::cli {

namespace fs = std::filesystem;

struct PipelineConfig {
  // encode
  fs::path input;
  fs::path codebook;
  fs::path schema;  // optional; inferred from the codebook otherwise
  std::string target = "TARGET";
  bool skip_codebook = false;
  std::vector<std::string> missing_tokens{"NA", "N/A"};
  std::string outlier_rule = "iqr";  // iqr | zscore | off
  double iqr_multiplier = 1.5;
  double z_threshold = 3.0;

  // screen
  double alpha = 0.05;
  double r_threshold = 0.8;
  int max_iter = 50;
  double tol = 1e-8;
  double separation_bound = 15.0;
  bool per_variable = false;

  // train
  int min_node_size = 5;
  bool allow_large_min_node_size = false;
  int max_depth = 10;
  double min_gini_decrease = 0.0;
  std::string mode = "classification";
  bool all_features = false;

  // eval
  std::string score_mode = "leaf";  // leaf | hard

  // holdout split (train on the rest, evaluate on the held-out rows)
  std::optional<double> holdout;
  std::uint64_t seed = 0;

  // stage input overrides; empty means "<out>/<default name>"
  fs::path data;
  fs::path model;
  fs::path screening;

  // predict
  fs::path predict_output;

  // synth
  std::size_t rows = 1000;
  int numeric = 3;
  int categorical = 0;
  int modalities = 3;
  int rule_depth = 2;
  std::size_t numeric_levels = 0;  // 0 = continuous
  double noise = 0.0;
  double missing_rate = 0.0;

  fs::path out = ".";

  fs::path data_path() const { return data.empty() ? out / "encoded.csv" : data; }
  fs::path schema_path() const { return schema.empty() ? out / "schema.csv" : schema; }
  fs::path model_path() const { return model.empty() ? out / "model.cart" : model; }
  fs::path screening_path() const { return screening.empty() ? out / "screening.json" : screening; }
};

// Effective configuration as JSON (echoed into the manifest).
nlohmann::ordered_json to_json(const PipelineConfig& config);

struct StageReport {
  std::string name;
  int exit_code = 0;
  std::vector<fs::path> artifacts;
  double seconds = 0.0;
};

StageReport run_encode(const PipelineConfig& config, std::ostream& err);
StageReport run_screen(const PipelineConfig& config, std::ostream& err);
StageReport run_train(const PipelineConfig& config, std::ostream& err);
StageReport run_eval(const PipelineConfig& config, std::ostream& err);
StageReport run_predict(const PipelineConfig& config, const fs::path& input, std::ostream& err);
StageReport run_synth(const PipelineConfig& config, std::ostream& err);

// encode -> screen -> train -> eval; stops at the first failure and writes
// <out>/manifest.json. Returns the failing stage's exit code (0 otherwise).
int run_pipeline(const PipelineConfig& config, std::ostream& err);

}  // namespace cartcredit::cli
