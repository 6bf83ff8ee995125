#include <fstream>
#include <iostream>
#include <string>
#include <string_view>
#include <vector>

#include "CLI11.hpp"
#include "cartcredit/error.hpp"
#include "json.hpp"
#include "stages.hpp"

using cartcredit::Error;
using cartcredit::ErrorKind;
using cartcredit::cli::PipelineConfig;

namespace {

template <typename T>
void take(const nlohmann::json& obj, const char* key, T& field) {
  if (obj.contains(key)) field = obj.at(key).get<T>();
}

void take_path(const nlohmann::json& obj, const char* key, cartcredit::cli::fs::path& field) {
  if (obj.contains(key)) field = obj.at(key).get<std::string>();
}

// Keys mirror the long option names. Unknown keys are ignored.
void apply_json(PipelineConfig& c, const nlohmann::json& obj) {
  take_path(obj, "input", c.input);
  take_path(obj, "codebook", c.codebook);
  take_path(obj, "schema", c.schema);
  take(obj, "target", c.target);
  take(obj, "skip-codebook", c.skip_codebook);
  take(obj, "missing-tokens", c.missing_tokens);
  take(obj, "outlier-rule", c.outlier_rule);
  take(obj, "iqr-multiplier", c.iqr_multiplier);
  take(obj, "z-threshold", c.z_threshold);
  take(obj, "alpha", c.alpha);
  take(obj, "r-threshold", c.r_threshold);
  take(obj, "max-iter", c.max_iter);
  take(obj, "tol", c.tol);
  take(obj, "separation-bound", c.separation_bound);
  take(obj, "per-variable", c.per_variable);
  take(obj, "min-node-size", c.min_node_size);
  take(obj, "allow-large-min-node-size", c.allow_large_min_node_size);
  take(obj, "max-depth", c.max_depth);
  take(obj, "min-gini-decrease", c.min_gini_decrease);
  take(obj, "mode", c.mode);
  take(obj, "all-features", c.all_features);
  take(obj, "score-mode", c.score_mode);
  if (obj.contains("holdout")) {
    if (obj.at("holdout").is_null()) {
      c.holdout.reset();
    } else {
      c.holdout = obj.at("holdout").get<double>();
    }
  }
  take(obj, "seed", c.seed);
  take_path(obj, "data", c.data);
  take_path(obj, "model", c.model);
  take_path(obj, "screening", c.screening);
  take_path(obj, "output", c.predict_output);
  take(obj, "rows", c.rows);
  take(obj, "numeric", c.numeric);
  take(obj, "categorical", c.categorical);
  take(obj, "modalities", c.modalities);
  take(obj, "rule-depth", c.rule_depth);
  take(obj, "numeric-levels", c.numeric_levels);
  take(obj, "noise", c.noise);
  take(obj, "missing-rate", c.missing_rate);
  take_path(obj, "out", c.out);
}

// The config file is read before option parsing so that explicit options
// simply overwrite whatever it set.
void preload_config(PipelineConfig& c, int argc, char** argv) {
  std::string path;
  std::string subcommand;
  for (int i = 1; i < argc; ++i) {
    std::string_view arg = argv[i];
    if (subcommand.empty() && !arg.empty() && arg[0] != '-') subcommand = arg;
    if (arg == "--config" && i + 1 < argc) {
      path = argv[i + 1];
    } else if (arg.starts_with("--config=")) {
      path = arg.substr(9);
    }
  }
  if (path.empty()) return;
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::MissingFile, "config file not found: " + path);
  const nlohmann::json doc = nlohmann::json::parse(in, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    throw Error(ErrorKind::InvalidConfig, "config file is not a JSON object: " + path);
  }
  try {
    apply_json(c, doc);
    if (!subcommand.empty() && doc.contains(subcommand) && doc.at(subcommand).is_object()) {
      apply_json(c, doc.at(subcommand));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::InvalidConfig, std::string("config file: ") + e.what());
  }
}

void add_common(CLI::App* sub, PipelineConfig& c, std::string& config_path) {
  sub->add_option("--config", config_path, "JSON config file");
  sub->add_option("--out", c.out, "Output directory");
  sub->add_option("--seed", c.seed, "Random seed");
  sub->add_option("--target", c.target, "Target column name");
}

void add_data_inputs(CLI::App* sub, PipelineConfig& c) {
  sub->add_option("--data", c.data, "Encoded data (default <out>/encoded.csv)");
  sub->add_option("--schema", c.schema, "Schema file (default <out>/schema.csv)");
  sub->add_option("--holdout", c.holdout, "Fraction of rows held out for evaluation");
}

void add_encode(CLI::App* sub, PipelineConfig& c) {
  sub->add_option("--input", c.input, "Raw CSV");
  sub->add_option("--codebook", c.codebook, "Codebook CSV (feature,label,code)");
  sub->add_option("--schema", c.schema, "Schema CSV (inferred when absent)");
  sub->add_flag("--skip-codebook", c.skip_codebook, "Input is already encoded");
  sub->add_option("--missing-tokens", c.missing_tokens, "Cell values read as missing");
  sub->add_option("--outlier-rule", c.outlier_rule, "iqr | zscore | off");
  sub->add_option("--iqr-multiplier", c.iqr_multiplier, "IQR fence multiplier");
  sub->add_option("--z-threshold", c.z_threshold, "Z-score cutoff");
}

void add_screen_options(CLI::App* sub, PipelineConfig& c) {
  sub->add_option("--alpha", c.alpha, "Significance level");
  sub->add_option("--r-threshold", c.r_threshold, "Correlation cutoff");
  sub->add_option("--max-iter", c.max_iter, "IRLS iteration cap");
  sub->add_option("--tol", c.tol, "IRLS tolerance");
  sub->add_option("--separation-bound", c.separation_bound, "|B| bound flagging separation");
  sub->add_flag("--per-variable", c.per_variable, "One univariate fit per variable");
}

void add_screen(CLI::App* sub, PipelineConfig& c) {
  add_data_inputs(sub, c);
  add_screen_options(sub, c);
}

void add_train(CLI::App* sub, PipelineConfig& c) {
  add_data_inputs(sub, c);
  sub->add_option("--screening", c.screening, "Screening result (default <out>/screening.json)");
  sub->add_option("--model", c.model, "Model output (default <out>/model.cart)");
  sub->add_option("--min-node-size", c.min_node_size, "Smallest node that may be split");
  sub->add_flag("--allow-large-min-node-size", c.allow_large_min_node_size,
                "Permit a minimum node size above 5");
  sub->add_option("--max-depth", c.max_depth, "Depth limit");
  sub->add_option("--min-gini-decrease", c.min_gini_decrease, "Smallest accepted decrease");
  sub->add_option("--mode", c.mode, "classification | regression");
  sub->add_flag("--all-features", c.all_features, "Ignore screening, use every feature");
}

void add_eval(CLI::App* sub, PipelineConfig& c) {
  add_data_inputs(sub, c);
  sub->add_option("--model", c.model, "Model (default <out>/model.cart)");
  sub->add_option("--score-mode", c.score_mode, "leaf | hard");
}

void add_synth(CLI::App* sub, PipelineConfig& c) {
  sub->add_option("--rows", c.rows, "Row count");
  sub->add_option("--numeric", c.numeric, "Numeric feature count");
  sub->add_option("--categorical", c.categorical, "Categorical feature count");
  sub->add_option("--modalities", c.modalities, "Levels per categorical feature");
  sub->add_option("--rule-depth", c.rule_depth, "Depth of the planted rule (1-3)");
  sub->add_option("--numeric-levels", c.numeric_levels, "Grid levels for numeric values (0 = continuous)");
  sub->add_option("--noise", c.noise, "Label flip probability");
  sub->add_option("--missing-rate", c.missing_rate, "Probability a cell is blank");
}

int exit_code_for(ErrorKind kind) {
  if (kind == ErrorKind::InvalidConfig || kind == ErrorKind::MissingFile) return 2;
  if (kind == ErrorKind::Singular) return 4;
  return 3;
}

}  // namespace

int main(int argc, char** argv) {
  PipelineConfig config;
  try {
    preload_config(config, argc, argv);
  } catch (const Error& e) {
    std::cerr << "cartcredit: " << e.what() << '\n';
    return exit_code_for(e.kind());
  }

  CLI::App app{"CART credit-solvency workflow"};
  app.require_subcommand(1);
  std::string config_path;
  std::filesystem::path predict_input;

  auto* encode = app.add_subcommand("encode", "Decode labels, drop missing rows and outliers");
  add_common(encode, config, config_path);
  add_encode(encode, config);

  auto* screen = app.add_subcommand("screen", "Wald and correlation screening");
  add_common(screen, config, config_path);
  add_screen(screen, config);

  auto* train = app.add_subcommand("train", "Grow the tree");
  add_common(train, config, config_path);
  add_train(train, config);

  auto* eval = app.add_subcommand("eval", "Confusion matrix, error rates and ROC");
  add_common(eval, config, config_path);
  add_eval(eval, config);

  auto* predict = app.add_subcommand("predict", "Score new encoded rows");
  add_common(predict, config, config_path);
  predict->add_option("--input", predict_input, "Encoded rows to score");
  predict->add_option("--model", config.model, "Model (default <out>/model.cart)");
  predict->add_option("--output", config.predict_output, "Output CSV (default <out>/predictions.csv)");

  auto* synth = app.add_subcommand("synth", "Generate labelled data from a planted rule");
  add_common(synth, config, config_path);
  add_synth(synth, config);

  auto* pipeline = app.add_subcommand("pipeline", "encode, screen, train and eval in one run");
  add_common(pipeline, config, config_path);
  add_encode(pipeline, config);
  add_screen_options(pipeline, config);
  pipeline->add_option("--holdout", config.holdout, "Fraction of rows held out for evaluation");
  pipeline->add_option("--screening", config.screening, "Screening result path");
  pipeline->add_option("--model", config.model, "Model path");
  pipeline->add_option("--min-node-size", config.min_node_size, "Smallest node that may be split");
  pipeline->add_flag("--allow-large-min-node-size", config.allow_large_min_node_size,
                     "Permit a minimum node size above 5");
  pipeline->add_option("--max-depth", config.max_depth, "Depth limit");
  pipeline->add_option("--min-gini-decrease", config.min_gini_decrease, "Smallest accepted decrease");
  pipeline->add_option("--mode", config.mode, "classification | regression");
  pipeline->add_flag("--all-features", config.all_features, "Ignore screening, use every feature");
  pipeline->add_option("--score-mode", config.score_mode, "leaf | hard");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  using namespace cartcredit::cli;
  auto finish = [](const StageReport& report) {
    for (const auto& path : report.artifacts) std::cout << path.string() << '\n';
    return report.exit_code;
  };
  if (encode->parsed()) return finish(run_encode(config, std::cerr));
  if (screen->parsed()) return finish(run_screen(config, std::cerr));
  if (train->parsed()) return finish(run_train(config, std::cerr));
  if (eval->parsed()) return finish(run_eval(config, std::cerr));
  if (predict->parsed()) return finish(run_predict(config, predict_input, std::cerr));
  if (synth->parsed()) return finish(run_synth(config, std::cerr));
  if (pipeline->parsed()) return run_pipeline(config, std::cerr);
  return 2;
}
