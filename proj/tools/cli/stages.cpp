#include "stages.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <fstream>
#include <ostream>
#include <sstream>

#include "cartcredit/cart.hpp"
#include "cartcredit/csv.hpp"
#include "cartcredit/dataset.hpp"
#include "cartcredit/error.hpp"
#include "cartcredit/eval.hpp"
#include "cartcredit/screening.hpp"
#include "cartcredit/synth.hpp"

namespace cartcredit::cli {
namespace {

using dataset::Dataset;

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidConfig:
    case ErrorKind::MissingFile:
      return 2;
    case ErrorKind::Singular:
      return 4;
    default:
      return 3;
  }
}

template <typename Body>
StageReport guarded(const std::string& name, std::ostream& err, Body&& body) {
  StageReport report;
  report.name = name;
  const auto start = std::chrono::steady_clock::now();
  try {
    body(report);
  } catch (const Error& e) {
    report.exit_code = exit_code_for(e.kind());
    err << name << ": " << e.what() << '\n';
  } catch (const std::exception& e) {
    report.exit_code = 3;
    err << name << ": " << e.what() << '\n';
  }
  report.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

void require_file(const fs::path& path, const std::string& what) {
  if (path.empty()) throw Error(ErrorKind::InvalidConfig, what + " path not set");
  if (!fs::exists(path)) throw Error(ErrorKind::MissingFile, what + " not found: " + path.string());
}

void write_text(const fs::path& path, const std::string& text, StageReport& report) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::InvalidConfig, "cannot write " + path.string());
  out << text;
  report.artifacts.push_back(path);
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::MissingFile, "cannot read " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void ensure_out_dir(const PipelineConfig& config) {
  std::error_code ec;
  fs::create_directories(config.out, ec);
  if (ec) throw Error(ErrorKind::InvalidConfig, "cannot create " + config.out.string());
}

dataset::OutlierRule outlier_rule(const PipelineConfig& config) {
  dataset::OutlierRule rule;
  rule.iqr_multiplier = config.iqr_multiplier;
  rule.z_threshold = config.z_threshold;
  if (config.outlier_rule == "iqr") {
    rule.method = dataset::OutlierRule::Method::Iqr;
  } else if (config.outlier_rule == "zscore") {
    rule.method = dataset::OutlierRule::Method::ZScore;
  } else if (config.outlier_rule == "off") {
    rule.method = dataset::OutlierRule::Method::Off;
  } else {
    throw Error(ErrorKind::InvalidConfig, "outlier rule must be iqr, zscore or off");
  }
  return rule;
}

cart::CartConfig cart_config(const PipelineConfig& config) {
  cart::CartConfig c;
  c.min_node_size = config.min_node_size;
  c.allow_large_min_node_size = config.allow_large_min_node_size;
  c.max_depth = config.max_depth;
  c.min_gini_decrease = config.min_gini_decrease;
  if (config.mode == "classification") {
    c.mode = cart::Mode::Classification;
  } else if (config.mode == "regression") {
    c.mode = cart::Mode::Regression;
  } else {
    throw Error(ErrorKind::InvalidConfig, "mode must be classification or regression");
  }
  c.validate();
  return c;
}

void validate_holdout(const PipelineConfig& config) {
  if (config.holdout && !(*config.holdout > 0.0 && *config.holdout < 1.0)) {
    throw Error(ErrorKind::InvalidConfig, "--holdout must lie in (0, 1)");
  }
}

// Rows used for fitting (screen, train) and for assessment (eval).
Dataset fitting_rows(const Dataset& data, const PipelineConfig& config) {
  if (!config.holdout) return data;
  return dataset::holdout_split(data, *config.holdout, config.seed).first;
}

Dataset assessment_rows(const Dataset& data, const PipelineConfig& config) {
  if (!config.holdout) return data;
  return dataset::holdout_split(data, *config.holdout, config.seed).second;
}

Dataset load_stage_data(const PipelineConfig& config) {
  require_file(config.data_path(), "encoded data");
  require_file(config.schema_path(), "schema");
  return dataset::load_encoded(config.data_path(), dataset::read_schema(config.schema_path()),
                               config.target);
}

// Header columns minus the target; categorical iff the codebook knows them.
dataset::Schema infer_schema(const fs::path& input, const std::string& target,
                             const dataset::CodeBook* book) {
  const csv::Table table = csv::read_file(input);
  dataset::Schema schema;
  for (const auto& name : table.header) {
    if (name == target) continue;
    dataset::FeatureSpec spec{name, dataset::FeatureKind::numeric(), schema.size()};
    if (book && book->has_feature(name)) {
      spec.kind = dataset::FeatureKind::categorical(static_cast<int>(book->modality_count(name)));
    }
    schema.push_back(std::move(spec));
  }
  return schema;
}

}  // namespace

nlohmann::ordered_json to_json(const PipelineConfig& c) {
  nlohmann::ordered_json j;
  j["input"] = c.input.string();
  j["codebook"] = c.codebook.string();
  j["schema"] = c.schema.string();
  j["target"] = c.target;
  j["skip-codebook"] = c.skip_codebook;
  j["missing-tokens"] = c.missing_tokens;
  j["outlier-rule"] = c.outlier_rule;
  j["iqr-multiplier"] = c.iqr_multiplier;
  j["z-threshold"] = c.z_threshold;
  j["alpha"] = c.alpha;
  j["r-threshold"] = c.r_threshold;
  j["max-iter"] = c.max_iter;
  j["tol"] = c.tol;
  j["separation-bound"] = c.separation_bound;
  j["per-variable"] = c.per_variable;
  j["min-node-size"] = c.min_node_size;
  j["allow-large-min-node-size"] = c.allow_large_min_node_size;
  j["max-depth"] = c.max_depth;
  j["min-gini-decrease"] = c.min_gini_decrease;
  j["mode"] = c.mode;
  j["all-features"] = c.all_features;
  j["score-mode"] = c.score_mode;
  j["holdout"] = c.holdout ? nlohmann::ordered_json(*c.holdout) : nlohmann::ordered_json(nullptr);
  j["seed"] = c.seed;
  j["out"] = c.out.string();
  return j;
}

StageReport run_encode(const PipelineConfig& config, std::ostream& err) {
  return guarded("encode", err, [&](StageReport& report) {
    require_file(config.input, "input");
    std::optional<dataset::CodeBook> book;
    if (!config.codebook.empty()) {
      require_file(config.codebook, "codebook");
      book = dataset::CodeBook::read(config.codebook);
    } else if (!config.skip_codebook) {
      throw Error(ErrorKind::InvalidConfig, "--codebook is required unless --skip-codebook is given");
    }
    const dataset::OutlierRule rule = outlier_rule(config);
    ensure_out_dir(config);

    dataset::Schema schema;
    if (!config.schema.empty() && config.schema != config.out / "schema.csv") {
      require_file(config.schema, "schema");
      schema = dataset::read_schema(config.schema);
    } else {
      schema = infer_schema(config.input, config.target, book ? &*book : nullptr);
    }

    dataset::LoadOptions options;
    options.missing_tokens = config.missing_tokens;
    const dataset::RawDataset raw = dataset::load_csv(config.input, schema, config.target, options);
    const Dataset encoded = config.skip_codebook ? dataset::apply_identity_coding(raw)
                                                 : dataset::apply_codebook(raw, *book);
    const dataset::CleanResult cleaned = dataset::clean(encoded, rule);

    write_text(config.out / "encoded.csv", dataset::to_csv(cleaned.data), report);
    dataset::write_schema(schema, config.out / "schema.csv");
    report.artifacts.push_back(config.out / "schema.csv");
    write_text(config.out / "cleaning.log", dataset::format_cleaning_log(cleaned.log), report);
  });
}

StageReport run_screen(const PipelineConfig& config, std::ostream& err) {
  return guarded("screen", err, [&](StageReport& report) {
    validate_holdout(config);
    if (!(config.alpha > 0.0 && config.alpha < 1.0)) {
      throw Error(ErrorKind::InvalidConfig, "--alpha must lie in (0, 1)");
    }
    if (!(config.r_threshold > 0.0 && config.r_threshold < 1.0)) {
      throw Error(ErrorKind::InvalidConfig, "--r-threshold must lie in (0, 1)");
    }
    if (config.max_iter < 1 || !(config.tol > 0.0)) {
      throw Error(ErrorKind::InvalidConfig, "--max-iter must be >= 1 and --tol > 0");
    }
    const Dataset data = fitting_rows(load_stage_data(config), config);
    ensure_out_dir(config);

    std::vector<std::string> candidates;
    for (const auto& spec : data.schema()) candidates.push_back(spec.name);

    screening::LogisticOptions fit_options;
    fit_options.max_iter = config.max_iter;
    fit_options.tol = config.tol;
    fit_options.separation_bound = config.separation_bound;

    std::vector<screening::WaldRow> wald;
    nlohmann::ordered_json fit_info;
    if (config.per_variable) {
      wald = screening::per_variable_wald(data, candidates, fit_options);
      fit_info["mode"] = "per-variable";
    } else {
      const screening::LogisticFit fit = screening::fit_logistic(data, candidates, fit_options);
      if (fit.separation) err << "screen: warning: quasi-separation detected (|B| > bound)\n";
      if (!fit.converged) err << "screen: warning: logistic fit did not converge\n";
      wald = screening::wald_table(fit);
      fit_info["mode"] = "joint";
      fit_info["iterations"] = fit.iterations;
      fit_info["converged"] = fit.converged;
      fit_info["separation"] = fit.separation;
      fit_info["log_likelihood"] = fit.log_likelihood;
    }
    const auto significant = screening::significant_variables(wald, config.alpha);
    const screening::CorrelationMatrix corr = screening::pearson_matrix(data, significant);
    const screening::ScreeningOutcome outcome =
        screening::screen(wald, corr, {config.alpha, config.r_threshold});

    write_text(config.out / "wald.csv", screening::format_wald_csv(wald), report);
    write_text(config.out / "correlation.csv", screening::format_correlation_csv(corr), report);
    auto doc = nlohmann::ordered_json::parse(screening::format_outcome_json(outcome));
    doc["fit"] = fit_info;
    doc["alpha"] = config.alpha;
    doc["r_threshold"] = config.r_threshold;
    write_text(config.out / "screening.json", doc.dump(2) + "\n", report);
  });
}

StageReport run_train(const PipelineConfig& config, std::ostream& err) {
  return guarded("train", err, [&](StageReport& report) {
    validate_holdout(config);
    const cart::CartConfig cc = cart_config(config);
    std::vector<std::string> features;
    if (!config.all_features) {
      require_file(config.screening_path(), "screening result (run `screen` or pass --all-features)");
      const auto doc = nlohmann::json::parse(read_text(config.screening_path()), nullptr, false);
      if (doc.is_discarded() || !doc.contains("kept") || !doc["kept"].is_array()) {
        throw Error(ErrorKind::MalformedDocument, config.screening_path().string() + " has no kept list");
      }
      features = doc["kept"].get<std::vector<std::string>>();
      if (features.empty()) throw Error(ErrorKind::SchemaMismatch, "screening kept no variables");
    }
    const Dataset data = fitting_rows(load_stage_data(config), config);
    ensure_out_dir(config);
    const cart::CartTree tree = cart::grow(data, features, cc);
    write_text(config.model_path(), cart::serialize(tree), report);
    write_text(config.out / "tree.dot", cart::export_dot(tree), report);
    write_text(config.out / "tree.txt", cart::export_text(tree), report);
  });
}

StageReport run_eval(const PipelineConfig& config, std::ostream& err) {
  return guarded("eval", err, [&](StageReport& report) {
    validate_holdout(config);
    if (config.score_mode != "leaf" && config.score_mode != "hard") {
      throw Error(ErrorKind::InvalidConfig, "--score-mode must be leaf or hard");
    }
    require_file(config.model_path(), "model");
    const cart::CartTree tree = cart::deserialize(read_text(config.model_path()));
    if (tree.config().mode != cart::Mode::Classification) {
      throw Error(ErrorKind::SchemaMismatch, "eval needs a classification model");
    }
    const Dataset data = assessment_rows(load_stage_data(config), config);
    if (!data.binary_target()) throw Error(ErrorKind::DomainError, "target must be 0/1");
    ensure_out_dir(config);

    const auto predictions = tree.predict_all(data);
    std::vector<eval::LabelPair> labels;
    std::vector<eval::ScoredLabel> scores;
    for (std::size_t r = 0; r < data.size(); ++r) {
      const int actual = static_cast<int>(data.target()[r]);
      const auto& p = predictions[r];
      if (p.unseen_category) err << "eval: warning: row " << r << " has a category unseen in training\n";
      labels.push_back({actual, p.predicted_class});
      scores.push_back({actual, config.score_mode == "leaf" ? p.score : static_cast<double>(p.predicted_class)});
    }
    const eval::EvaluationReport result = eval::evaluate(labels, scores, config.score_mode);
    write_text(config.out / "evaluation.json", eval::report_document(result), report);
    write_text(config.out / "evaluation.txt", eval::report_table(result), report);
    write_text(config.out / "roc.tsv", result.roc ? eval::roc_tsv(*result.roc) : std::string(), report);
  });
}

StageReport run_predict(const PipelineConfig& config, const fs::path& input, std::ostream& err) {
  return guarded("predict", err, [&](StageReport& report) {
    require_file(config.model_path(), "model");
    require_file(input, "input");
    const cart::CartTree tree = cart::deserialize(read_text(config.model_path()));
    const csv::Table table = csv::read_file(input);

    dataset::Schema schema = tree.features();
    std::vector<std::string> header = table.header;
    if (header.empty()) {
      for (const auto& spec : schema) header.push_back(spec.name);
    }
    // Project the model's features out of whatever columns the file has.
    std::vector<std::size_t> position;
    for (const auto& spec : schema) {
      auto it = std::find(header.begin(), header.end(), spec.name);
      if (it == header.end()) {
        throw Error(ErrorKind::SchemaMismatch, "input lacks model feature " + spec.name);
      }
      position.push_back(static_cast<std::size_t>(it - header.begin()));
    }

    std::ostringstream out;
    std::vector<std::string> out_header = header;
    out_header.push_back("predicted_class");
    out_header.push_back("score");
    csv::write_row(out, out_header);
    std::vector<double> values(schema.size());
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      const auto& fields = table.rows[r];
      if (fields.size() != header.size()) {
        throw Error(ErrorKind::RaggedRow, "row " + std::to_string(r) + " (line " +
                                              std::to_string(table.lines[r]) + ")");
      }
      for (std::size_t k = 0; k < schema.size(); ++k) {
        const std::string& text = fields[position[k]];
        double v = 0.0;
        auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
        if (text.empty() || ec != std::errc() || end != text.data() + text.size()) {
          throw Error(ErrorKind::DomainError, "row " + std::to_string(r) + ": feature " +
                                                  schema[k].name + " value '" + text +
                                                  "' is not an encoded number");
        }
        values[k] = v;
      }
      const cart::Prediction p = tree.predict(values);
      if (p.unseen_category) {
        err << "predict: warning: row " << r
            << " has a category code unseen in training; routed to the False branch\n";
      }
      std::vector<std::string> row = fields;
      row.push_back(std::to_string(p.predicted_class));
      row.push_back(csv::format_double(p.score));
      csv::write_row(out, row);
    }
    const fs::path target = config.predict_output.empty() ? config.out / "predictions.csv"
                                                          : config.predict_output;
    if (config.predict_output.empty()) ensure_out_dir(config);
    write_text(target, out.str(), report);
  });
}

StageReport run_synth(const PipelineConfig& config, std::ostream& err) {
  return guarded("synth", err, [&](StageReport& report) {
    synth::SynthShape shape;
    shape.rows = config.rows;
    shape.numeric = config.numeric;
    shape.categorical = config.categorical;
    shape.modalities = config.modalities;
    shape.rule_depth = config.rule_depth;
    shape.numeric_levels = config.numeric_levels;
    shape.noise = config.noise;
    shape.missing_rate = config.missing_rate;
    shape.seed = config.seed;
    synth::SynthSpec spec = synth::make_spec(shape);
    spec.target_name = config.target;
    const synth::SynthData data = synth::generate(spec);
    ensure_out_dir(config);
    write_text(config.out / "data.csv", synth::to_labeled_csv(data), report);
    write_text(config.out / "codebook.csv", data.codebook.to_text(), report);
    write_text(config.out / "rule.txt", spec.rule.to_text(spec.schema), report);
  });
}

int run_pipeline(const PipelineConfig& config, std::ostream& err) {
  using StageFn = StageReport (*)(const PipelineConfig&, std::ostream&);
  const std::vector<std::pair<std::string, StageFn>> stages{
      {"encode", run_encode}, {"screen", run_screen}, {"train", run_train}, {"eval", run_eval}};

  nlohmann::ordered_json manifest;
  manifest["format"] = "cartcredit-manifest/1";
  manifest["stages"] = nlohmann::ordered_json::array();
  int exit_code = 0;
  for (const auto& [name, fn] : stages) {
    nlohmann::ordered_json entry;
    entry["name"] = name;
    if (exit_code != 0) {
      entry["status"] = "skipped";
      entry["exit_code"] = nullptr;
      entry["artifacts"] = nlohmann::ordered_json::array();
      entry["seconds"] = nullptr;
    } else {
      const StageReport report = fn(config, err);
      exit_code = report.exit_code;
      entry["status"] = report.exit_code == 0 ? "completed" : "failed";
      entry["exit_code"] = report.exit_code;
      entry["artifacts"] = nlohmann::ordered_json::array();
      for (const auto& path : report.artifacts) entry["artifacts"].push_back(path.string());
      entry["seconds"] = report.seconds;
    }
    manifest["stages"].push_back(std::move(entry));
  }
  manifest["config"] = to_json(config);

  std::error_code ec;
  fs::create_directories(config.out, ec);
  std::ofstream out(config.out / "manifest.json", std::ios::binary);
  if (out) {
    out << manifest.dump(2) << '\n';
  } else {
    err << "pipeline: cannot write manifest in " << config.out.string() << '\n';
    if (exit_code == 0) exit_code = 2;
  }
  return exit_code;
}

}  // namespace cartcredit::cli
