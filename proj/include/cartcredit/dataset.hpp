#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "cartcredit/csv.hpp"

namespace cartcredit::dataset {

class FeatureKind {
 public:
  static FeatureKind numeric() { return FeatureKind(0); }
  // Throws Error{InvalidConfig} when modalities < 2.
  static FeatureKind categorical(int modalities);

  bool is_numeric() const { return modalities_ == 0; }
  bool is_categorical() const { return modalities_ != 0; }
  int modalities() const { return modalities_; }

  friend bool operator==(const FeatureKind&, const FeatureKind&) = default;

 private:
  explicit FeatureKind(int modalities) : modalities_(modalities) {}
  int modalities_;
};

struct FeatureSpec {
  std::string name;
  FeatureKind kind = FeatureKind::numeric();
  std::size_t index = 0;

  friend bool operator==(const FeatureSpec&, const FeatureSpec&) = default;
};

using Schema = std::vector<FeatureSpec>;

// Unique names, contiguous indices from 0.
void validate_schema(const Schema& schema);
std::optional<std::size_t> find_feature(const Schema& schema, std::string_view name);

// Schema files are CSV with header `name,kind,modalities`; kind is
// `numeric` or `categorical`.
Schema read_schema(const std::filesystem::path& path);
void write_schema(const Schema& schema, const std::filesystem::path& path);

struct RawDataset;

// Nominal label <-> integer code, per categorical feature.
class CodeBook {
 public:
  // Throws Error{InvalidConfig} on a duplicate label or a code already used
  // by another label of the same feature.
  void add(const std::string& feature, const std::string& label, std::int64_t code);

  bool has_feature(std::string_view feature) const;
  std::optional<std::int64_t> encode(std::string_view feature, std::string_view label) const;
  std::optional<std::string> decode(std::string_view feature, std::int64_t code) const;
  std::vector<std::string> features() const;
  // Label order is insertion order.
  const std::vector<std::pair<std::string, std::int64_t>>& entries(std::string_view feature) const;
  std::size_t modality_count(std::string_view feature) const;

  // The bank-credit coding: seven nominal variables.
  static CodeBook credit_reference();

  // Codes by first appearance for every categorical feature of `raw`:
  // two-label features get 0, 1; others get 1, 2, ...
  static CodeBook infer(const RawDataset& raw);

  // CSV with header `feature,label,code`.
  static CodeBook read(const std::filesystem::path& path);
  void write(const std::filesystem::path& path) const;
  std::string to_text() const;

 private:
  struct FeatureCodes {
    std::vector<std::pair<std::string, std::int64_t>> entries;
    std::map<std::string, std::int64_t, std::less<>> by_label;
    std::map<std::int64_t, std::string> by_code;
  };
  std::vector<std::string> order_;
  std::map<std::string, FeatureCodes, std::less<>> codes_;
};

// Cell of a freshly loaded file: missing, a parsed number (numeric columns
// and the target) or a raw label (categorical columns).
using Cell = std::variant<std::monostate, double, std::string>;

inline bool is_missing(const Cell& cell) { return std::holds_alternative<std::monostate>(cell); }

struct RawDataset {
  Schema schema;
  std::string target_name;
  bool has_target = true;
  // Each row holds schema.size() feature cells followed by the target cell
  // (when has_target).
  std::vector<std::vector<Cell>> rows;

  std::size_t size() const { return rows.size(); }
  std::size_t missing_count() const;
};

struct LoadOptions {
  std::vector<std::string> missing_tokens{"NA", "N/A"};
  bool require_target = true;
};

// Header must name every schema feature and the target exactly once (any
// order, no extra columns). Empty cells, missing tokens and unparseable
// numbers become missing cells.
RawDataset load_csv(const std::filesystem::path& path, const Schema& schema,
                    const std::string& target_name, const LoadOptions& options = {});
RawDataset parse_csv(const csv::Table& table, const Schema& schema,
                     const std::string& target_name, const LoadOptions& options = {});

// Encoded, typed table. Categorical values are integer codes stored as
// doubles; a NaN cell is a missing marker (only before clean()).
class Dataset {
 public:
  Dataset(Schema schema, std::string target_name, std::vector<std::vector<double>> columns,
          std::vector<double> target);

  const Schema& schema() const { return schema_; }
  const std::string& target_name() const { return target_name_; }
  std::size_t size() const { return target_.size(); }
  std::size_t feature_count() const { return schema_.size(); }

  std::span<const double> column(std::size_t feature) const { return columns_.at(feature); }
  std::span<const double> column(std::string_view name) const;
  std::span<const double> target() const { return target_; }
  double value(std::size_t row, std::size_t feature) const { return columns_[feature][row]; }

  // Features followed by the target.
  std::vector<double> row(std::size_t index) const;

  Dataset select(std::span<const std::size_t> rows) const;
  bool has_missing() const;
  // True when every target value is 0 or 1.
  bool binary_target() const;

  friend bool operator==(const Dataset&, const Dataset&);

 private:
  Schema schema_;
  std::string target_name_;
  std::vector<std::vector<double>> columns_;
  std::vector<double> target_;
};

// Replaces categorical labels by their codes. Throws Error{UnknownLabel}.
Dataset apply_codebook(const RawDataset& raw, const CodeBook& book);
// For already-encoded files: categorical cells must be integer codes.
Dataset apply_identity_coding(const RawDataset& raw);

struct OutlierRule {
  enum class Method { Iqr, ZScore, Off };
  Method method = Method::Iqr;
  double iqr_multiplier = 1.5;
  double z_threshold = 3.0;
};

struct CleaningEntry {
  std::size_t row = 0;  // index in the dataset handed to clean()
  std::string reason;

  friend bool operator==(const CleaningEntry&, const CleaningEntry&) = default;
};

using CleaningLog = std::vector<CleaningEntry>;

// `<row-index>\t<reason>` per line.
std::string format_cleaning_log(const CleaningLog& log);

struct CleanResult {
  Dataset data;
  CleaningLog log;
};

// Drops rows with a missing cell, then rows holding a numeric outlier.
// Outlier fences are recomputed on the survivors until no row is dropped,
// so clean() is idempotent. Survivor order is preserved. Throws
// Error{EmptyResult} when nothing survives.
CleanResult clean(const Dataset& data, const OutlierRule& rule = {});

// Linear-interpolation quantile of sorted data, q in [0, 1].
double quantile_sorted(std::span<const double> sorted, double q);

struct ClassDistribution {
  std::array<std::size_t, 2> counts{0, 0};  // indexed by class code

  std::size_t total() const { return counts[0] + counts[1]; }
  // Throws Error{EmptyDistribution} when total() == 0.
  double proportion(int cls) const;

  friend bool operator==(const ClassDistribution&, const ClassDistribution&) = default;
};

// Throws Error{EmptyDataset} for n = 0 and Error{DomainError} for a
// non-binary target.
ClassDistribution class_distribution(const Dataset& data);

// Seeded shuffle split (not part of the reference workflow, which
// evaluates on the training rows). Returns (train, holdout) with
// round(fraction * n) holdout rows; row order inside each part follows the
// original order.
std::pair<Dataset, Dataset> holdout_split(const Dataset& data, double fraction, std::uint64_t seed);

void write_csv(const Dataset& data, const std::filesystem::path& path);
std::string to_csv(const Dataset& data);

// load_csv + apply_identity_coding; rejects files with missing cells.
Dataset load_encoded(const std::filesystem::path& path, const Schema& schema,
                     const std::string& target_name);

}  // namespace cartcredit::dataset
