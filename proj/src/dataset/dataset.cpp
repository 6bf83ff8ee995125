#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "cartcredit/dataset.hpp"
#include "cartcredit/error.hpp"

namespace cartcredit::dataset {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

std::optional<double> parse_number(std::string_view text) {
  text = trim(text);
  if (text.empty()) return std::nullopt;
  if (text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || end != text.data() + text.size() || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ",";
    out += items[i];
  }
  return out;
}

constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

}  // namespace

FeatureKind FeatureKind::categorical(int modalities) {
  if (modalities < 2) {
    throw Error(ErrorKind::InvalidConfig,
                "categorical feature needs at least 2 modalities, got " +
                    std::to_string(modalities));
  }
  return FeatureKind(modalities);
}

void validate_schema(const Schema& schema) {
  std::set<std::string, std::less<>> names;
  for (std::size_t i = 0; i < schema.size(); ++i) {
    if (schema[i].index != i) {
      throw Error(ErrorKind::InvalidConfig, "schema index of " + schema[i].name + " is " +
                                                std::to_string(schema[i].index) + ", expected " +
                                                std::to_string(i));
    }
    if (schema[i].name.empty()) throw Error(ErrorKind::InvalidConfig, "empty feature name");
    if (!names.insert(schema[i].name).second) {
      throw Error(ErrorKind::InvalidConfig, "duplicate feature name " + schema[i].name);
    }
  }
}

std::optional<std::size_t> find_feature(const Schema& schema, std::string_view name) {
  for (const auto& spec : schema) {
    if (spec.name == name) return spec.index;
  }
  return std::nullopt;
}

Schema read_schema(const std::filesystem::path& path) {
  const csv::Table table = csv::read_file(path);
  const std::vector<std::string> expected{"name", "kind", "modalities"};
  if (table.header != expected) {
    throw Error(ErrorKind::HeaderMismatch,
                path.string() + ": schema header must be name,kind,modalities");
  }
  Schema schema;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    const std::string where = path.string() + ": line " + std::to_string(table.lines[i]);
    if (row.size() != 3) throw Error(ErrorKind::RaggedRow, where);
    FeatureSpec spec{row[0], FeatureKind::numeric(), schema.size()};
    if (row[1] == "categorical") {
      const auto m = parse_number(row[2]);
      if (!m || *m != std::floor(*m)) {
        throw Error(ErrorKind::MalformedDocument, where + ": bad modality count");
      }
      spec.kind = FeatureKind::categorical(static_cast<int>(*m));
    } else if (row[1] != "numeric") {
      throw Error(ErrorKind::MalformedDocument, where + ": unknown kind '" + row[1] + "'");
    }
    schema.push_back(std::move(spec));
  }
  validate_schema(schema);
  return schema;
}

void write_schema(const Schema& schema, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::MissingFile, "cannot write " + path.string());
  csv::write_row(out, {"name", "kind", "modalities"});
  for (const auto& spec : schema) {
    csv::write_row(out, {spec.name, spec.kind.is_numeric() ? "numeric" : "categorical",
                         std::to_string(spec.kind.modalities())});
  }
}

std::size_t RawDataset::missing_count() const {
  std::size_t count = 0;
  for (const auto& row : rows) {
    count += static_cast<std::size_t>(std::count_if(row.begin(), row.end(), is_missing));
  }
  return count;
}

CodeBook CodeBook::infer(const RawDataset& raw) {
  CodeBook book;
  for (const auto& spec : raw.schema) {
    if (!spec.kind.is_categorical()) continue;
    std::vector<std::string> labels;
    for (const auto& row : raw.rows) {
      const auto* label = std::get_if<std::string>(&row[spec.index]);
      if (label && std::find(labels.begin(), labels.end(), *label) == labels.end()) {
        labels.push_back(*label);
      }
    }
    const std::int64_t first = labels.size() == 2 ? 0 : 1;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      book.add(spec.name, labels[i], first + static_cast<std::int64_t>(i));
    }
  }
  return book;
}

RawDataset parse_csv(const csv::Table& table, const Schema& schema,
                     const std::string& target_name, const LoadOptions& options) {
  validate_schema(schema);
  std::vector<std::string> expected;
  for (const auto& spec : schema) expected.push_back(spec.name);
  expected.push_back(target_name);

  // Column position of each schema feature (and the target) in the file.
  std::vector<std::optional<std::size_t>> position(expected.size());
  bool mismatch = false;
  for (std::size_t col = 0; col < table.header.size(); ++col) {
    const auto& name = table.header[col];
    auto it = std::find(expected.begin(), expected.end(), std::string(trim(name)));
    if (it == expected.end()) {
      mismatch = true;
      continue;
    }
    auto& slot = position[static_cast<std::size_t>(it - expected.begin())];
    if (slot) mismatch = true;
    slot = col;
  }
  for (std::size_t i = 0; i < schema.size(); ++i) {
    if (!position[i]) mismatch = true;
  }
  const bool has_target = position.back().has_value();
  if (options.require_target && !has_target) mismatch = true;
  if (mismatch) {
    throw Error(ErrorKind::HeaderMismatch,
                "expected columns [" + join(expected) + "], found [" + join(table.header) + "]");
  }

  RawDataset raw;
  raw.schema = schema;
  raw.target_name = target_name;
  raw.has_target = has_target;
  raw.rows.reserve(table.rows.size());
  const std::size_t width = has_target ? expected.size() : schema.size();
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& fields = table.rows[r];
    if (fields.size() != table.header.size()) {
      throw Error(ErrorKind::RaggedRow, "row " + std::to_string(r) + " (line " +
                                            std::to_string(table.lines[r]) + ") has " +
                                            std::to_string(fields.size()) + " fields, expected " +
                                            std::to_string(table.header.size()));
    }
    std::vector<Cell> cells(width);
    for (std::size_t c = 0; c < width; ++c) {
      const std::string_view text = trim(fields[*position[c]]);
      const bool token = std::find(options.missing_tokens.begin(), options.missing_tokens.end(),
                                   text) != options.missing_tokens.end();
      if (text.empty() || token) continue;
      const bool categorical = c < schema.size() && schema[c].kind.is_categorical();
      if (categorical) {
        cells[c] = std::string(text);
      } else if (auto v = parse_number(text)) {
        cells[c] = *v;
      }
    }
    raw.rows.push_back(std::move(cells));
  }
  return raw;
}

RawDataset load_csv(const std::filesystem::path& path, const Schema& schema,
                    const std::string& target_name, const LoadOptions& options) {
  if (!std::filesystem::exists(path)) {
    throw Error(ErrorKind::MissingFile, "no such file: " + path.string());
  }
  return parse_csv(csv::read_file(path), schema, target_name, options);
}

Dataset::Dataset(Schema schema, std::string target_name, std::vector<std::vector<double>> columns,
                 std::vector<double> target)
    : schema_(std::move(schema)),
      target_name_(std::move(target_name)),
      columns_(std::move(columns)),
      target_(std::move(target)) {
  validate_schema(schema_);
  if (columns_.size() != schema_.size()) {
    throw Error(ErrorKind::SchemaMismatch, "column count differs from schema length");
  }
  for (const auto& column : columns_) {
    if (column.size() != target_.size()) {
      throw Error(ErrorKind::RaggedRow, "column length differs from row count");
    }
  }
}

std::span<const double> Dataset::column(std::string_view name) const {
  auto index = find_feature(schema_, name);
  if (!index) throw Error(ErrorKind::SchemaMismatch, "no feature named " + std::string(name));
  return columns_[*index];
}

std::vector<double> Dataset::row(std::size_t index) const {
  std::vector<double> out;
  out.reserve(columns_.size() + 1);
  for (const auto& column : columns_) out.push_back(column.at(index));
  out.push_back(target_.at(index));
  return out;
}

Dataset Dataset::select(std::span<const std::size_t> rows) const {
  std::vector<std::vector<double>> columns(columns_.size());
  for (std::size_t c = 0; c < columns_.size(); ++c) {
    columns[c].reserve(rows.size());
    for (std::size_t r : rows) columns[c].push_back(columns_[c].at(r));
  }
  std::vector<double> target;
  target.reserve(rows.size());
  for (std::size_t r : rows) target.push_back(target_.at(r));
  return Dataset(schema_, target_name_, std::move(columns), std::move(target));
}

bool Dataset::has_missing() const {
  auto nan = [](double v) { return std::isnan(v); };
  if (std::any_of(target_.begin(), target_.end(), nan)) return true;
  return std::any_of(columns_.begin(), columns_.end(), [&](const auto& column) {
    return std::any_of(column.begin(), column.end(), nan);
  });
}

bool Dataset::binary_target() const {
  return std::all_of(target_.begin(), target_.end(), [](double v) { return v == 0.0 || v == 1.0; });
}

bool operator==(const Dataset& a, const Dataset& b) {
  // Bitwise comparison so NaN markers compare equal to themselves.
  auto same = [](std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) return false;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (!(x[i] == y[i]) && !(std::isnan(x[i]) && std::isnan(y[i]))) return false;
    }
    return true;
  };
  if (a.schema_ != b.schema_ || a.target_name_ != b.target_name_) return false;
  if (!same(a.target_, b.target_)) return false;
  for (std::size_t c = 0; c < a.columns_.size(); ++c) {
    if (!same(a.columns_[c], b.columns_[c])) return false;
  }
  return true;
}

namespace {

template <typename CategoricalCode>
Dataset encode(const RawDataset& raw, CategoricalCode&& code_of) {
  const std::size_t width = raw.schema.size();
  std::vector<std::vector<double>> columns(width, std::vector<double>(raw.size(), kMissing));
  std::vector<double> target(raw.size(), kMissing);
  for (std::size_t r = 0; r < raw.size(); ++r) {
    const auto& row = raw.rows[r];
    for (std::size_t c = 0; c < width; ++c) {
      const Cell& cell = row[c];
      if (is_missing(cell)) continue;
      if (raw.schema[c].kind.is_categorical()) {
        columns[c][r] = code_of(raw.schema[c], std::get<std::string>(cell), r);
      } else {
        columns[c][r] = std::get<double>(cell);
      }
    }
    if (raw.has_target && !is_missing(row[width])) target[r] = std::get<double>(row[width]);
  }
  return Dataset(raw.schema, raw.target_name, std::move(columns), std::move(target));
}

}  // namespace

Dataset apply_codebook(const RawDataset& raw, const CodeBook& book) {
  return encode(raw, [&](const FeatureSpec& spec, const std::string& label, std::size_t row) {
    auto code = book.encode(spec.name, label);
    if (!code) {
      throw Error(ErrorKind::UnknownLabel, "feature " + spec.name + ", label '" + label +
                                               "', row " + std::to_string(row));
    }
    return static_cast<double>(*code);
  });
}

Dataset apply_identity_coding(const RawDataset& raw) {
  return encode(raw, [&](const FeatureSpec& spec, const std::string& label, std::size_t row) {
    auto value = parse_number(label);
    if (!value || *value != std::floor(*value)) {
      throw Error(ErrorKind::UnknownLabel, "feature " + spec.name + ", label '" + label +
                                               "', row " + std::to_string(row) +
                                               " is not an integer code");
    }
    return *value;
  });
}

double ClassDistribution::proportion(int cls) const {
  if (total() == 0) throw Error(ErrorKind::EmptyDistribution, "no observations");
  return static_cast<double>(counts.at(static_cast<std::size_t>(cls))) /
         static_cast<double>(total());
}

ClassDistribution class_distribution(const Dataset& data) {
  if (data.size() == 0) throw Error(ErrorKind::EmptyDataset, "dataset has no rows");
  ClassDistribution dist;
  for (double y : data.target()) {
    if (y == 0.0) {
      ++dist.counts[0];
    } else if (y == 1.0) {
      ++dist.counts[1];
    } else {
      throw Error(ErrorKind::DomainError, "target value " + csv::format_double(y) +
                                              " is not a binary class");
    }
  }
  return dist;
}

std::pair<Dataset, Dataset> holdout_split(const Dataset& data, double fraction,
                                          std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw Error(ErrorKind::InvalidConfig, "holdout fraction must lie in (0, 1)");
  }
  const std::size_t n = data.size();
  const auto held = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  if (held == 0 || held >= n) {
    throw Error(ErrorKind::InvalidConfig, "holdout fraction leaves an empty partition");
  }
  // Fisher-Yates driven by mt19937_64 directly, so the split does not depend
  // on the standard library's distribution implementations.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  for (std::size_t i = n - 1; i > 0; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % (i + 1));
    std::swap(order[i], order[j]);
  }
  std::vector<std::size_t> holdout(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(held));
  std::vector<std::size_t> train(order.begin() + static_cast<std::ptrdiff_t>(held), order.end());
  std::sort(holdout.begin(), holdout.end());
  std::sort(train.begin(), train.end());
  return {data.select(train), data.select(holdout)};
}

std::string to_csv(const Dataset& data) {
  std::ostringstream out;
  std::vector<std::string> fields;
  for (const auto& spec : data.schema()) fields.push_back(spec.name);
  fields.push_back(data.target_name());
  csv::write_row(out, fields);
  for (std::size_t r = 0; r < data.size(); ++r) {
    fields.clear();
    for (std::size_t c = 0; c < data.feature_count(); ++c) {
      const double v = data.value(r, c);
      fields.push_back(std::isnan(v) ? std::string() : csv::format_double(v));
    }
    const double y = data.target()[r];
    fields.push_back(std::isnan(y) ? std::string() : csv::format_double(y));
    csv::write_row(out, fields);
  }
  return out.str();
}

void write_csv(const Dataset& data, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::MissingFile, "cannot write " + path.string());
  out << to_csv(data);
}

Dataset load_encoded(const std::filesystem::path& path, const Schema& schema,
                     const std::string& target_name) {
  Dataset data = apply_identity_coding(load_csv(path, schema, target_name));
  if (data.has_missing()) {
    throw Error(ErrorKind::DomainError, path.string() + " contains missing cells; run encode first");
  }
  return data;
}

}  // namespace cartcredit::dataset
