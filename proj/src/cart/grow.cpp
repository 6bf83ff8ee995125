#include <algorithm>
#include <set>

#include "cartcredit/cart.hpp"
#include "cartcredit/error.hpp"

namespace cartcredit::cart {

void CartConfig::validate() const {
  if (min_node_size < 1) throw Error(ErrorKind::InvalidConfig, "min-node-size must be >= 1");
  if (min_node_size > 5 && !allow_large_min_node_size) {
    throw Error(ErrorKind::InvalidConfig,
                "min-node-size " + std::to_string(min_node_size) +
                    " is outside [1, 5]; pass the override flag to allow it");
  }
  if (max_depth < 0) throw Error(ErrorKind::InvalidConfig, "max-depth must be >= 0");
  if (!(min_gini_decrease >= 0.0)) {
    throw Error(ErrorKind::InvalidConfig, "min-gini-decrease must be >= 0");
  }
}

CartTree::CartTree(std::vector<dataset::FeatureSpec> features,
                   std::vector<std::vector<std::int64_t>> seen_codes, CartConfig config,
                   std::size_t training_size, std::vector<Node> nodes)
    : features_(std::move(features)),
      seen_codes_(std::move(seen_codes)),
      config_(config),
      training_size_(training_size),
      nodes_(std::move(nodes)) {
  if (nodes_.empty()) throw Error(ErrorKind::MalformedDocument, "tree has no nodes");
  if (seen_codes_.size() != features_.size()) {
    throw Error(ErrorKind::MalformedDocument, "one code list per feature required");
  }
}

std::size_t CartTree::depth() const {
  int deepest = 0;
  for (const auto& node : nodes_) deepest = std::max(deepest, node.depth);
  return static_cast<std::size_t>(deepest);
}

std::size_t CartTree::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes_.begin(), nodes_.end(), [](const Node& n) { return n.is_leaf(); }));
}

std::vector<std::size_t> CartTree::bind(const dataset::Schema& schema) const {
  std::vector<std::size_t> indices;
  for (const auto& spec : features_) {
    const auto index = dataset::find_feature(schema, spec.name);
    if (!index) {
      throw Error(ErrorKind::SchemaMismatch, "dataset lacks model feature " + spec.name);
    }
    if (schema[*index].kind.is_numeric() != spec.kind.is_numeric()) {
      throw Error(ErrorKind::SchemaMismatch, "feature " + spec.name + " changed kind");
    }
    indices.push_back(*index);
  }
  return indices;
}

Prediction CartTree::predict(std::span<const double> values) const {
  if (values.size() != features_.size()) {
    throw Error(ErrorKind::SchemaMismatch, "row has " + std::to_string(values.size()) +
                                               " values, model expects " +
                                               std::to_string(features_.size()));
  }
  Prediction out;
  std::size_t at = 0;
  while (!nodes_[at].is_leaf()) {
    const SplitRule& rule = *nodes_[at].rule;
    const double v = values[rule.feature];
    if (std::holds_alternative<CategoricalSubset>(rule.test)) {
      const auto& seen = seen_codes_[rule.feature];
      if (!std::binary_search(seen.begin(), seen.end(), static_cast<std::int64_t>(v))) {
        out.unseen_category = true;
      }
    }
    at = static_cast<std::size_t>(rule.goes_left(v) ? nodes_[at].left : nodes_[at].right);
  }
  const Node& leaf = nodes_[at];
  out.leaf = at;
  out.predicted_class = leaf.leaf.predicted_class;
  out.score = config_.mode == Mode::Classification ? leaf.leaf.positive_proportion : leaf.leaf.mean;
  return out;
}

Prediction CartTree::predict(const dataset::Dataset& data, std::size_t row) const {
  const auto indices = bind(data.schema());
  std::vector<double> values;
  for (std::size_t index : indices) values.push_back(data.value(row, index));
  return predict(values);
}

std::vector<Prediction> CartTree::predict_all(const dataset::Dataset& data) const {
  const auto indices = bind(data.schema());
  std::vector<Prediction> out;
  out.reserve(data.size());
  std::vector<double> values(indices.size());
  for (std::size_t r = 0; r < data.size(); ++r) {
    for (std::size_t k = 0; k < indices.size(); ++k) values[k] = data.value(r, indices[k]);
    out.push_back(predict(values));
  }
  return out;
}

namespace {

class Grower {
 public:
  Grower(std::span<const std::vector<double>> columns, std::span<const double> target,
         std::span<const dataset::FeatureSpec> features, const CartConfig& config)
      : columns_(columns), target_(target), features_(features), config_(config) {}

  std::vector<Node> run(std::vector<std::size_t> rows) {
    build(std::move(rows), 0);
    return std::move(nodes_);
  }

 private:
  std::size_t build(std::vector<std::size_t> rows, int depth) {
    const std::size_t index = nodes_.size();
    nodes_.emplace_back();
    Node node;
    node.n = rows.size();
    node.depth = depth;

    bool homogeneous = false;
    if (config_.mode == Mode::Classification) {
      for (std::size_t r : rows) ++node.distribution.counts[target_[r] == 1.0 ? 1 : 0];
      homogeneous = node.distribution.counts[0] == 0 || node.distribution.counts[1] == 0;
    } else {
      homogeneous = std::all_of(rows.begin(), rows.end(),
                                [&](std::size_t r) { return target_[r] == target_[rows.front()]; });
    }

    std::optional<SplitCandidate> split;
    const bool small = rows.size() < static_cast<std::size_t>(config_.min_node_size);
    if (!homogeneous && !small && depth < config_.max_depth) {
      split = best_split(NodeData{columns_, target_, rows}, features_, config_);
    }

    if (!split) {
      if (config_.mode == Mode::Classification) {
        node.leaf = assign_leaf(node.distribution);
      } else {
        std::vector<double> values;
        for (std::size_t r : rows) values.push_back(target_[r]);
        node.leaf = assign_leaf(values);
      }
      nodes_[index] = std::move(node);
      return index;
    }

    std::vector<std::size_t> left_rows;
    std::vector<std::size_t> right_rows;
    const auto& column = columns_[split->rule.feature];
    for (std::size_t r : rows) {
      (split->rule.goes_left(column[r]) ? left_rows : right_rows).push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();
    node.rule = split->rule;
    nodes_[index] = std::move(node);
    const std::size_t left = build(std::move(left_rows), depth + 1);
    const std::size_t right = build(std::move(right_rows), depth + 1);
    nodes_[index].left = static_cast<std::int64_t>(left);
    nodes_[index].right = static_cast<std::int64_t>(right);
    return index;
  }

  std::span<const std::vector<double>> columns_;
  std::span<const double> target_;
  std::span<const dataset::FeatureSpec> features_;
  const CartConfig& config_;
  std::vector<Node> nodes_;
};

}  // namespace

CartTree grow(const dataset::Dataset& data, const std::vector<std::string>& features,
              const CartConfig& config) {
  config.validate();
  if (data.size() == 0) throw Error(ErrorKind::EmptyDataset, "cannot grow a tree on 0 rows");
  std::vector<std::string> names = features;
  if (names.empty()) {
    for (const auto& spec : data.schema()) names.push_back(spec.name);
  }
  if (names.empty()) throw Error(ErrorKind::SchemaMismatch, "no features to split on");
  if (config.mode == Mode::Classification && !data.binary_target()) {
    throw Error(ErrorKind::DomainError, "classification target must be 0/1");
  }
  if (data.has_missing()) throw Error(ErrorKind::DomainError, "dataset has missing cells; clean it first");

  std::vector<dataset::FeatureSpec> specs;
  std::vector<std::vector<double>> columns;
  std::vector<std::vector<std::int64_t>> seen;
  for (const auto& name : names) {
    const auto index = dataset::find_feature(data.schema(), name);
    if (!index) throw Error(ErrorKind::SchemaMismatch, "dataset has no feature " + name);
    dataset::FeatureSpec spec = data.schema()[*index];
    spec.index = specs.size();
    const auto column = data.column(*index);
    std::vector<std::int64_t> codes;
    if (spec.kind.is_categorical()) {
      std::set<std::int64_t> distinct;
      for (double v : column) distinct.insert(static_cast<std::int64_t>(v));
      codes.assign(distinct.begin(), distinct.end());
    }
    specs.push_back(std::move(spec));
    columns.emplace_back(column.begin(), column.end());
    seen.push_back(std::move(codes));
  }
  dataset::validate_schema(specs);

  std::vector<std::size_t> rows(data.size());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  Grower grower(columns, data.target(), specs, config);
  std::vector<Node> nodes = grower.run(std::move(rows));
  return CartTree(std::move(specs), std::move(seen), config, data.size(), std::move(nodes));
}

}  // namespace cartcredit::cart
