#pragma once

// Binary CART trees grown with the Gini index.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "cartcredit/dataset.hpp"

namespace cartcredit::cart {

using dataset::ClassDistribution;

// 1 - Σ p_i². Throws Error{EmptyDistribution} on an empty distribution.
double gini(const ClassDistribution& dist);
// Σ p_i (1 - p_i), the same quantity written the other way.
double gini_complement_form(const ClassDistribution& dist);

// (n_L gini(L) + n_R gini(R)) / (n_L + n_R).
double split_gini(const ClassDistribution& left, const ClassDistribution& right);

// Exact Gini decrease gini(L ∪ R) - split_gini(L, R) as a rational
// numerator / denominator, both exactly representable in a double.
struct ExactDecrease {
  std::int64_t numerator = 0;
  std::int64_t denominator = 1;

  // Correctly rounded quotient.
  double value() const { return static_cast<double>(numerator) / static_cast<double>(denominator); }
  friend bool operator<(const ExactDecrease& a, const ExactDecrease& b);
  friend bool operator==(const ExactDecrease& a, const ExactDecrease& b);
};

ExactDecrease exact_decrease(const ClassDistribution& left, const ClassDistribution& right);

struct NumericThreshold {
  double threshold = 0.0;  // left iff value <= threshold

  friend bool operator==(const NumericThreshold&, const NumericThreshold&) = default;
};

struct CategoricalSubset {
  std::vector<std::int64_t> codes;  // sorted; left iff code is in the set

  friend bool operator==(const CategoricalSubset&, const CategoricalSubset&) = default;
};

struct SplitRule {
  std::size_t feature = 0;  // index into the tree's feature list
  std::string feature_name;
  std::variant<NumericThreshold, CategoricalSubset> test;

  bool goes_left(double value) const;
  std::string describe() const;

  friend bool operator==(const SplitRule&, const SplitRule&) = default;
};

enum class Mode { Classification, Regression };

struct CartConfig {
  int min_node_size = 5;
  bool allow_large_min_node_size = false;
  int max_depth = 10;
  double min_gini_decrease = 0.0;
  Mode mode = Mode::Classification;

  // min_node_size in [1, 5] unless allow_large_min_node_size; max_depth >= 0;
  // min_gini_decrease >= 0. Throws Error{InvalidConfig}.
  void validate() const;

  friend bool operator==(const CartConfig&, const CartConfig&) = default;
};

// Rows reaching a node, as indices into the training columns.
struct NodeData {
  std::span<const std::vector<double>> columns;  // one per tree feature
  std::span<const double> target;
  std::span<const std::size_t> rows;
};

struct SplitCandidate {
  SplitRule rule;
  double decrease = 0.0;
  ExactDecrease exact;  // classification only
};

// Best split at a node, or nullopt when the node is pure, has fewer than
// two rows, offers no admissible partition or the best decrease is below
// config.min_gini_decrease. Numeric candidates are midpoints of consecutive
// distinct values; categorical candidates are all 2^(m-1) - 1 partitions of
// the m codes present, with the left set holding the smallest code. Ties go
// to the lowest feature index, then the lowest threshold, then the
// lexicographically smallest code list.
std::optional<SplitCandidate> best_split(const NodeData& node,
                                         std::span<const dataset::FeatureSpec> features,
                                         const CartConfig& config);

// Number of candidate partitions for a categorical feature with m codes.
std::size_t categorical_partition_count(std::size_t m);

struct Leaf {
  int predicted_class = 0;     // classification
  double positive_proportion = 0.0;
  double mean = 0.0;           // regression

  friend bool operator==(const Leaf&, const Leaf&) = default;
};

// Majority class (ties to class 0) and count_1 / n.
Leaf assign_leaf(const ClassDistribution& dist);
// Mean of the values. Throws Error{EmptyDistribution} when empty.
Leaf assign_leaf(std::span<const double> values);

struct Node {
  std::size_t n = 0;
  ClassDistribution distribution;  // classification only
  std::optional<SplitRule> rule;   // set on internal nodes
  std::int64_t left = -1;          // child indices into CartTree::nodes()
  std::int64_t right = -1;
  Leaf leaf;                       // meaningful on leaves
  int depth = 0;

  bool is_leaf() const { return !rule.has_value(); }
  friend bool operator==(const Node&, const Node&) = default;
};

struct Prediction {
  int predicted_class = 0;
  double score = 0.0;  // positive proportion (or mean in regression mode)
  std::size_t leaf = 0;
  bool unseen_category = false;
};

class CartTree {
 public:
  CartTree(std::vector<dataset::FeatureSpec> features,
           std::vector<std::vector<std::int64_t>> seen_codes, CartConfig config,
           std::size_t training_size, std::vector<Node> nodes);

  // Features the tree was grown on, re-indexed from 0 in tree order.
  const std::vector<dataset::FeatureSpec>& features() const { return features_; }
  // Training codes per feature (empty for numeric features).
  const std::vector<std::vector<std::int64_t>>& seen_codes() const { return seen_codes_; }
  const CartConfig& config() const { return config_; }
  std::size_t training_size() const { return training_size_; }
  // Preorder; nodes()[0] is the root.
  const std::vector<Node>& nodes() const { return nodes_; }
  const Node& root() const { return nodes_.front(); }
  std::size_t depth() const;
  std::size_t leaf_count() const;

  // Checks every tree feature exists in `schema` with the same kind and
  // returns the schema index of each. Throws Error{SchemaMismatch}.
  std::vector<std::size_t> bind(const dataset::Schema& schema) const;

  // `values` indexed like features().
  Prediction predict(std::span<const double> values) const;
  Prediction predict(const dataset::Dataset& data, std::size_t row) const;
  std::vector<Prediction> predict_all(const dataset::Dataset& data) const;

  friend bool operator==(const CartTree&, const CartTree&) = default;

 private:
  std::vector<dataset::FeatureSpec> features_;
  std::vector<std::vector<std::int64_t>> seen_codes_;
  CartConfig config_;
  std::size_t training_size_;
  std::vector<Node> nodes_;
};

// Grows a tree on the named features (all features when empty). A node
// becomes a leaf when it is homogeneous, smaller than min_node_size, at
// max_depth, or has no admissible split. Throws Error{EmptyDataset},
// Error{SchemaMismatch} or Error{DomainError} (non-binary target in
// classification mode).
CartTree grow(const dataset::Dataset& data, const std::vector<std::string>& features,
              const CartConfig& config = {});

inline constexpr std::string_view kModelFormat = "cart-model/1";

std::string serialize(const CartTree& tree);
// Throws Error{MalformedDocument} (with the line number) or
// Error{VersionMismatch}.
CartTree deserialize(std::string_view document);

std::string export_dot(const CartTree& tree);
std::string export_text(const CartTree& tree);

}  // namespace cartcredit::cart
