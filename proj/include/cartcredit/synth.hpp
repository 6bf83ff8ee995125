#pragma once

// Seeded synthetic credit-like data labeled by a planted decision rule, so
// that tree recovery can be checked against a known truth.
//
// All randomness comes from one std::mt19937_64 seeded with the user's
// 64-bit seed; uniforms are built from its raw output (53 high bits), so the
// stream does not depend on the standard library's distributions.

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "cartcredit/dataset.hpp"

namespace cartcredit::synth {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  // [0, 1)
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  // [0, n)
  std::uint64_t below(std::uint64_t n) { return engine_() % n; }
  bool bernoulli(double p) { return uniform() < p; }
  double normal();

 private:
  std::mt19937_64 engine_;
};

struct PlantedNode {
  // Internal when feature >= 0: numeric features go left iff value <= threshold;
  // categorical features go left iff the code is in `codes`.
  int feature = -1;
  double threshold = 0.0;
  std::vector<std::int64_t> codes;
  int left = -1;
  int right = -1;
  int label = 0;  // leaves
};

struct PlantedRule {
  std::vector<PlantedNode> nodes;  // nodes[0] is the root

  int label(std::span<const double> features) const;
  int depth() const;
  std::string to_text(const dataset::Schema& schema) const;
};

struct SynthSpec {
  std::size_t rows = 1000;
  dataset::Schema schema;
  std::vector<double> scales;  // numeric features: values uniform on [0, scale)
  // 0 keeps numeric values continuous; L >= 2 puts them on the centers of
  // L equal cells of [0, scale), like counts or banded amounts.
  std::size_t levels = 0;
  PlantedRule rule;
  double noise = 0.0;          // label flip probability, [0, 0.5)
  double missing_rate = 0.0;   // per-cell blank probability, [0, 1)
  std::uint64_t seed = 0;
  std::string target_name = "TARGET";

  // Throws Error{InvalidConfig}.
  void validate() const;
};

struct SynthShape {
  std::size_t rows = 1000;
  int numeric = 3;
  int categorical = 0;
  int modalities = 3;
  int rule_depth = 2;
  std::size_t numeric_levels = 0;
  double noise = 0.0;
  double missing_rate = 0.0;
  std::uint64_t seed = 0;
};

// Builds a schema (x1..xk numeric, c1..cm categorical) and draws a planted
// rule over numeric features. Depth-2 rules have the shape
//   a <= median ? (b > q87.5) : (c > q12.5)
// On a grid whose level count is a multiple of 8 every planted threshold
// falls between two levels, and a greedy Gini search recovers the rule on
// noise-free data. On continuous values the greedy root threshold can land
// a few rows past the planted one, which costs extra nodes. Depth-3 rules
// are not built to be recovered minimally.
SynthSpec make_spec(const SynthShape& shape);

struct SynthData {
  dataset::Dataset data;            // encoded, NaN where a cell was blanked
  dataset::CodeBook codebook;
  std::vector<int> rule_labels;     // labels before noise
  std::size_t flipped = 0;
};

SynthData generate(const SynthSpec& spec);

// CSV with categorical labels (decoded through the codebook) and blank
// missing cells.
std::string to_labeled_csv(const SynthData& synth);

}  // namespace cartcredit::synth
