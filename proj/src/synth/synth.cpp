#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <sstream>

#include "cartcredit/csv.hpp"
#include "cartcredit/error.hpp"
#include "cartcredit/synth.hpp"

namespace cartcredit::synth {

double Rng::normal() {
  // Box-Muller on the raw uniforms.
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

int PlantedRule::label(std::span<const double> features) const {
  std::size_t at = 0;
  while (nodes[at].feature >= 0) {
    const PlantedNode& node = nodes[at];
    const double v = features[static_cast<std::size_t>(node.feature)];
    bool left = false;
    if (node.codes.empty()) {
      left = v <= node.threshold;
    } else {
      left = std::find(node.codes.begin(), node.codes.end(), static_cast<std::int64_t>(v)) !=
             node.codes.end();
    }
    at = static_cast<std::size_t>(left ? node.left : node.right);
  }
  return nodes[at].label;
}

int PlantedRule::depth() const {
  std::vector<int> depth(nodes.size(), 0);
  int deepest = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    deepest = std::max(deepest, depth[i]);
    if (nodes[i].feature >= 0) {
      depth[static_cast<std::size_t>(nodes[i].left)] = depth[i] + 1;
      depth[static_cast<std::size_t>(nodes[i].right)] = depth[i] + 1;
    }
  }
  return deepest;
}

std::string PlantedRule::to_text(const dataset::Schema& schema) const {
  std::ostringstream out;
  auto walk = [&](auto&& self, int index, int indent) -> void {
    const PlantedNode& node = nodes[static_cast<std::size_t>(index)];
    out << std::string(static_cast<std::size_t>(indent) * 2, ' ');
    if (node.feature < 0) {
      out << "label " << node.label << '\n';
      return;
    }
    const std::string& name = schema[static_cast<std::size_t>(node.feature)].name;
    if (node.codes.empty()) {
      out << "if " << name << " <= " << csv::format_double(node.threshold) << '\n';
    } else {
      out << "if " << name << " in {";
      for (std::size_t i = 0; i < node.codes.size(); ++i) out << (i ? ", " : "") << node.codes[i];
      out << "}\n";
    }
    self(self, node.left, indent + 1);
    out << std::string(static_cast<std::size_t>(indent) * 2, ' ') << "else\n";
    self(self, node.right, indent + 1);
  };
  walk(walk, 0, 0);
  return out.str();
}

void SynthSpec::validate() const {
  if (rows == 0) throw Error(ErrorKind::InvalidConfig, "synthetic row count must be positive");
  if (!(noise >= 0.0 && noise < 0.5)) throw Error(ErrorKind::InvalidConfig, "noise must lie in [0, 0.5)");
  if (!(missing_rate >= 0.0 && missing_rate < 1.0)) {
    throw Error(ErrorKind::InvalidConfig, "missing rate must lie in [0, 1)");
  }
  if (levels == 1) throw Error(ErrorKind::InvalidConfig, "a numeric grid needs at least 2 levels");
  dataset::validate_schema(schema);
  if (scales.size() != schema.size()) throw Error(ErrorKind::InvalidConfig, "one scale per feature");
  if (rule.nodes.empty()) throw Error(ErrorKind::InvalidConfig, "planted rule is empty");
  if (rule.depth() > 3) throw Error(ErrorKind::InvalidConfig, "planted rule deeper than 3");
  for (const auto& node : rule.nodes) {
    if (node.feature >= static_cast<int>(schema.size())) {
      throw Error(ErrorKind::InvalidConfig, "planted rule references an undeclared feature");
    }
    if (node.feature >= 0) {
      const auto& kind = schema[static_cast<std::size_t>(node.feature)].kind;
      if (kind.is_numeric() != node.codes.empty()) {
        throw Error(ErrorKind::InvalidConfig, "planted rule test does not match feature kind");
      }
    }
  }
}

namespace {

int add_leaf(PlantedRule& rule, int label) {
  PlantedNode leaf;
  leaf.label = label;
  rule.nodes.push_back(leaf);
  return static_cast<int>(rule.nodes.size()) - 1;
}

int add_split(PlantedRule& rule, int feature, double threshold) {
  PlantedNode node;
  node.feature = feature;
  node.threshold = threshold;
  rule.nodes.push_back(node);
  return static_cast<int>(rule.nodes.size()) - 1;
}

// Distinct numeric features where possible.
std::vector<int> pick_features(Rng& rng, int numeric, int count) {
  std::vector<int> pool(static_cast<std::size_t>(numeric));
  std::iota(pool.begin(), pool.end(), 0);
  for (std::size_t i = pool.size(); i > 1; --i) {
    std::swap(pool[i - 1], pool[rng.below(i)]);
  }
  std::vector<int> out;
  for (int i = 0; i < count; ++i) out.push_back(pool[static_cast<std::size_t>(i) % pool.size()]);
  return out;
}

}  // namespace

SynthSpec make_spec(const SynthShape& shape) {
  if (shape.numeric < 1) throw Error(ErrorKind::InvalidConfig, "need at least one numeric feature");
  if (shape.categorical < 0) throw Error(ErrorKind::InvalidConfig, "negative categorical count");
  if (shape.categorical > 0 && shape.modalities < 2) {
    throw Error(ErrorKind::InvalidConfig, "categorical features need >= 2 modalities");
  }
  if (shape.rule_depth < 1 || shape.rule_depth > 3) {
    throw Error(ErrorKind::InvalidConfig, "rule depth must be 1, 2 or 3");
  }
  SynthSpec spec;
  spec.rows = shape.rows;
  spec.noise = shape.noise;
  spec.missing_rate = shape.missing_rate;
  spec.seed = shape.seed;
  spec.levels = shape.numeric_levels;
  for (int i = 0; i < shape.numeric; ++i) {
    spec.schema.push_back({"x" + std::to_string(i + 1), dataset::FeatureKind::numeric(), spec.schema.size()});
    // Spread the magnitudes a little: 1, 10, 100, 1000, 1, ...
    spec.scales.push_back(std::pow(10.0, i % 4));
  }
  for (int i = 0; i < shape.categorical; ++i) {
    spec.schema.push_back({"c" + std::to_string(i + 1), dataset::FeatureKind::categorical(shape.modalities),
                           spec.schema.size()});
    spec.scales.push_back(1.0);
  }

  // The rule stream is separate from the row stream so the same seed always
  // plants the same rule regardless of the row count.
  Rng rng(shape.seed ^ 0x9E3779B97F4A7C15ULL);
  PlantedRule& rule = spec.rule;
  const auto scale = [&](int f) { return spec.scales[static_cast<std::size_t>(f)]; };
  if (shape.rule_depth == 1) {
    const int f = pick_features(rng, shape.numeric, 1)[0];
    const int root = add_split(rule, f, 0.5 * scale(f));
    rule.nodes[static_cast<std::size_t>(root)].left = add_leaf(rule, 0);
    rule.nodes[static_cast<std::size_t>(root)].right = add_leaf(rule, 1);
  } else {
    const auto f = pick_features(rng, shape.numeric, shape.rule_depth == 2 ? 3 : 7);
    const int root = add_split(rule, f[0], 0.5 * scale(f[0]));
    const int left = add_split(rule, f[1], 0.875 * scale(f[1]));
    rule.nodes[static_cast<std::size_t>(root)].left = left;
    if (shape.rule_depth == 2) {
      rule.nodes[static_cast<std::size_t>(left)].left = add_leaf(rule, 0);
      rule.nodes[static_cast<std::size_t>(left)].right = add_leaf(rule, 1);
    } else {
      const int ll = add_split(rule, f[3], 0.5 * scale(f[3]));
      rule.nodes[static_cast<std::size_t>(left)].left = ll;
      rule.nodes[static_cast<std::size_t>(ll)].left = add_leaf(rule, 0);
      rule.nodes[static_cast<std::size_t>(ll)].right = add_leaf(rule, 1);
      const int lr = add_split(rule, f[4], 0.5 * scale(f[4]));
      rule.nodes[static_cast<std::size_t>(left)].right = lr;
      rule.nodes[static_cast<std::size_t>(lr)].left = add_leaf(rule, 1);
      rule.nodes[static_cast<std::size_t>(lr)].right = add_leaf(rule, 0);
    }
    const int right = add_split(rule, f[2], 0.125 * scale(f[2]));
    rule.nodes[static_cast<std::size_t>(root)].right = right;
    if (shape.rule_depth == 2) {
      rule.nodes[static_cast<std::size_t>(right)].left = add_leaf(rule, 0);
      rule.nodes[static_cast<std::size_t>(right)].right = add_leaf(rule, 1);
    } else {
      const int rl = add_split(rule, f[5], 0.5 * scale(f[5]));
      rule.nodes[static_cast<std::size_t>(right)].left = rl;
      rule.nodes[static_cast<std::size_t>(rl)].left = add_leaf(rule, 0);
      rule.nodes[static_cast<std::size_t>(rl)].right = add_leaf(rule, 1);
      const int rr = add_split(rule, f[6], 0.5 * scale(f[6]));
      rule.nodes[static_cast<std::size_t>(right)].right = rr;
      rule.nodes[static_cast<std::size_t>(rr)].left = add_leaf(rule, 1);
      rule.nodes[static_cast<std::size_t>(rr)].right = add_leaf(rule, 0);
    }
  }
  spec.validate();
  return spec;
}

SynthData generate(const SynthSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  const std::size_t k = spec.schema.size();
  std::vector<std::vector<double>> columns(k, std::vector<double>(spec.rows));
  std::vector<double> target(spec.rows);
  std::vector<int> rule_labels(spec.rows);
  std::size_t flipped = 0;
  std::vector<double> row(k);
  for (std::size_t r = 0; r < spec.rows; ++r) {
    for (std::size_t j = 0; j < k; ++j) {
      const auto& kind = spec.schema[j].kind;
      if (kind.is_numeric()) {
        const double u = rng.uniform();
        row[j] = spec.levels == 0 ? u * spec.scales[j]
                                  : (std::floor(u * static_cast<double>(spec.levels)) + 0.5) /
                                        static_cast<double>(spec.levels) * spec.scales[j];
      } else {
        const auto m = static_cast<std::uint64_t>(kind.modalities());
        const double first = m == 2 ? 0.0 : 1.0;
        row[j] = first + static_cast<double>(rng.below(m));
      }
    }
    const int clean = spec.rule.label(row);
    const bool flip = spec.noise > 0.0 && rng.bernoulli(spec.noise);
    rule_labels[r] = clean;
    target[r] = static_cast<double>(flip ? 1 - clean : clean);
    if (flip) ++flipped;
    for (std::size_t j = 0; j < k; ++j) {
      const bool blank = spec.missing_rate > 0.0 && rng.bernoulli(spec.missing_rate);
      columns[j][r] = blank ? std::numeric_limits<double>::quiet_NaN() : row[j];
    }
  }

  dataset::CodeBook book;
  for (const auto& feature : spec.schema) {
    if (!feature.kind.is_categorical()) continue;
    const int m = feature.kind.modalities();
    const std::int64_t first = m == 2 ? 0 : 1;
    for (int c = 0; c < m; ++c) {
      book.add(feature.name, feature.name + "_level" + std::to_string(first + c), first + c);
    }
  }
  return {dataset::Dataset(spec.schema, spec.target_name, std::move(columns), std::move(target)),
          std::move(book), std::move(rule_labels), flipped};
}

std::string to_labeled_csv(const SynthData& synth) {
  const dataset::Dataset& data = synth.data;
  std::ostringstream out;
  std::vector<std::string> fields;
  for (const auto& spec : data.schema()) fields.push_back(spec.name);
  fields.push_back(data.target_name());
  csv::write_row(out, fields);
  for (std::size_t r = 0; r < data.size(); ++r) {
    fields.clear();
    for (const auto& spec : data.schema()) {
      const double v = data.value(r, spec.index);
      if (std::isnan(v)) {
        fields.emplace_back();
      } else if (spec.kind.is_categorical()) {
        fields.push_back(*synth.codebook.decode(spec.name, static_cast<std::int64_t>(v)));
      } else {
        fields.push_back(csv::format_double(v));
      }
    }
    fields.push_back(csv::format_double(data.target()[r]));
    csv::write_row(out, fields);
  }
  return out.str();
}

}  // namespace cartcredit::synth
