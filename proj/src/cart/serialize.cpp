#include <algorithm>
#include <charconv>
#include <cstdio>
#include <map>
#include <sstream>

#include "cartcredit/cart.hpp"
#include "cartcredit/error.hpp"

namespace cartcredit::cart {
namespace {

// 17 significant digits round-trip every double.
std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string join_codes(const std::vector<std::int64_t>& codes) {
  if (codes.empty()) return "-";
  std::string out;
  for (std::size_t i = 0; i < codes.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(codes[i]);
  }
  return out;
}

void check_name(const std::string& name) {
  if (name.find_first_of("\t\n\r") != std::string::npos || name.empty()) {
    throw Error(ErrorKind::InvalidConfig, "feature name '" + name + "' cannot be serialized");
  }
}

std::vector<std::string> split_tabs(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t tab = line.find('\t', start);
    out.emplace_back(line.substr(start, tab == std::string_view::npos ? std::string_view::npos
                                                                        : tab - start));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  return out;
}

class Reader {
 public:
  explicit Reader(std::string_view doc) : doc_(doc) {}

  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorKind::MalformedDocument, "line " + std::to_string(line_) + ": " + what);
  }

  std::vector<std::string> next() {
    if (pos_ >= doc_.size()) {
      ++line_;
      fail("unexpected end of document");
    }
    const std::size_t nl = doc_.find('\n', pos_);
    std::string_view line = doc_.substr(pos_, nl == std::string_view::npos ? std::string_view::npos
                                                                            : nl - pos_);
    pos_ = nl == std::string_view::npos ? doc_.size() : nl + 1;
    ++line_;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    return split_tabs(line);
  }

  std::vector<std::string> expect(std::string_view key, std::size_t fields) {
    auto f = next();
    if (f.empty() || f[0] != key) fail("expected '" + std::string(key) + "'");
    if (f.size() != fields) fail("'" + std::string(key) + "' needs " + std::to_string(fields - 1) + " value(s)");
    return f;
  }

  template <typename T>
  T integer(const std::string& text) const {
    T value{};
    auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || end != text.data() + text.size()) fail("bad integer '" + text + "'");
    return value;
  }

  double real(const std::string& text) const {
    double value = 0.0;
    auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || end != text.data() + text.size()) fail("bad number '" + text + "'");
    return value;
  }

  std::vector<std::int64_t> codes(const std::string& text) const {
    std::vector<std::int64_t> out;
    if (text == "-") return out;
    std::size_t start = 0;
    for (;;) {
      const std::size_t comma = text.find(',', start);
      out.push_back(integer<std::int64_t>(text.substr(start, comma == std::string::npos ? std::string::npos : comma - start)));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    return out;
  }

  // key=value fields after the fixed columns of a node line.
  std::map<std::string, std::string> attributes(const std::vector<std::string>& fields,
                                                std::size_t from) const {
    std::map<std::string, std::string> out;
    for (std::size_t i = from; i < fields.size(); ++i) {
      const auto eq = fields[i].find('=');
      if (eq == std::string::npos) fail("expected key=value, got '" + fields[i] + "'");
      out[fields[i].substr(0, eq)] = fields[i].substr(eq + 1);
    }
    return out;
  }

  const std::string& need(const std::map<std::string, std::string>& attrs, const std::string& key) const {
    auto it = attrs.find(key);
    if (it == attrs.end()) fail("node lacks '" + key + "'");
    return it->second;
  }

  std::size_t line() const { return line_; }

 private:
  std::string_view doc_;
  std::size_t pos_ = 0;
  std::size_t line_ = 0;
};

}  // namespace

std::string serialize(const CartTree& tree) {
  std::ostringstream out;
  const CartConfig& c = tree.config();
  out << "format\t" << kModelFormat << '\n';
  out << "mode\t" << (c.mode == Mode::Classification ? "classification" : "regression") << '\n';
  out << "min-node-size\t" << c.min_node_size << '\n';
  out << "allow-large-min-node-size\t" << (c.allow_large_min_node_size ? 1 : 0) << '\n';
  out << "max-depth\t" << c.max_depth << '\n';
  out << "min-gini-decrease\t" << g17(c.min_gini_decrease) << '\n';
  out << "training-size\t" << tree.training_size() << '\n';
  out << "features\t" << tree.features().size() << '\n';
  for (std::size_t i = 0; i < tree.features().size(); ++i) {
    const auto& spec = tree.features()[i];
    check_name(spec.name);
    out << "feature\t" << i << '\t' << spec.name << '\t'
        << (spec.kind.is_numeric() ? "numeric" : "categorical") << '\t' << spec.kind.modalities()
        << '\t' << join_codes(tree.seen_codes()[i]) << '\n';
  }
  out << "nodes\t" << tree.nodes().size() << '\n';
  for (std::size_t i = 0; i < tree.nodes().size(); ++i) {
    const Node& node = tree.nodes()[i];
    out << "node\t" << i << '\t' << (node.is_leaf() ? "leaf" : "internal") << "\tn=" << node.n
        << "\tdepth=" << node.depth << "\tcounts=" << node.distribution.counts[0] << ','
        << node.distribution.counts[1];
    if (node.is_leaf()) {
      out << "\tclass=" << node.leaf.predicted_class << "\tpositive=" << g17(node.leaf.positive_proportion)
          << "\tmean=" << g17(node.leaf.mean);
    } else {
      const SplitRule& rule = *node.rule;
      out << "\tfeature=" << rule.feature;
      if (const auto* t = std::get_if<NumericThreshold>(&rule.test)) {
        out << "\tthreshold=" << g17(t->threshold);
      } else {
        out << "\tsubset=" << join_codes(std::get<CategoricalSubset>(rule.test).codes);
      }
      out << "\tleft=" << node.left << "\tright=" << node.right;
    }
    out << '\n';
  }
  out << "end\n";
  return out.str();
}

CartTree deserialize(std::string_view document) {
  Reader in(document);
  {
    auto f = in.next();
    if (f.size() != 2 || f[0] != "format") in.fail("expected 'format' header");
    if (f[1] != kModelFormat) {
      throw Error(ErrorKind::VersionMismatch,
                  "model format '" + f[1] + "', this build reads " + std::string(kModelFormat));
    }
  }
  CartConfig config;
  {
    const auto mode = in.expect("mode", 2)[1];
    if (mode == "classification") config.mode = Mode::Classification;
    else if (mode == "regression") config.mode = Mode::Regression;
    else in.fail("unknown mode '" + mode + "'");
  }
  config.min_node_size = in.integer<int>(in.expect("min-node-size", 2)[1]);
  config.allow_large_min_node_size = in.integer<int>(in.expect("allow-large-min-node-size", 2)[1]) != 0;
  config.max_depth = in.integer<int>(in.expect("max-depth", 2)[1]);
  config.min_gini_decrease = in.real(in.expect("min-gini-decrease", 2)[1]);
  const auto training_size = in.integer<std::size_t>(in.expect("training-size", 2)[1]);

  const auto feature_count = in.integer<std::size_t>(in.expect("features", 2)[1]);
  std::vector<dataset::FeatureSpec> features;
  std::vector<std::vector<std::int64_t>> seen;
  for (std::size_t i = 0; i < feature_count; ++i) {
    const auto f = in.expect("feature", 6);
    if (in.integer<std::size_t>(f[1]) != i) in.fail("feature index out of order");
    dataset::FeatureSpec spec{f[2], dataset::FeatureKind::numeric(), i};
    if (f[3] == "categorical") {
      const int m = in.integer<int>(f[4]);
      if (m < 2) in.fail("categorical feature needs >= 2 modalities");
      spec.kind = dataset::FeatureKind::categorical(m);
    } else if (f[3] != "numeric") {
      in.fail("unknown feature kind '" + f[3] + "'");
    }
    features.push_back(std::move(spec));
    seen.push_back(in.codes(f[5]));
  }

  const auto node_count = in.integer<std::size_t>(in.expect("nodes", 2)[1]);
  if (node_count == 0) in.fail("tree needs at least one node");
  std::vector<Node> nodes(node_count);
  std::vector<int> parents(node_count, 0);
  for (std::size_t i = 0; i < node_count; ++i) {
    auto f = in.next();
    if (f.size() < 3 || f[0] != "node") in.fail("expected 'node'");
    if (in.integer<std::size_t>(f[1]) != i) in.fail("node index out of order");
    const auto attrs = in.attributes(f, 3);
    Node& node = nodes[i];
    node.n = in.integer<std::size_t>(in.need(attrs, "n"));
    node.depth = in.integer<int>(in.need(attrs, "depth"));
    const auto counts = in.codes(in.need(attrs, "counts"));
    if (counts.size() != 2 || counts[0] < 0 || counts[1] < 0) in.fail("counts needs two values");
    node.distribution.counts = {static_cast<std::size_t>(counts[0]), static_cast<std::size_t>(counts[1])};
    if (f[2] == "leaf") {
      node.leaf.predicted_class = in.integer<int>(in.need(attrs, "class"));
      node.leaf.positive_proportion = in.real(in.need(attrs, "positive"));
      node.leaf.mean = in.real(in.need(attrs, "mean"));
    } else if (f[2] == "internal") {
      SplitRule rule;
      rule.feature = in.integer<std::size_t>(in.need(attrs, "feature"));
      if (rule.feature >= features.size()) in.fail("split feature out of range");
      rule.feature_name = features[rule.feature].name;
      if (attrs.contains("threshold")) {
        if (!features[rule.feature].kind.is_numeric()) in.fail("threshold on a categorical feature");
        rule.test = NumericThreshold{in.real(attrs.at("threshold"))};
      } else {
        if (!features[rule.feature].kind.is_categorical()) in.fail("subset on a numeric feature");
        auto codes = in.codes(in.need(attrs, "subset"));
        if (codes.empty() || !std::is_sorted(codes.begin(), codes.end())) in.fail("subset must be sorted and non-empty");
        rule.test = CategoricalSubset{std::move(codes)};
      }
      node.rule = std::move(rule);
      node.left = in.integer<std::int64_t>(in.need(attrs, "left"));
      node.right = in.integer<std::int64_t>(in.need(attrs, "right"));
      for (std::int64_t child : {node.left, node.right}) {
        if (child <= static_cast<std::int64_t>(i) || child >= static_cast<std::int64_t>(node_count)) {
          in.fail("child index out of range");
        }
        ++parents[static_cast<std::size_t>(child)];
      }
    } else {
      in.fail("unknown node type '" + f[2] + "'");
    }
  }
  {
    const auto f = in.next();
    if (f.size() != 1 || f[0] != "end") in.fail("expected 'end'");
  }
  if (parents[0] != 0) in.fail("root has a parent");
  for (std::size_t i = 1; i < node_count; ++i) {
    if (parents[i] != 1) in.fail("node " + std::to_string(i) + " is not referenced exactly once");
  }
  for (const Node& node : nodes) {
    if (!node.is_leaf()) {
      const Node& l = nodes[static_cast<std::size_t>(node.left)];
      const Node& r = nodes[static_cast<std::size_t>(node.right)];
      if (l.n + r.n != node.n || l.n == 0 || r.n == 0) in.fail("child counts do not add up");
    }
  }
  return CartTree(std::move(features), std::move(seen), config, training_size, std::move(nodes));
}

}  // namespace cartcredit::cart
