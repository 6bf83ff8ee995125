#include <cstdio>
#include <sstream>

#include "cartcredit/cart.hpp"

namespace cartcredit::cart {
namespace {

std::string short_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string dot_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  return out;
}

std::string counts(const Node& node) {
  return std::to_string(node.distribution.counts[0]) + "/" + std::to_string(node.distribution.counts[1]);
}

std::string leaf_summary(const Node& node, Mode mode) {
  if (mode == Mode::Regression) return "mean " + short_number(node.leaf.mean);
  return "class " + std::to_string(node.leaf.predicted_class) + ", p1 = " +
         short_number(node.leaf.positive_proportion);
}

void outline(const CartTree& tree, std::size_t index, int indent, const std::string& edge,
             std::ostringstream& out) {
  const Node& node = tree.nodes()[index];
  out << std::string(static_cast<std::size_t>(indent) * 2, ' ') << edge << "node " << index << ": ";
  if (node.is_leaf()) {
    out << "leaf " << leaf_summary(node, tree.config().mode);
  } else {
    out << node.rule->describe();
  }
  out << " [n=" << node.n;
  if (tree.config().mode == Mode::Classification) out << ", counts 0/1 = " << counts(node);
  out << "]\n";
  if (!node.is_leaf()) {
    outline(tree, static_cast<std::size_t>(node.left), indent + 1, "True -> ", out);
    outline(tree, static_cast<std::size_t>(node.right), indent + 1, "False -> ", out);
  }
}

}  // namespace

std::string SplitRule::describe() const {
  if (const auto* t = std::get_if<NumericThreshold>(&test)) {
    return feature_name + " <= " + short_number(t->threshold);
  }
  std::string set;
  for (auto code : std::get<CategoricalSubset>(test).codes) {
    if (!set.empty()) set += ", ";
    set += std::to_string(code);
  }
  return feature_name + " in {" + set + "}";
}

std::string export_dot(const CartTree& tree) {
  std::ostringstream out;
  out << "digraph cart {\n";
  out << "  node [shape=box, fontname=\"Helvetica\"];\n";
  const Mode mode = tree.config().mode;
  for (std::size_t i = 0; i < tree.nodes().size(); ++i) {
    const Node& node = tree.nodes()[i];
    std::string label = "n = " + std::to_string(node.n);
    if (mode == Mode::Classification) label += "\\ncounts 0/1 = " + counts(node);
    label += "\\n";
    label += node.is_leaf() ? leaf_summary(node, mode) : dot_escape(node.rule->describe());
    out << "  n" << i << " [label=\"" << label << "\"";
    if (node.is_leaf()) out << ", style=rounded";
    out << "];\n";
  }
  for (std::size_t i = 0; i < tree.nodes().size(); ++i) {
    const Node& node = tree.nodes()[i];
    if (node.is_leaf()) continue;
    out << "  n" << i << " -> n" << node.left << " [label=\"True\"];\n";
    out << "  n" << i << " -> n" << node.right << " [label=\"False\"];\n";
  }
  out << "}\n";
  return out.str();
}

std::string export_text(const CartTree& tree) {
  std::ostringstream out;
  outline(tree, 0, 0, "", out);
  return out.str();
}

}  // namespace cartcredit::cart
