#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "cartcredit/cart.hpp"
#include "cartcredit/error.hpp"
#include "oracles.hpp"

using namespace cartcredit;
using cart::CartConfig;
using dataset::ClassDistribution;
using dataset::Dataset;
using dataset::FeatureKind;
using dataset::Schema;

namespace {

ClassDistribution dist(std::size_t c0, std::size_t c1) {
  ClassDistribution d;
  d.counts = {c0, c1};
  return d;
}

Dataset make(const Schema& schema, std::vector<std::vector<double>> cols, std::vector<double> y) {
  return Dataset(schema, "TARGET", std::move(cols), std::move(y));
}

Schema numeric_schema(std::size_t k) {
  Schema s;
  for (std::size_t i = 0; i < k; ++i) s.push_back({"x" + std::to_string(i), FeatureKind::numeric(), i});
  return s;
}

}  // namespace

TEST(Gini, KnownValues) {
  EXPECT_EQ(cart::gini(dist(10, 0)), 0.0);
  EXPECT_EQ(cart::gini(dist(0, 7)), 0.0);
  EXPECT_EQ(cart::gini(dist(5, 5)), 0.5);
  EXPECT_DOUBLE_EQ(cart::gini(dist(30, 10)), 0.375);
  EXPECT_DOUBLE_EQ(cart::gini_complement_form(dist(30, 10)), 0.375);
}

TEST(Gini, EmptyDistributionThrows) {
  try {
    cart::gini(dist(0, 0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EmptyDistribution);
  }
}

TEST(Gini, BothFormsAgree) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 2000; ++i) {
    const auto d = dist(rng() % 1000, 1 + rng() % 1000);
    EXPECT_NEAR(cart::gini(d), cart::gini_complement_form(d), 1e-12);
  }
}

TEST(Gini, WeightedSplit) {
  EXPECT_DOUBLE_EQ(cart::split_gini(dist(30, 10), dist(10, 30)), 0.375);
}

TEST(Gini, ExactDecreaseMatchesRational) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 1000; ++i) {
    const auto l = dist(rng() % 50, 1 + rng() % 50);
    const auto r = dist(1 + rng() % 50, rng() % 50);
    const auto exact = cart::exact_decrease(l, r);
    const std::int64_t n = l.total() + r.total();
    const auto parent = oracle::gini(l.counts[0] + r.counts[0], l.counts[1] + r.counts[1]);
    const auto weighted =
        oracle::Rational(l.total(), n) * oracle::gini(l.counts[0], l.counts[1]) +
        oracle::Rational(r.total(), n) * oracle::gini(r.counts[0], r.counts[1]);
    const auto expected = parent - weighted;
    EXPECT_EQ(exact.value(), expected.to_double());
    EXPECT_EQ(static_cast<oracle::i128>(exact.numerator) * expected.den,
              expected.num * static_cast<oracle::i128>(exact.denominator));
  }
}

TEST(Split, FourRowFixture) {
  const auto schema = numeric_schema(1);
  std::vector<std::vector<double>> cols{{1, 2, 3, 4}};
  std::vector<double> y{0, 0, 1, 1};
  std::vector<std::size_t> rows{0, 1, 2, 3};
  const auto best = cart::best_split({cols, y, rows}, schema, CartConfig{});
  ASSERT_TRUE(best);
  EXPECT_EQ(std::get<cart::NumericThreshold>(best->rule.test).threshold, 2.5);
  EXPECT_EQ(best->decrease, 0.5);
}

TEST(Split, PureNodeHasNoSplit) {
  const auto schema = numeric_schema(1);
  std::vector<std::vector<double>> cols{{1, 2, 3}};
  std::vector<double> y{1, 1, 1};
  std::vector<std::size_t> rows{0, 1, 2};
  EXPECT_FALSE(cart::best_split({cols, y, rows}, schema, CartConfig{}));
}

TEST(Split, PartitionCount) {
  EXPECT_EQ(cart::categorical_partition_count(2), 1u);
  EXPECT_EQ(cart::categorical_partition_count(3), 3u);
  EXPECT_EQ(cart::categorical_partition_count(4), 7u);
}

TEST(Split, TieGoesToLowestFeature) {
  const auto schema = numeric_schema(2);
  std::vector<std::vector<double>> cols{{1, 2, 3, 4}, {1, 2, 3, 4}};
  std::vector<double> y{0, 0, 1, 1};
  std::vector<std::size_t> rows{0, 1, 2, 3};
  const auto best = cart::best_split({cols, y, rows}, schema, CartConfig{});
  ASSERT_TRUE(best);
  EXPECT_EQ(best->rule.feature, 0u);
}

TEST(Split, CategoricalLeftSetHoldsSmallestCode) {
  Schema schema{{"c", FeatureKind::categorical(3), 0}};
  std::vector<std::vector<double>> cols{{1, 1, 2, 2, 3, 3}};
  std::vector<double> y{1, 1, 0, 0, 1, 1};
  std::vector<std::size_t> rows{0, 1, 2, 3, 4, 5};
  const auto best = cart::best_split({cols, y, rows}, schema, CartConfig{});
  ASSERT_TRUE(best);
  const auto& subset = std::get<cart::CategoricalSubset>(best->rule.test);
  EXPECT_EQ(subset.codes, (std::vector<std::int64_t>{1, 3}));
  EXPECT_EQ(best->decrease, 4.0 / 9.0);
}

TEST(Split, AgreesWithBruteForce) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    const auto c = oracle::random_split_case(rng);
    std::vector<std::size_t> rows(c.target.size());
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
    const auto got = cart::best_split({c.columns, c.target, rows}, c.schema, CartConfig{});
    const auto want = oracle::brute_force_split(c.columns, c.target, c.schema);
    ASSERT_EQ(got.has_value(), want.has_value()) << "trial " << trial;
    if (!got) continue;
    EXPECT_EQ(got->decrease, want->decrease.to_double()) << "trial " << trial;
    EXPECT_EQ(got->rule.feature, want->feature) << "trial " << trial;
    if (want->threshold) {
      EXPECT_EQ(std::get<cart::NumericThreshold>(got->rule.test).threshold, *want->threshold);
    } else {
      EXPECT_EQ(std::get<cart::CategoricalSubset>(got->rule.test).codes, want->codes);
    }
  }
}

TEST(Config, MinNodeSizeAboveFiveNeedsOptIn) {
  CartConfig c;
  c.min_node_size = 6;
  EXPECT_THROW(c.validate(), Error);
  c.allow_large_min_node_size = true;
  EXPECT_NO_THROW(c.validate());
  c.min_node_size = 0;
  EXPECT_THROW(c.validate(), Error);
}

TEST(Leaf, TieGoesToClassZero) {
  const auto leaf = cart::assign_leaf(dist(3, 3));
  EXPECT_EQ(leaf.predicted_class, 0);
  EXPECT_EQ(leaf.positive_proportion, 0.5);
}

class GrownTree : public ::testing::Test {
 protected:
  void SetUp() override {
    std::mt19937_64 rng(99);
    Schema schema{{"a", FeatureKind::numeric(), 0},
                  {"b", FeatureKind::numeric(), 1},
                  {"g", FeatureKind::categorical(4), 2}};
    std::vector<std::vector<double>> cols(3, std::vector<double>(300));
    std::vector<double> y(300);
    std::uniform_real_distribution<double> u(0.0, 10.0);
    for (std::size_t i = 0; i < 300; ++i) {
      cols[0][i] = u(rng);
      cols[1][i] = u(rng);
      cols[2][i] = static_cast<double>(1 + rng() % 4);
      const bool base = cols[0][i] < 4.0 || (cols[2][i] == 2.0 && cols[1][i] > 5.0);
      y[i] = (base != (rng() % 10 == 0)) ? 1.0 : 0.0;
    }
    data_ = std::make_unique<Dataset>(schema, "TARGET", std::move(cols), std::move(y));
  }

  std::unique_ptr<Dataset> data_;
};

TEST_F(GrownTree, Deterministic) {
  const auto a = cart::grow(*data_, {});
  const auto b = cart::grow(*data_, {});
  EXPECT_EQ(a, b);
  EXPECT_EQ(cart::serialize(a), cart::serialize(b));
}

TEST_F(GrownTree, ChildrenPartitionParents) {
  const auto tree = cart::grow(*data_, {});
  for (const auto& node : tree.nodes()) {
    if (node.is_leaf()) continue;
    const auto& l = tree.nodes()[node.left];
    const auto& r = tree.nodes()[node.right];
    EXPECT_EQ(l.n + r.n, node.n);
    EXPECT_EQ(l.distribution.counts[1] + r.distribution.counts[1], node.distribution.counts[1]);
    EXPECT_EQ(l.depth, node.depth + 1);
    EXPECT_GE(node.n, 5u);
  }
}

TEST_F(GrownTree, PredictionsMatchLeafDistributions) {
  const auto tree = cart::grow(*data_, {});
  std::vector<std::size_t> hits(tree.nodes().size(), 0);
  const auto predictions = tree.predict_all(*data_);
  for (const auto& p : predictions) {
    ASSERT_TRUE(tree.nodes()[p.leaf].is_leaf());
    ++hits[p.leaf];
    EXPECT_EQ(p.score, tree.nodes()[p.leaf].leaf.positive_proportion);
  }
  for (std::size_t i = 0; i < hits.size(); ++i) {
    if (tree.nodes()[i].is_leaf()) EXPECT_EQ(hits[i], tree.nodes()[i].n);
  }
}

TEST_F(GrownTree, MonotoneTransformKeepsPartition) {
  const auto tree = cart::grow(*data_, {});
  std::vector<std::vector<double>> cols;
  for (std::size_t f = 0; f < data_->feature_count(); ++f) {
    const auto c = data_->column(f);
    cols.emplace_back(c.begin(), c.end());
  }
  for (double& v : cols[0]) v = std::exp(v) * 3.0 + 1.0;
  for (double& v : cols[1]) v = v * v * v;
  const auto t = data_->target();
  const Dataset moved(data_->schema(), "TARGET", cols, std::vector<double>(t.begin(), t.end()));
  const auto other = cart::grow(moved, {});
  ASSERT_EQ(tree.nodes().size(), other.nodes().size());
  for (std::size_t i = 0; i < tree.nodes().size(); ++i) {
    EXPECT_EQ(tree.nodes()[i].distribution, other.nodes()[i].distribution);
    EXPECT_EQ(tree.nodes()[i].left, other.nodes()[i].left);
  }
}

TEST_F(GrownTree, MaxDepthZeroGivesSingleLeaf) {
  CartConfig c;
  c.max_depth = 0;
  const auto tree = cart::grow(*data_, {}, c);
  EXPECT_EQ(tree.nodes().size(), 1u);
  EXPECT_TRUE(tree.root().is_leaf());
}

TEST_F(GrownTree, MinGiniDecreaseShrinksTree) {
  CartConfig c;
  c.min_gini_decrease = 0.05;
  const auto pruned = cart::grow(*data_, {}, c);
  const auto full = cart::grow(*data_, {});
  EXPECT_LT(pruned.nodes().size(), full.nodes().size());
}

TEST_F(GrownTree, SerializationRoundTrip) {
  const auto tree = cart::grow(*data_, {});
  const std::string text = cart::serialize(tree);
  EXPECT_EQ(cart::deserialize(text), tree);
  EXPECT_EQ(cart::serialize(cart::deserialize(text)), text);
}

TEST_F(GrownTree, TruncatedModelIsMalformed) {
  const std::string text = cart::serialize(cart::grow(*data_, {}));
  try {
    cart::deserialize(text.substr(0, text.size() / 2));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::MalformedDocument);
  }
}

TEST_F(GrownTree, WrongFormatVersion) {
  std::string text = cart::serialize(cart::grow(*data_, {}));
  text.replace(text.find("cart-model/1"), 12, "cart-model/9");
  try {
    cart::deserialize(text);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::VersionMismatch);
  }
}

TEST_F(GrownTree, DotHasOneNodePerTreeNode) {
  const auto tree = cart::grow(*data_, {});
  const std::string dot = cart::export_dot(tree);
  std::size_t edges = 0;
  std::size_t labels = 0;
  for (std::size_t pos = 0; (pos = dot.find("->", pos)) != std::string::npos; ++pos) ++edges;
  for (std::size_t pos = 0; (pos = dot.find("[label=", pos)) != std::string::npos; ++pos) ++labels;
  EXPECT_EQ(edges, tree.nodes().size() - 1);
  EXPECT_EQ(labels, tree.nodes().size() + edges);
  EXPECT_EQ(dot.rfind("digraph cart {", 0), 0u);
}

TEST_F(GrownTree, UnseenCategoryRoutesRight) {
  const auto tree = cart::grow(*data_, {"g", "a"});
  bool saw_category_split = false;
  for (const auto& node : tree.nodes()) {
    if (node.rule && std::holds_alternative<cart::CategoricalSubset>(node.rule->test)) {
      saw_category_split = true;
    }
  }
  ASSERT_TRUE(saw_category_split);
  std::vector<double> values{9.0, 5.0};  // code 9 never seen
  const auto p = tree.predict(values);
  EXPECT_TRUE(p.unseen_category);
}

TEST(Grow, RejectsUnknownFeature) {
  const Dataset d(numeric_schema(1), "TARGET", {{1, 2}}, {0, 1});
  EXPECT_THROW(cart::grow(d, {"nope"}), Error);
}

TEST(Grow, BindChecksSchema) {
  const Dataset d(numeric_schema(1), "TARGET", {{1, 2, 3, 4}}, {0, 0, 1, 1});
  const auto tree = cart::grow(d, {});
  EXPECT_EQ(tree.bind(numeric_schema(2)), (std::vector<std::size_t>{0}));
  Schema wrong{{"x0", FeatureKind::categorical(2), 0}};
  EXPECT_THROW(tree.bind(wrong), Error);
}
