#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "cartcredit/csv.hpp"
#include "cartcredit/dataset.hpp"
#include "cartcredit/error.hpp"

using namespace cartcredit;
using namespace cartcredit::dataset;

namespace {

Schema mixed_schema() {
  return {{"AMT_INCOME_TOTAL", FeatureKind::numeric(), 0},
          {"CODE_GENDER", FeatureKind::categorical(2), 1},
          {"NAME_INCOME_TYPE", FeatureKind::categorical(4), 2}};
}

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorKind::InvalidConfig;
}

Dataset numeric_data(std::vector<double> x, std::vector<double> y) {
  Schema s{{"x", FeatureKind::numeric(), 0}};
  return Dataset(s, "TARGET", {std::move(x)}, std::move(y));
}

}  // namespace

TEST(Csv, QuotedFieldsAndBom) {
  const auto t = csv::parse("\xEF\xBB\xBF" "a,b\n\"x, y\",\"he said \"\"hi\"\"\"\n\n1,2\n");
  EXPECT_EQ(t.header, (std::vector<std::string>{"a", "b"}));
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.rows[0][0], "x, y");
  EXPECT_EQ(t.rows[0][1], "he said \"hi\"");
  EXPECT_EQ(kind_of([] { csv::parse("a\n\"open\n"); }), ErrorKind::MalformedDocument);
}

TEST(Csv, EscapeRoundTrip) {
  for (std::string s : {"plain", "with,comma", "quote\"inside", ""}) {
    EXPECT_EQ(csv::split_line(csv::escape(s)), (std::vector<std::string>{s}));
  }
}

TEST(Load, ColumnsInAnyOrder) {
  const auto t = csv::parse("TARGET,NAME_INCOME_TYPE,CODE_GENDER,AMT_INCOME_TOTAL\n1,Working,F,135000\n");
  const auto raw = parse_csv(t, mixed_schema(), "TARGET");
  ASSERT_EQ(raw.size(), 1u);
  EXPECT_EQ(std::get<double>(raw.rows[0][0]), 135000.0);
  EXPECT_EQ(std::get<std::string>(raw.rows[0][2]), "Working");
  EXPECT_EQ(std::get<double>(raw.rows[0][3]), 1.0);
}

TEST(Load, HeaderMismatch) {
  const auto missing = csv::parse("AMT_INCOME_TOTAL,CODE_GENDER,TARGET\n1,F,1\n");
  EXPECT_EQ(kind_of([&] { parse_csv(missing, mixed_schema(), "TARGET"); }), ErrorKind::HeaderMismatch);
  const auto extra = csv::parse("AMT_INCOME_TOTAL,CODE_GENDER,NAME_INCOME_TYPE,TARGET,EXTRA\n1,F,Working,1,2\n");
  EXPECT_EQ(kind_of([&] { parse_csv(extra, mixed_schema(), "TARGET"); }), ErrorKind::HeaderMismatch);
}

TEST(Load, RaggedRow) {
  const auto t = csv::parse("AMT_INCOME_TOTAL,CODE_GENDER,NAME_INCOME_TYPE,TARGET\n1,F\n");
  EXPECT_EQ(kind_of([&] { parse_csv(t, mixed_schema(), "TARGET"); }), ErrorKind::RaggedRow);
}

TEST(Load, MissingMarkers) {
  const auto t = csv::parse(
      "AMT_INCOME_TOTAL,CODE_GENDER,NAME_INCOME_TYPE,TARGET\n"
      ",F,Working,1\n"
      "NA,M,Pensioner,0\n"
      "100,N/A,Working,1\n"
      "abc,F,,0\n"
      "200,M,Working,1\n");
  const auto raw = parse_csv(t, mixed_schema(), "TARGET");
  EXPECT_EQ(raw.missing_count(), 5u);
  const auto data = apply_codebook(raw, CodeBook::credit_reference());
  EXPECT_TRUE(data.has_missing());
  const auto cleaned = clean(data, {OutlierRule::Method::Off});
  EXPECT_EQ(cleaned.data.size(), 1u);
  EXPECT_EQ(cleaned.log.size(), 4u);
  EXPECT_EQ(cleaned.log[0].reason, "missing:AMT_INCOME_TOTAL");
  EXPECT_EQ(cleaned.log[2].reason, "missing:CODE_GENDER");
}

TEST(CodeBook, ReferenceCoding) {
  const auto book = CodeBook::credit_reference();
  EXPECT_EQ(book.features().size(), 7u);
  EXPECT_EQ(book.encode("NAME_CONTRACT_TYPE", "Cash loans"), 1);
  EXPECT_EQ(book.encode("NAME_CONTRACT_TYPE", "Revolving loans"), 0);
  EXPECT_EQ(book.encode("CODE_GENDER", "F"), 1);
  EXPECT_EQ(book.encode("FLAG_OWN_CAR", "N"), 0);
  EXPECT_EQ(book.encode("NAME_INCOME_TYPE", "Pensioner"), 4);
  EXPECT_EQ(book.encode("NAME_FAMILY_STATUS", "Widow"), 5);
  EXPECT_EQ(book.encode("NAME_HOUSING_TYPE", "Rented apartment"), 6);
  EXPECT_EQ(book.encode("NAME_EDUCATION_TYPE", "Lower secondary"), 4);
  EXPECT_EQ(book.decode("NAME_HOUSING_TYPE", 2), "With parents");
  EXPECT_EQ(book.modality_count("NAME_HOUSING_TYPE"), 6u);
  EXPECT_FALSE(book.encode("CODE_GENDER", "X"));
}

TEST(CodeBook, DuplicatesRejected) {
  CodeBook book;
  book.add("f", "a", 1);
  EXPECT_EQ(kind_of([&] { book.add("f", "a", 2); }), ErrorKind::InvalidConfig);
  EXPECT_EQ(kind_of([&] { book.add("f", "b", 1); }), ErrorKind::InvalidConfig);
}

TEST(CodeBook, FileRoundTrip) {
  const auto path = std::filesystem::temp_directory_path() / "cartcredit_codebook_test.csv";
  const auto book = CodeBook::credit_reference();
  book.write(path);
  const auto back = CodeBook::read(path);
  EXPECT_EQ(back.to_text(), book.to_text());
  std::filesystem::remove(path);
}

TEST(CodeBook, UnknownLabelNamesTheCell) {
  const auto t = csv::parse("AMT_INCOME_TOTAL,CODE_GENDER,NAME_INCOME_TYPE,TARGET\n1,F,Working,1\n2,F,Student,0\n");
  const auto raw = parse_csv(t, mixed_schema(), "TARGET");
  try {
    apply_codebook(raw, CodeBook::credit_reference());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::UnknownLabel);
    const std::string msg = e.what();
    EXPECT_NE(msg.find("NAME_INCOME_TYPE"), std::string::npos);
    EXPECT_NE(msg.find("Student"), std::string::npos);
  }
}

TEST(CodeBook, InferredCodes) {
  const auto t = csv::parse("AMT_INCOME_TOTAL,CODE_GENDER,NAME_INCOME_TYPE,TARGET\n"
                            "1,M,Working,1\n2,F,Pensioner,0\n3,M,Working,0\n4,F,State servant,1\n");
  const auto book = CodeBook::infer(parse_csv(t, mixed_schema(), "TARGET"));
  EXPECT_EQ(book.encode("CODE_GENDER", "M"), 0);
  EXPECT_EQ(book.encode("CODE_GENDER", "F"), 1);
  EXPECT_EQ(book.encode("NAME_INCOME_TYPE", "Working"), 1);
  EXPECT_EQ(book.encode("NAME_INCOME_TYPE", "Pensioner"), 2);
  EXPECT_EQ(book.encode("NAME_INCOME_TYPE", "State servant"), 3);
}

TEST(Schema, FileRoundTrip) {
  const auto path = std::filesystem::temp_directory_path() / "cartcredit_schema_test.csv";
  write_schema(mixed_schema(), path);
  EXPECT_EQ(read_schema(path), mixed_schema());
  std::filesystem::remove(path);
}

TEST(Clean, TenRowsNoOutliers) {
  const auto d = numeric_data({1, 2, 3, 4, 5, 6, 7, 8, 9, 10}, {0, 1, 0, 1, 0, 1, 0, 1, 0, 1});
  const auto r = clean(d);
  EXPECT_EQ(r.data, d);
  EXPECT_TRUE(r.log.empty());
}

TEST(Clean, PlantedOutlierAgainstHandFences) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(10.0, 20.0);
  std::vector<double> x(100);
  std::vector<double> y(100);
  for (std::size_t i = 0; i < 100; ++i) {
    x[i] = u(rng);
    y[i] = static_cast<double>(i % 2);
  }
  auto by_value = x;
  std::nth_element(by_value.begin(), by_value.begin() + 50, by_value.end());
  x[42] = 100.0 * by_value[50];
  auto sorted = x;
  std::sort(sorted.begin(), sorted.end());
  // Linear interpolation at h = (n - 1) q.
  auto q = [&](double p) {
    const double h = 99.0 * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    return sorted[lo] + (h - lo) * (sorted[lo + 1] - sorted[lo]);
  };
  const double iqr = q(0.75) - q(0.25);
  EXPECT_GT(x[42], q(0.75) + 1.5 * iqr);
  for (std::size_t i = 0; i < 100; ++i) {
    if (i != 42) EXPECT_TRUE(x[i] >= q(0.25) - 1.5 * iqr && x[i] <= q(0.75) + 1.5 * iqr);
  }
  EXPECT_EQ(quantile_sorted(sorted, 0.25), q(0.25));

  const auto r = clean(numeric_data(x, y));
  ASSERT_EQ(r.log.size(), 1u);
  EXPECT_EQ(r.log[0].row, 42u);
  EXPECT_EQ(r.log[0].reason, "outlier:x");
  EXPECT_EQ(r.data.size(), 99u);
}

TEST(Clean, Idempotent) {
  std::mt19937_64 rng(4);
  std::lognormal_distribution<double> heavy(0.0, 1.2);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> x(300), y(300);
    for (std::size_t i = 0; i < 300; ++i) {
      x[i] = heavy(rng);
      y[i] = static_cast<double>(rng() % 2);
    }
    for (auto method : {OutlierRule::Method::Iqr, OutlierRule::Method::ZScore}) {
      const auto once = clean(numeric_data(x, y), {method});
      const auto twice = clean(once.data, {method});
      EXPECT_EQ(twice.data, once.data);
      EXPECT_TRUE(twice.log.empty());
    }
  }
}

TEST(Clean, EverythingMissing) {
  const auto d = numeric_data({std::nan(""), std::nan("")}, {0, 1});
  EXPECT_EQ(kind_of([&] { clean(d); }), ErrorKind::EmptyResult);
}

TEST(Distribution, CountsAndErrors) {
  const auto d = numeric_data({1, 2, 3, 4}, {1, 0, 1, 1});
  const auto dist = class_distribution(d);
  EXPECT_EQ(dist.counts[0], 1u);
  EXPECT_EQ(dist.counts[1], 3u);
  EXPECT_EQ(dist.proportion(1), 0.75);
  EXPECT_EQ(kind_of([] { class_distribution(numeric_data({}, {})); }), ErrorKind::EmptyDataset);
  EXPECT_EQ(kind_of([] { class_distribution(numeric_data({1}, {2})); }), ErrorKind::DomainError);
}

TEST(Holdout, DeterministicPartition) {
  std::vector<double> x(50), y(50);
  for (int i = 0; i < 50; ++i) {
    x[i] = i;
    y[i] = i % 2;
  }
  const auto d = numeric_data(x, y);
  const auto [train, test] = holdout_split(d, 0.2, 5);
  EXPECT_EQ(test.size(), 10u);
  EXPECT_EQ(train.size(), 40u);
  const auto again = holdout_split(d, 0.2, 5);
  EXPECT_EQ(again.second, test);
  std::vector<double> all;
  for (double v : train.column(0)) all.push_back(v);
  for (double v : test.column(0)) all.push_back(v);
  std::sort(all.begin(), all.end());
  EXPECT_EQ(all, x);
}

TEST(Encoded, CsvRoundTrip) {
  Schema s{{"x", FeatureKind::numeric(), 0}, {"g", FeatureKind::categorical(3), 1}};
  const Dataset d(s, "TARGET", {{0.1, 1e-300, 12345.678}, {1, 2, 3}}, {0, 1, 1});
  const auto path = std::filesystem::temp_directory_path() / "cartcredit_encoded_test.csv";
  write_csv(d, path);
  EXPECT_EQ(load_encoded(path, s, "TARGET"), d);
  std::filesystem::remove(path);
}
