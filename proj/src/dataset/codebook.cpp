#include <charconv>
#include <fstream>
#include <sstream>

#include "cartcredit/dataset.hpp"
#include "cartcredit/error.hpp"

namespace cartcredit::dataset {

void CodeBook::add(const std::string& feature, const std::string& label, std::int64_t code) {
  auto it = codes_.find(feature);
  if (it == codes_.end()) {
    order_.push_back(feature);
    it = codes_.emplace(feature, FeatureCodes{}).first;
  }
  FeatureCodes& codes = it->second;
  if (codes.by_label.contains(label)) {
    throw Error(ErrorKind::InvalidConfig,
                "duplicate label '" + label + "' for feature " + feature);
  }
  if (codes.by_code.contains(code)) {
    throw Error(ErrorKind::InvalidConfig, "code " + std::to_string(code) +
                                              " used twice for feature " + feature);
  }
  codes.entries.emplace_back(label, code);
  codes.by_label.emplace(label, code);
  codes.by_code.emplace(code, label);
}

bool CodeBook::has_feature(std::string_view feature) const {
  return codes_.find(feature) != codes_.end();
}

std::optional<std::int64_t> CodeBook::encode(std::string_view feature,
                                             std::string_view label) const {
  auto it = codes_.find(feature);
  if (it == codes_.end()) return std::nullopt;
  auto found = it->second.by_label.find(label);
  if (found == it->second.by_label.end()) return std::nullopt;
  return found->second;
}

std::optional<std::string> CodeBook::decode(std::string_view feature, std::int64_t code) const {
  auto it = codes_.find(feature);
  if (it == codes_.end()) return std::nullopt;
  auto found = it->second.by_code.find(code);
  if (found == it->second.by_code.end()) return std::nullopt;
  return found->second;
}

std::vector<std::string> CodeBook::features() const { return order_; }

const std::vector<std::pair<std::string, std::int64_t>>& CodeBook::entries(
    std::string_view feature) const {
  auto it = codes_.find(feature);
  if (it == codes_.end()) {
    throw Error(ErrorKind::InvalidConfig, "codebook has no feature " + std::string(feature));
  }
  return it->second.entries;
}

std::size_t CodeBook::modality_count(std::string_view feature) const {
  auto it = codes_.find(feature);
  return it == codes_.end() ? 0 : it->second.entries.size();
}

CodeBook CodeBook::credit_reference() {
  CodeBook book;
  book.add("NAME_CONTRACT_TYPE", "Cash loans", 1);
  book.add("NAME_CONTRACT_TYPE", "Revolving loans", 0);
  book.add("CODE_GENDER", "F", 1);
  book.add("CODE_GENDER", "M", 0);
  book.add("FLAG_OWN_CAR", "Y", 1);
  book.add("FLAG_OWN_CAR", "N", 0);
  book.add("NAME_INCOME_TYPE", "State servant", 1);
  book.add("NAME_INCOME_TYPE", "Working", 2);
  book.add("NAME_INCOME_TYPE", "Commercial associate", 3);
  book.add("NAME_INCOME_TYPE", "Pensioner", 4);
  book.add("NAME_FAMILY_STATUS", "Married", 1);
  book.add("NAME_FAMILY_STATUS", "Single / not married", 2);
  book.add("NAME_FAMILY_STATUS", "Civil marriage", 3);
  book.add("NAME_FAMILY_STATUS", "Separated", 4);
  book.add("NAME_FAMILY_STATUS", "Widow", 5);
  book.add("NAME_HOUSING_TYPE", "House / apartment", 1);
  book.add("NAME_HOUSING_TYPE", "With parents", 2);
  book.add("NAME_HOUSING_TYPE", "Municipal apartment", 3);
  book.add("NAME_HOUSING_TYPE", "Office apartment", 4);
  book.add("NAME_HOUSING_TYPE", "Co-op apartment", 5);
  book.add("NAME_HOUSING_TYPE", "Rented apartment", 6);
  book.add("NAME_EDUCATION_TYPE", "Higher education", 1);
  book.add("NAME_EDUCATION_TYPE", "Incomplete higher", 2);
  book.add("NAME_EDUCATION_TYPE", "Secondary / secondary special", 3);
  book.add("NAME_EDUCATION_TYPE", "Lower secondary", 4);
  return book;
}

CodeBook CodeBook::read(const std::filesystem::path& path) {
  const csv::Table table = csv::read_file(path);
  const std::vector<std::string> expected{"feature", "label", "code"};
  if (table.header != expected) {
    throw Error(ErrorKind::HeaderMismatch,
                path.string() + ": codebook header must be feature,label,code");
  }
  CodeBook book;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    if (row.size() != 3) {
      throw Error(ErrorKind::RaggedRow,
                  path.string() + ": codebook line " + std::to_string(table.lines[i]));
    }
    std::int64_t code = 0;
    const std::string& text = row[2];
    auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), code);
    if (ec != std::errc() || end != text.data() + text.size()) {
      throw Error(ErrorKind::MalformedDocument, path.string() + ": line " +
                                                    std::to_string(table.lines[i]) +
                                                    ": code '" + text + "' is not an integer");
    }
    book.add(row[0], row[1], code);
  }
  return book;
}

std::string CodeBook::to_text() const {
  std::ostringstream out;
  csv::write_row(out, {"feature", "label", "code"});
  for (const auto& feature : order_) {
    for (const auto& [label, code] : codes_.at(feature).entries) {
      csv::write_row(out, {feature, label, std::to_string(code)});
    }
  }
  return out.str();
}

void CodeBook::write(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::MissingFile, "cannot write " + path.string());
  out << to_text();
}

}  // namespace cartcredit::dataset
