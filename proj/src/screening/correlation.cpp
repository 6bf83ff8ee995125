#include <algorithm>
#include <cmath>
#include <sstream>

#include "cartcredit/csv.hpp"
#include "cartcredit/error.hpp"
#include "cartcredit/kernels.hpp"
#include "cartcredit/screening.hpp"

namespace cartcredit::screening {

CorrelationMatrix::CorrelationMatrix(std::vector<std::string> names, std::vector<double> values)
    : names_(std::move(names)), values_(std::move(values)) {
  if (values_.size() != names_.size() * names_.size()) {
    throw Error(ErrorKind::DomainError, "correlation matrix must be square");
  }
}

std::size_t CorrelationMatrix::index_of(std::string_view name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) {
    throw Error(ErrorKind::SchemaMismatch,
                "correlation matrix has no variable " + std::string(name));
  }
  return static_cast<std::size_t>(it - names_.begin());
}

double CorrelationMatrix::at(std::string_view a, std::string_view b) const {
  return (*this)(index_of(a), index_of(b));
}

namespace {

struct Moments {
  double mean;
  double ss;  // Σ (x - mean)^2
};

Moments moments(std::span<const double> x) {
  const double mean = kernels::sum(x) / static_cast<double>(x.size());
  return {mean, kernels::centered_dot(x, mean, x, mean)};
}

double correlate(std::span<const double> a, const Moments& ma, std::span<const double> b,
                 const Moments& mb) {
  const double r = kernels::centered_dot(a, ma.mean, b, mb.mean) / std::sqrt(ma.ss * mb.ss);
  return std::clamp(r, -1.0, 1.0);
}

}  // namespace

double pearson(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.empty()) {
    throw Error(ErrorKind::DomainError, "pearson needs two non-empty columns of equal length");
  }
  const Moments ma = moments(a);
  const Moments mb = moments(b);
  if (!(ma.ss > 0.0) || !(mb.ss > 0.0)) throw Error(ErrorKind::ZeroVariance, "constant column");
  return correlate(a, ma, b, mb);
}

CorrelationMatrix pearson_matrix(const dataset::Dataset& data,
                                 const std::vector<std::string>& variables) {
  if (data.size() == 0) throw Error(ErrorKind::EmptyDataset, "no rows to correlate");
  const std::size_t k = variables.size();
  std::vector<std::span<const double>> columns;
  std::vector<Moments> stats;
  for (const auto& name : variables) {
    columns.push_back(data.column(name));
    stats.push_back(moments(columns.back()));
    // Population and sample denominators cancel in r; only ss > 0 matters.
    if (!(stats.back().ss > 0.0)) throw Error(ErrorKind::ZeroVariance, name);
  }
  std::vector<double> values(k * k, 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    values[i * k + i] = 1.0;
    for (std::size_t j = i + 1; j < k; ++j) {
      const double r = correlate(columns[i], stats[i], columns[j], stats[j]);
      values[i * k + j] = r;
      values[j * k + i] = r;
    }
  }
  return CorrelationMatrix(variables, std::move(values));
}

std::string format_correlation_csv(const CorrelationMatrix& corr) {
  std::ostringstream out;
  std::vector<std::string> fields{""};
  fields.insert(fields.end(), corr.names().begin(), corr.names().end());
  csv::write_row(out, fields);
  for (std::size_t i = 0; i < corr.size(); ++i) {
    fields.assign({corr.names()[i]});
    for (std::size_t j = 0; j < corr.size(); ++j) fields.push_back(csv::format_double(corr(i, j)));
    csv::write_row(out, fields);
  }
  return out.str();
}

}  // namespace cartcredit::screening
