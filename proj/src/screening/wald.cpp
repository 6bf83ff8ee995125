#include <cmath>
#include <future>
#include <sstream>

#include "cartcredit/csv.hpp"
#include "cartcredit/error.hpp"
#include "cartcredit/screening.hpp"

namespace cartcredit::screening {

double chi_square_sf_1df(double x) {
  if (!(x >= 0.0)) throw Error(ErrorKind::DomainError, "chi-square statistic must be >= 0");
  // std::erfc is accurate to a few ulp, well inside 1e-10 absolute.
  return std::erfc(std::sqrt(x / 2.0));
}

WaldRow wald_row(std::string variable, double b, double se, bool intercept) {
  if (!(se > 0.0) || !std::isfinite(b)) {
    throw Error(ErrorKind::DomainError, "Wald test of " + variable + " needs a finite B and SE > 0");
  }
  WaldRow row;
  row.variable = std::move(variable);
  row.b = b;
  row.se = se;
  row.intercept = intercept;
  if (std::isinf(se)) {
    row.wald = 0.0;
  } else {
    const double z = b / se;
    row.wald = z * z;
  }
  row.ddl = 1;
  row.sig = chi_square_sf_1df(row.wald);
  return row;
}

std::vector<WaldRow> wald_table(const LogisticFit& fit) {
  std::vector<WaldRow> rows;
  for (std::size_t j = 0; j < fit.names.size(); ++j) {
    const bool intercept = j + 1 == fit.names.size();
    rows.push_back(wald_row(fit.names[j], fit.coefficients[j], fit.standard_errors[j], intercept));
  }
  return rows;
}

std::vector<WaldRow> per_variable_wald(const dataset::Dataset& data,
                                       const std::vector<std::string>& variables,
                                       const LogisticOptions& options) {
  std::vector<std::future<LogisticFit>> fits;
  fits.reserve(variables.size());
  for (const auto& name : variables) {
    fits.push_back(std::async(std::launch::async, [&data, &options, name] {
      return fit_logistic(data, {name}, options);
    }));
  }
  std::vector<WaldRow> rows;
  for (std::size_t i = 0; i < fits.size(); ++i) {
    const LogisticFit fit = fits[i].get();
    rows.push_back(wald_row(variables[i], fit.coefficients[0], fit.standard_errors[0]));
  }
  return rows;
}

std::string format_wald_csv(const std::vector<WaldRow>& rows) {
  std::ostringstream out;
  csv::write_row(out, {"variable", "B", "SE", "wald", "ddl", "sig"});
  for (const auto& row : rows) {
    csv::write_row(out, {row.variable, csv::format_double(row.b), csv::format_double(row.se),
                         csv::format_double(row.wald), std::to_string(row.ddl),
                         csv::format_double(row.sig)});
  }
  return out.str();
}

}  // namespace cartcredit::screening
