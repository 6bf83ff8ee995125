#pragma once

// Variable screening: a logistic fit provides per-variable Wald tests,
// non-significant variables are dropped, then one member of every strongly
// correlated pair.

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cartcredit/dataset.hpp"

namespace cartcredit::screening {

inline constexpr std::string_view kInterceptName = "Constant";

struct LogisticOptions {
  int max_iter = 50;
  double tol = 1e-8;
  // |B| above this bound is reported as (quasi-)separation.
  double separation_bound = 15.0;
};

struct LogisticFit {
  // Variable names followed by kInterceptName; coefficients and
  // standard_errors share this order.
  std::vector<std::string> names;
  std::vector<double> coefficients;
  std::vector<double> standard_errors;
  int iterations = 0;
  bool converged = false;
  bool separation = false;
  double log_likelihood = 0.0;

  std::size_t variable_count() const { return names.empty() ? 0 : names.size() - 1; }
  double intercept() const { return coefficients.back(); }
};

// Newton/IRLS maximum likelihood for a logit model with intercept.
// Converged when max |ΔB| < tol. Standard errors are the square roots of
// the diagonal of the inverse information matrix at the final estimate.
// Throws Error{Singular} for a non-invertible information matrix (constant
// or collinear columns), Error{DomainError} for a non-binary target or
// n <= variables + 1. Non-convergence and separation are reported through
// the returned flags.
LogisticFit fit_logistic(const dataset::Dataset& data, const std::vector<std::string>& variables,
                         const LogisticOptions& options = {});

// Same fit on bare columns.
LogisticFit fit_logistic(std::span<const std::vector<double>> columns, std::span<const double> y,
                         const std::vector<std::string>& names,
                         const LogisticOptions& options = {});

// Bernoulli log-likelihood and its gradient with respect to
// (B_1..B_p, intercept), on the original (unscaled) columns.
double log_likelihood(std::span<const std::vector<double>> columns, std::span<const double> y,
                      std::span<const double> coefficients);
std::vector<double> log_likelihood_gradient(std::span<const std::vector<double>> columns,
                                            std::span<const double> y,
                                            std::span<const double> coefficients);

struct WaldRow {
  std::string variable;
  double b = 0.0;
  double se = 0.0;
  double wald = 0.0;
  int ddl = 1;
  double sig = 1.0;
  bool intercept = false;
};

// P(chi-square with 1 degree of freedom > x) = erfc(sqrt(x / 2)).
// Throws Error{DomainError} for x < 0 or NaN.
double chi_square_sf_1df(double x);

// Throws Error{DomainError} when se <= 0.
WaldRow wald_row(std::string variable, double b, double se, bool intercept = false);
std::vector<WaldRow> wald_table(const LogisticFit& fit);

// One single-variable fit per variable (each with its own intercept); rows
// are returned in the order of `variables`.
std::vector<WaldRow> per_variable_wald(const dataset::Dataset& data,
                                       const std::vector<std::string>& variables,
                                       const LogisticOptions& options = {});

// `variable,B,SE,wald,ddl,sig`
std::string format_wald_csv(const std::vector<WaldRow>& rows);

class CorrelationMatrix {
 public:
  CorrelationMatrix(std::vector<std::string> names, std::vector<double> values);

  const std::vector<std::string>& names() const { return names_; }
  std::size_t size() const { return names_.size(); }
  double operator()(std::size_t i, std::size_t j) const { return values_[i * names_.size() + j]; }
  // Throws Error{SchemaMismatch} for an unknown name.
  double at(std::string_view a, std::string_view b) const;
  std::size_t index_of(std::string_view name) const;

 private:
  std::vector<std::string> names_;
  std::vector<double> values_;
};

// Pearson r with population moments; integer codes of categorical features
// are used as numbers. Throws Error{ZeroVariance}.
CorrelationMatrix pearson_matrix(const dataset::Dataset& data,
                                 const std::vector<std::string>& variables);
double pearson(std::span<const double> a, std::span<const double> b);

// Square CSV with a header row and a leading name column.
std::string format_correlation_csv(const CorrelationMatrix& corr);

struct Dropped {
  enum class Reason { NotSignificant, Correlated };
  std::string variable;
  Reason reason = Reason::NotSignificant;
  double sig = 0.0;        // NotSignificant
  std::string partner;     // Correlated
  double r = 0.0;          // Correlated
};

struct ScreeningOutcome {
  std::vector<std::string> kept;
  std::vector<Dropped> dropped;
};

struct ScreenOptions {
  double alpha = 0.05;
  double r_threshold = 0.8;
};

// Drops every variable with sig > alpha, then, scanning pairs (i < j) of
// survivors in row order, drops j whenever |r(i, j)| >= r_threshold and
// both are still kept. Intercept rows are ignored. `corr` must contain
// every variable that survives the significance step.
ScreeningOutcome screen(const std::vector<WaldRow>& wald, const CorrelationMatrix& corr,
                        const ScreenOptions& options = {});

// Variables passing the significance step only, in row order.
std::vector<std::string> significant_variables(const std::vector<WaldRow>& wald, double alpha);

std::string format_outcome_json(const ScreeningOutcome& outcome);

}  // namespace cartcredit::screening
