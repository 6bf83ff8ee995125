#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "cartcredit/error.hpp"
#include "cartcredit/kernels.hpp"
#include "cartcredit/screening.hpp"

namespace cartcredit::screening {
namespace {

// Smallest eigenvalue relative to the largest below which the information
// matrix is treated as singular.
constexpr double kRankTolerance = 1e-12;

double sigmoid(double eta) {
  if (eta >= 0) return 1.0 / (1.0 + std::exp(-eta));
  const double e = std::exp(eta);
  return e / (1.0 + e);
}

// log(1 + exp(eta)) without overflow.
double softplus(double eta) { return std::max(eta, 0.0) + std::log1p(std::exp(-std::abs(eta))); }

struct Design {
  std::vector<std::vector<double>> columns;  // scaled variables, then the ones column
  std::vector<double> scale;                 // original = scaled / scale
};

Design make_design(std::span<const std::vector<double>> columns, std::size_t n) {
  Design design;
  for (std::size_t j = 0; j < columns.size(); ++j) {
    const auto& col = columns[j];
    if (col.size() != n) throw Error(ErrorKind::DomainError, "column length differs from target");
    const double rms = std::sqrt(kernels::dot(col, col) / static_cast<double>(n));
    if (!(rms > 0.0) || !std::isfinite(rms)) {
      throw Error(ErrorKind::Singular, "column " + std::to_string(j) + " is identically zero");
    }
    std::vector<double> scaled(n);
    for (std::size_t i = 0; i < n; ++i) scaled[i] = col[i] / rms;
    design.columns.push_back(std::move(scaled));
    design.scale.push_back(rms);
  }
  design.columns.emplace_back(n, 1.0);
  design.scale.push_back(1.0);
  return design;
}

std::vector<double> linear_predictor(const Design& design, const Eigen::VectorXd& beta) {
  const std::size_t n = design.columns.front().size();
  std::vector<double> eta(n, 0.0);
  for (std::size_t j = 0; j < design.columns.size(); ++j) {
    const double b = beta[static_cast<Eigen::Index>(j)];
    const auto& col = design.columns[j];
    for (std::size_t i = 0; i < n; ++i) eta[i] += b * col[i];
  }
  return eta;
}

double ll_from_eta(std::span<const double> eta, std::span<const double> y) {
  double ll = 0.0;
  for (std::size_t i = 0; i < eta.size(); ++i) ll += y[i] * eta[i] - softplus(eta[i]);
  return ll;
}

struct Information {
  Eigen::MatrixXd hessian;  // X' W X
  Eigen::VectorXd score;    // X' (y - mu)
};

Information information(const Design& design, std::span<const double> y,
                        std::span<const double> eta) {
  const std::size_t n = y.size();
  const std::size_t p = design.columns.size();
  std::vector<double> w(n);
  std::vector<double> resid(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double mu = sigmoid(eta[i]);
    w[i] = mu * (1.0 - mu);
    resid[i] = y[i] - mu;
  }
  Information info{Eigen::MatrixXd(p, p), Eigen::VectorXd(p)};
  for (std::size_t j = 0; j < p; ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    info.score[jj] = kernels::dot(design.columns[j], resid);
    for (std::size_t k = 0; k <= j; ++k) {
      const auto kk = static_cast<Eigen::Index>(k);
      const double h = kernels::weighted_dot(w, design.columns[j], design.columns[k]);
      info.hessian(jj, kk) = h;
      info.hessian(kk, jj) = h;
    }
  }
  return info;
}

bool is_singular(const Eigen::MatrixXd& hessian) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(hessian, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) return true;
  const auto& ev = solver.eigenvalues();
  const double largest = ev.maxCoeff();
  return !(largest > 0.0) || !(ev.minCoeff() > kRankTolerance * largest);
}

}  // namespace

double log_likelihood(std::span<const std::vector<double>> columns, std::span<const double> y,
                      std::span<const double> coefficients) {
  if (coefficients.size() != columns.size() + 1) {
    throw Error(ErrorKind::DomainError, "coefficient count must be variables + 1");
  }
  std::vector<double> eta(y.size(), coefficients.back());
  for (std::size_t j = 0; j < columns.size(); ++j) {
    for (std::size_t i = 0; i < y.size(); ++i) eta[i] += coefficients[j] * columns[j][i];
  }
  return ll_from_eta(eta, y);
}

std::vector<double> log_likelihood_gradient(std::span<const std::vector<double>> columns,
                                            std::span<const double> y,
                                            std::span<const double> coefficients) {
  if (coefficients.size() != columns.size() + 1) {
    throw Error(ErrorKind::DomainError, "coefficient count must be variables + 1");
  }
  std::vector<double> resid(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    double eta = coefficients.back();
    for (std::size_t j = 0; j < columns.size(); ++j) eta += coefficients[j] * columns[j][i];
    resid[i] = y[i] - sigmoid(eta);
  }
  std::vector<double> grad;
  for (const auto& col : columns) grad.push_back(kernels::dot(col, resid));
  grad.push_back(kernels::sum(resid));
  return grad;
}

LogisticFit fit_logistic(std::span<const std::vector<double>> columns, std::span<const double> y,
                         const std::vector<std::string>& names, const LogisticOptions& options) {
  const std::size_t n = y.size();
  const std::size_t p = columns.size() + 1;
  if (names.size() != columns.size()) {
    throw Error(ErrorKind::DomainError, "one name per column required");
  }
  if (n <= p) {
    throw Error(ErrorKind::DomainError, "need more rows (" + std::to_string(n) +
                                            ") than coefficients (" + std::to_string(p) + ")");
  }
  for (double v : y) {
    if (v != 0.0 && v != 1.0) throw Error(ErrorKind::DomainError, "target must be 0/1");
  }

  const Design design = make_design(columns, n);
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p));
  std::vector<double> eta = linear_predictor(design, beta);
  double ll = ll_from_eta(eta, y);

  LogisticFit fit;
  fit.names = names;
  fit.names.emplace_back(kInterceptName);

  for (int iter = 1; iter <= options.max_iter; ++iter) {
    const Information info = information(design, y, eta);
    if (is_singular(info.hessian)) {
      throw Error(ErrorKind::Singular,
                  "information matrix is not invertible (constant or collinear variables)");
    }
    Eigen::VectorXd delta = info.hessian.ldlt().solve(info.score);

    // Step halving keeps the likelihood from decreasing.
    Eigen::VectorXd candidate = beta + delta;
    std::vector<double> next_eta = linear_predictor(design, candidate);
    double next_ll = ll_from_eta(next_eta, y);
    for (int halving = 0; halving < 30 && next_ll < ll - 1e-12 * std::abs(ll); ++halving) {
      delta *= 0.5;
      candidate = beta + delta;
      next_eta = linear_predictor(design, candidate);
      next_ll = ll_from_eta(next_eta, y);
    }
    beta = candidate;
    eta = std::move(next_eta);
    ll = next_ll;
    fit.iterations = iter;

    double change = 0.0;
    bool separated = false;
    for (std::size_t j = 0; j < p; ++j) {
      const auto jj = static_cast<Eigen::Index>(j);
      const double scaled = std::abs(delta[jj]);
      change = std::max({change, scaled, scaled / design.scale[j]});
      if (std::abs(beta[jj] / design.scale[j]) > options.separation_bound) separated = true;
    }
    if (separated) {
      fit.separation = true;
      break;
    }
    if (change < options.tol) {
      fit.converged = true;
      break;
    }
  }

  fit.log_likelihood = ll;
  fit.coefficients.resize(p);
  fit.standard_errors.resize(p);
  const Information final_info = information(design, y, eta);
  const bool singular = is_singular(final_info.hessian);
  if (singular && !fit.separation) {
    throw Error(ErrorKind::Singular, "information matrix is not invertible at the optimum");
  }
  Eigen::MatrixXd covariance;
  if (!singular) {
    covariance = final_info.hessian.ldlt().solve(
        Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p)));
  }
  for (std::size_t j = 0; j < p; ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    fit.coefficients[j] = beta[jj] / design.scale[j];
    fit.standard_errors[j] = singular ? std::numeric_limits<double>::infinity()
                                      : std::sqrt(covariance(jj, jj)) / design.scale[j];
  }
  return fit;
}

LogisticFit fit_logistic(const dataset::Dataset& data, const std::vector<std::string>& variables,
                         const LogisticOptions& options) {
  std::vector<std::vector<double>> columns;
  for (const auto& name : variables) {
    auto col = data.column(name);
    columns.emplace_back(col.begin(), col.end());
  }
  return fit_logistic(columns, data.target(), variables, options);
}

}  // namespace cartcredit::screening
