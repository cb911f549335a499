#include "transq/lasso.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "transq/error.hpp"

namespace transq {

void LassoConfig::validate() const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw Error(ErrorCode::DomainError, "lasso lambda must be finite and >= 0");
  }
  if (!(tol > 0.0)) throw Error(ErrorCode::DomainError, "lasso tol must be > 0");
  if (max_sweeps < 1) throw Error(ErrorCode::DomainError, "lasso max_sweeps must be >= 1");
}

double soft_threshold(double z, double tau) {
  if (z > tau) return z - tau;
  if (z < -tau) return z + tau;
  return 0.0;
}

Vector hard_threshold(const Vector& v, double tau) {
  Vector out = v;
  for (Eigen::Index j = 0; j < out.size(); ++j) {
    if (!(std::abs(out[j]) >= tau)) out[j] = 0.0;
  }
  return out;
}

namespace {

void check_inputs(const Matrix& X, const Vector& y) {
  if (X.rows() < 1 || X.cols() < 1) {
    throw Error(ErrorCode::DimensionMismatch, "design must have at least one row and one column");
  }
  if (y.size() != X.rows()) {
    throw Error(ErrorCode::DimensionMismatch,
                "response length " + std::to_string(y.size()) + " != design rows " +
                    std::to_string(X.rows()));
  }
  if (!X.allFinite()) throw Error(ErrorCode::NonFiniteInput, "design contains NaN/Inf");
  if (!y.allFinite()) throw Error(ErrorCode::NonFiniteInput, "response contains NaN/Inf");
}

// Coordinate-descent state over a fixed design. The residual is kept in sync
// with the coefficients so each coordinate update costs O(n).
class CoordinateDescent {
 public:
  CoordinateDescent(const Matrix& X, const Vector& y, const LassoConfig& cfg)
      : X_(X),
        n_(static_cast<double>(X.rows())),
        cfg_(cfg),
        beta_(Vector::Zero(X.cols())),
        resid_(y),
        col_sq_(X.cols()),
        penalty_(X.cols()) {
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
      col_sq_[j] = X.col(j).squaredNorm() / n_;
      penalty_[j] = cfg.standardize ? cfg.lambda * std::sqrt(col_sq_[j]) : cfg.lambda;
    }
  }

  // One cyclic pass over `coords`; returns the largest absolute change.
  double sweep(const std::vector<Eigen::Index>& coords) {
    double max_change = 0.0;
    for (Eigen::Index j : coords) {
      const double cj = col_sq_[j];
      if (cj == 0.0) continue;
      const double old = beta_[j];
      const double rho = X_.col(j).dot(resid_) / n_ + cj * old;
      const double updated = soft_threshold(rho, penalty_[j]) / cj;
      const double diff = updated - old;
      if (diff != 0.0) {
        resid_.noalias() -= diff * X_.col(j);
        beta_[j] = updated;
        max_change = std::max(max_change, std::abs(diff));
      }
    }
    return max_change;
  }

  double objective() const {
    return 0.5 * resid_.squaredNorm() / n_ + penalty_.cwiseProduct(beta_.cwiseAbs()).sum();
  }

  std::vector<Eigen::Index> active_set() const {
    std::vector<Eigen::Index> active;
    for (Eigen::Index j = 0; j < beta_.size(); ++j) {
      if (beta_[j] != 0.0) active.push_back(j);
    }
    return active;
  }

  const Vector& beta() const { return beta_; }

 private:
  const Matrix& X_;
  double n_;
  LassoConfig cfg_;
  Vector beta_;
  Vector resid_;
  Vector col_sq_;
  Vector penalty_;
};

}  // namespace

double lasso_objective(const Matrix& X, const Vector& y, const Vector& b, double lambda) {
  const double n = static_cast<double>(X.rows());
  return 0.5 * (y - X * b).squaredNorm() / n + lambda * b.lpNorm<1>();
}

double lasso_lambda_max(const Matrix& X, const Vector& y) {
  check_inputs(X, y);
  return (X.transpose() * y).cwiseAbs().maxCoeff() / static_cast<double>(X.rows());
}

LassoSolution lasso_fit(const Matrix& X, const Vector& y, const LassoConfig& cfg) {
  cfg.validate();
  check_inputs(X, y);

  CoordinateDescent cd(X, y, cfg);
  std::vector<Eigen::Index> all(static_cast<std::size_t>(X.cols()));
  for (Eigen::Index j = 0; j < X.cols(); ++j) all[static_cast<std::size_t>(j)] = j;

  LassoSolution sol;
  sol.objective_trace.push_back(cd.objective());

  // Full sweeps alternate with passes restricted to the current support;
  // convergence is only ever declared on a full sweep.
  int sweeps = 0;
  bool converged = false;
  while (sweeps < cfg.max_sweeps) {
    const double full_change = cd.sweep(all);
    ++sweeps;
    sol.objective_trace.push_back(cd.objective());
    if (full_change < cfg.tol) {
      converged = true;
      break;
    }
    const auto active = cd.active_set();
    while (sweeps < cfg.max_sweeps) {
      const double change = cd.sweep(active);
      ++sweeps;
      sol.objective_trace.push_back(cd.objective());
      if (change < cfg.tol) break;
    }
  }

  sol.coefficients = cd.beta();
  sol.sweeps_used = sweeps;
  sol.converged = converged;
  sol.objective = lasso_objective(X, y, sol.coefficients, cfg.lambda);
  return sol;
}

LassoSolution lasso_fit_offset(const Matrix& X, const Vector& y, const Vector& base,
                               const LassoConfig& cfg) {
  check_inputs(X, y);
  if (base.size() != X.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "offset length must equal design columns");
  }
  if (!base.allFinite()) throw Error(ErrorCode::NonFiniteInput, "offset contains NaN/Inf");
  const Vector residual = y - X * base;
  return lasso_fit(X, residual, cfg);
}

KktReport kkt_check(const Matrix& X, const Vector& y, const Vector& b, double lambda) {
  check_inputs(X, y);
  if (b.size() != X.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "coefficient length must equal design columns");
  }
  if (!b.allFinite()) throw Error(ErrorCode::NonFiniteInput, "coefficients contain NaN/Inf");

  const Vector grad = X.transpose() * (y - X * b) / static_cast<double>(X.rows());
  KktReport report;
  for (Eigen::Index j = 0; j < b.size(); ++j) {
    if (b[j] == 0.0) {
      report.inactive = std::max(report.inactive, std::abs(grad[j]) - lambda);
    } else {
      const double target = b[j] > 0.0 ? lambda : -lambda;
      report.active = std::max(report.active, std::abs(grad[j] - target));
    }
  }
  return report;
}

}  // namespace transq
