#pragma once

#include <Eigen/Dense>
#include <vector>

namespace transq {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct LassoConfig {
  double lambda = 0.0;
  int max_sweeps = 10000;
  // Convergence when the largest absolute coefficient change over one full
  // sweep drops below tol.
  double tol = 1e-7;
  // Fit on unit-scale columns, i.e. penalize sum_j s_j |b_j| with
  // s_j = sqrt(mean(X_j^2)). Coefficients are returned on the original scale.
  bool standardize = false;

  void validate() const;
};

struct LassoSolution {
  Vector coefficients;
  // (1/(2n))||y - X b||^2 + lambda ||b||_1 evaluated at the returned b.
  double objective = 0.0;
  int sweeps_used = 0;
  bool converged = false;
  // Objective after each completed sweep; trace[0] is the value at b = 0.
  std::vector<double> objective_trace;
};

struct KktReport {
  // Max over j with b_j == 0 of (|g_j| - lambda)_+, g_j = (1/n) X_j^T (y - X b).
  double inactive = 0.0;
  // Max over j with b_j != 0 of |g_j - lambda sign(b_j)|.
  double active = 0.0;

  double max_violation() const { return inactive > active ? inactive : active; }
};

double soft_threshold(double z, double tau);

Vector hard_threshold(const Vector& v, double tau);

double lasso_objective(const Matrix& X, const Vector& y, const Vector& b, double lambda);

// Smallest penalty at which the zero vector is optimal: max_j |(1/n) X_j^T y|.
double lasso_lambda_max(const Matrix& X, const Vector& y);

/// Cyclic coordinate descent for (1/(2n))||y - Xb||^2 + lambda ||b||_1,
/// started from b = 0. No intercept is added.
LassoSolution lasso_fit(const Matrix& X, const Vector& y, const LassoConfig& cfg);

/// argmin over delta of (1/(2n))||y - X(base + delta)||^2 + lambda ||delta||_1.
/// The returned coefficients are delta, not base + delta.
LassoSolution lasso_fit_offset(const Matrix& X, const Vector& y, const Vector& base,
                               const LassoConfig& cfg);

KktReport kkt_check(const Matrix& X, const Vector& y, const Vector& b, double lambda);

}  // namespace transq
