#pragma once

#include <cmath>
#include <random>

#include "transq/lasso.hpp"
#include "transq/qmodel.hpp"

namespace testing {

using transq::Matrix;
using transq::Vector;

inline Matrix gaussian_matrix(Eigen::Index n, Eigen::Index p, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix X(n, p);
  for (Eigen::Index j = 0; j < p; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) X(i, j) = normal(rng);
  }
  return X;
}

inline Vector gaussian_vector(Eigen::Index n, std::mt19937_64& rng) {
  return gaussian_matrix(n, 1, rng).col(0);
}

// Least squares through the normal equations, solved independently of the
// coordinate-descent code.
inline Vector normal_equations(const Matrix& X, const Vector& y) {
  return (X.transpose() * X).ldlt().solve(X.transpose() * y);
}

// Proximal gradient (ISTA) with step 1/L, run long enough to serve as a
// reference solution on small problems.
inline Vector ista(const Matrix& X, const Vector& y, double lambda, int iterations = 200000) {
  const double n = static_cast<double>(X.rows());
  const Matrix G = X.transpose() * X / n;
  const Vector c = X.transpose() * y / n;
  const double L = Eigen::SelfAdjointEigenSolver<Matrix>(G).eigenvalues().maxCoeff();
  Vector b = Vector::Zero(X.cols());
  for (int it = 0; it < iterations; ++it) {
    const Vector z = b - (G * b - c) / L;
    for (Eigen::Index j = 0; j < z.size(); ++j) {
      const double mag = std::abs(z[j]) - lambda / L;
      b[j] = mag > 0.0 ? std::copysign(mag, z[j]) : 0.0;
    }
  }
  return b;
}

inline double objective(const Matrix& X, const Vector& y, const Vector& b, double lambda) {
  const double n = static_cast<double>(X.rows());
  return (y - X * b).squaredNorm() / (2.0 * n) + lambda * b.lpNorm<1>();
}

inline transq::StageData random_stage(Eigen::Index n, Eigen::Index p, std::mt19937_64& rng) {
  transq::StageData sd;
  sd.X = gaussian_matrix(n, p, rng);
  sd.a.resize(n);
  std::bernoulli_distribution coin(0.5);
  for (Eigen::Index i = 0; i < n; ++i) sd.a[i] = coin(rng) ? 1 : -1;
  sd.r = gaussian_vector(n, rng);
  return sd;
}

}  // namespace testing
