#include <benchmark/benchmark.h>

#include <random>

#include "transq/lasso.hpp"

namespace {

void gaussian_problem(Eigen::Index n, Eigen::Index p, transq::Matrix& X, transq::Vector& y) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> normal;
  X.resize(n, p);
  for (Eigen::Index j = 0; j < p; ++j)
    for (Eigen::Index i = 0; i < n; ++i) X(i, j) = normal(rng);
  transq::Vector b = transq::Vector::Zero(p);
  for (Eigen::Index j = 0; j < std::min<Eigen::Index>(p, 7); ++j) b[j] = 1.0;
  y = X * b;
  for (Eigen::Index i = 0; i < n; ++i) y[i] += normal(rng);
}

void BM_LassoFit(benchmark::State& state) {
  transq::Matrix X;
  transq::Vector y;
  gaussian_problem(state.range(0), state.range(1), X, y);
  transq::LassoConfig cfg;
  cfg.lambda = 0.1 * transq::lasso_lambda_max(X, y);
  for (auto _ : state) benchmark::DoNotOptimize(transq::lasso_fit(X, y, cfg).coefficients.data());
}
BENCHMARK(BM_LassoFit)->Args({30, 200})->Args({70, 200})->Args({500, 40})->Args({2000, 200});

void BM_LassoOffset(benchmark::State& state) {
  transq::Matrix X;
  transq::Vector y;
  gaussian_problem(state.range(0), state.range(1), X, y);
  const transq::Vector base = transq::Vector::Constant(X.cols(), 0.1);
  transq::LassoConfig cfg;
  cfg.lambda = 0.1 * transq::lasso_lambda_max(X, y);
  for (auto _ : state) benchmark::DoNotOptimize(transq::lasso_fit_offset(X, y, base, cfg).coefficients.data());
}
BENCHMARK(BM_LassoOffset)->Args({30, 200})->Args({500, 40});

}  // namespace
