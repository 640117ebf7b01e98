#include <benchmark/benchmark.h>

#include "survcal/learners.hpp"
#include "survcal/rng.hpp"

namespace {

using namespace survcal;

void regression_problem(int n, int d, Eigen::MatrixXd& X, Eigen::VectorXd& y) {
  RngStream rng(11, 2);
  X.resize(n, d);
  y.resize(n);
  for (int i = 0; i < n; ++i) {
    X(i, 0) = 1.0;
    for (int j = 1; j < d; ++j) X(i, j) = rng.normal();
    y[i] = X(i, 1) - 0.5 * X(i, d - 1) + 0.3 * rng.normal();
  }
}

void BM_FitOls(benchmark::State& state) {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  regression_problem(static_cast<int>(state.range(0)), 5, X, y);
  for (auto _ : state) benchmark::DoNotOptimize(fit_ols(X, y));
}
BENCHMARK(BM_FitOls)->Arg(500)->Arg(5000);

void BM_FitLogistic(benchmark::State& state) {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  regression_problem(static_cast<int>(state.range(0)), 5, X, y);
  RngStream rng(13, 2);
  std::vector<std::uint8_t> labels(static_cast<std::size_t>(X.rows()));
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    labels[static_cast<std::size_t>(i)] = rng.bernoulli(1.0 / (1.0 + std::exp(-y[i]))) ? 1 : 0;
  }
  for (auto _ : state) benchmark::DoNotOptimize(fit_logistic(X, labels));
}
BENCHMARK(BM_FitLogistic)->Arg(2000)->Arg(20000);

void BM_FitTree(benchmark::State& state) {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  regression_problem(static_cast<int>(state.range(0)), 5, X, y);
  for (auto _ : state) benchmark::DoNotOptimize(fit_tree(X, y, 2, 10));
}
BENCHMARK(BM_FitTree)->Arg(250)->Arg(2000);

void BM_FitForest(benchmark::State& state) {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  regression_problem(static_cast<int>(state.range(0)), 5, X, y);
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit_forest(X, y, 100, 6, 2, 77));
  }
}
BENCHMARK(BM_FitForest)->Arg(250)->Arg(500);

}  // namespace
