#include <benchmark/benchmark.h>

#include <numeric>

#include "survcal/mcboost.hpp"
#include "survcal/rng.hpp"

namespace {

using namespace survcal;

void BM_Calibrate(benchmark::State& state) {
  RngStream rng(17, 3);
  const int n = static_cast<int>(state.range(0));
  Eigen::MatrixXd X(n, 5);
  Eigen::VectorXd pseudo(n);
  for (int i = 0; i < n; ++i) {
    X(i, 0) = 1.0;
    for (int j = 1; j < 5; ++j) X(i, j) = rng.normal();
    pseudo[i] = X(i, 1) > 0.0 ? 1.0 : 0.0;
  }
  std::vector<int> calib;
  std::vector<int> validation;
  for (int i = 0; i < n; ++i) (i % 2 ? validation : calib).push_back(i);

  CalibrationConfig cfg;
  cfg.alpha = 0.02;
  cfg.eta = 0.3;
  cfg.max_iters = 200;
  cfg.range_max = 1.0;
  cfg.auditor.kind = state.range(1) == 0 ? AuditorKind::Ridge : AuditorKind::Tree;

  for (auto _ : state) {
    benchmark::DoNotOptimize(
        calibrate(constant_predictor(0.5), X, pseudo, calib, validation, cfg));
  }
}
BENCHMARK(BM_Calibrate)->Args({500, 0})->Args({500, 1})->Args({2000, 0});

}  // namespace

BENCHMARK_MAIN();
