#include <benchmark/benchmark.h>

#include "survcal/kaplan_meier.hpp"
#include "survcal/pseudo.hpp"
#include "survcal/rng.hpp"

namespace {

using namespace survcal;

void censored_sample(int n, Eigen::VectorXd& times, std::vector<std::uint8_t>& events) {
  RngStream rng(7, 1);
  times.resize(n);
  events.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double t = -20.0 * std::log(rng.uniform());
    const double c = rng.uniform(0.0, 60.0);
    times[i] = std::min(t, c);
    events[static_cast<std::size_t>(i)] = t <= c ? 1 : 0;
  }
}

void BM_KaplanMeier(benchmark::State& state) {
  Eigen::VectorXd times;
  std::vector<std::uint8_t> events;
  censored_sample(static_cast<int>(state.range(0)), times, events);
  for (auto _ : state) {
    benchmark::DoNotOptimize(kaplan_meier(times, events));
  }
}
BENCHMARK(BM_KaplanMeier)->Arg(1000)->Arg(10000);

void BM_PseudoJackknife(benchmark::State& state) {
  Eigen::VectorXd times;
  std::vector<std::uint8_t> events;
  censored_sample(static_cast<int>(state.range(0)), times, events);
  const std::vector<double> grid = {5, 10, 30, 50, 70};
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        pseudo_jackknife(times, events, FunctionalKind::SurvivalProbability, grid));
  }
}
BENCHMARK(BM_PseudoJackknife)->Arg(1000)->Arg(10000);

void BM_PseudoJackknifeNaive(benchmark::State& state) {
  // Reference cost of the N-fold refit the incremental scheme replaces.
  Eigen::VectorXd times;
  std::vector<std::uint8_t> events;
  censored_sample(static_cast<int>(state.range(0)), times, events);
  const int n = static_cast<int>(times.size());
  for (auto _ : state) {
    Eigen::VectorXd sub_times(n - 1);
    std::vector<std::uint8_t> sub_events(static_cast<std::size_t>(n - 1));
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
      int k = 0;
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        sub_times[k] = times[j];
        sub_events[static_cast<std::size_t>(k)] = events[static_cast<std::size_t>(j)];
        ++k;
      }
      acc += kaplan_meier(sub_times, sub_events).at(30.0);
    }
    benchmark::DoNotOptimize(acc);
  }
}
BENCHMARK(BM_PseudoJackknifeNaive)->Arg(1000);

}  // namespace
