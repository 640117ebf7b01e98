#pragma once

// Test-side oracles, intentionally independent of the library paths they
// check: brute-force recomputation and closed-form references only.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <vector>

#include "survcal/kaplan_meier.hpp"
#include "survcal/pseudo.hpp"

namespace oracles {

// Naive jackknife: N separate Kaplan-Meier refits through the public
// estimator, one evaluation or exact step integral per horizon.
inline double plugin_value(const survcal::StepCurve& curve, survcal::FunctionalKind kind,
                           double horizon) {
  return kind == survcal::FunctionalKind::SurvivalProbability ? curve.at(horizon)
                                                              : curve.integral(horizon);
}

inline Eigen::MatrixXd naive_jackknife(const Eigen::VectorXd& times,
                                       const std::vector<std::uint8_t>& events,
                                       survcal::FunctionalKind kind,
                                       const std::vector<double>& grid) {
  const Eigen::Index n = times.size();
  const survcal::StepCurve full = survcal::kaplan_meier(times, events);

  Eigen::MatrixXd out(n, static_cast<Eigen::Index>(grid.size()));
  Eigen::VectorXd sub_times(n - 1);
  std::vector<std::uint8_t> sub_events(static_cast<std::size_t>(n - 1));
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index k = 0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i) continue;
      sub_times[k] = times[j];
      sub_events[static_cast<std::size_t>(k)] = events[static_cast<std::size_t>(j)];
      ++k;
    }
    const survcal::StepCurve loo = survcal::kaplan_meier(sub_times, sub_events);
    for (std::size_t m = 0; m < grid.size(); ++m) {
      out(i, static_cast<Eigen::Index>(m)) =
          static_cast<double>(n) * plugin_value(full, kind, grid[m]) -
          static_cast<double>(n - 1) * plugin_value(loo, kind, grid[m]);
    }
  }
  return out;
}

// Literal O(N^2) pair loop for the concordance index, written directly from
// the displayed pair counts.
inline double brute_force_cindex(const Eigen::VectorXd& predictions,
                                 const Eigen::VectorXd& times,
                                 const std::vector<std::uint8_t>& events) {
  long long num = 0;
  long long den = 0;
  const Eigen::Index n = times.size();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!events[static_cast<std::size_t>(i)]) continue;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (times[j] > times[i]) {
        ++den;
        if (predictions[j] > predictions[i]) ++num;
      }
    }
  }
  return static_cast<double>(num) / static_cast<double>(den);
}

// Closed-form survival under the proportional-hazards Weibull model.
inline double weibull_survival(double t, double eta, double nu, double linear) {
  return std::exp(-eta * std::pow(t, nu) * std::exp(linear));
}

inline double weibull_median(double eta, double nu, double linear) {
  return std::pow(std::log(2.0) / (eta * std::exp(linear)), 1.0 / nu);
}

}  // namespace oracles
