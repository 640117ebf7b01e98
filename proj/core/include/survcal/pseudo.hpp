#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

#include "survcal/dataset.hpp"

namespace survcal {

// k = 1: survival probability, the at-the-risk indicator 1{T >= t}.
// k = 2: restricted mean, the truncation T ^ t.
enum class FunctionalKind { SurvivalProbability, RestrictedMean };

struct TargetFunctional {
  FunctionalKind kind = FunctionalKind::SurvivalProbability;
  double horizon = 0.0;
};

double functional_value(FunctionalKind kind, double time, double horizon);

// Natural range bound of the functional's predictions: 1 for SP, the horizon
// for RM. Used to size calibration buckets and accuracy targets.
double functional_range(FunctionalKind kind, double horizon);

enum class PseudoMethod { Jackknife, Ipcw };

struct PseudoMatrix {
  Eigen::MatrixXd values;    // N x M
  std::vector<double> grid;  // M horizons
  FunctionalKind kind = FunctionalKind::SurvivalProbability;
  PseudoMethod method = PseudoMethod::Jackknife;
};

// Jackknife pseudo-observations N * plugin - (N-1) * leave-one-out, where the
// plug-in is the Kaplan-Meier survival estimate for SP and its exact time
// integral for RM. The incremental leave-one-out scheme matches a naive
// recomputation of N separate Kaplan-Meier fits to well below 1e-10. Values
// may fall outside the functional range; no clipping is applied.
PseudoMatrix pseudo_jackknife(const Eigen::VectorXd& times,
                              const std::vector<std::uint8_t>& events,
                              FunctionalKind kind,
                              const std::vector<double>& grid);
PseudoMatrix pseudo_jackknife(const SurvivalDataset& data, FunctionalKind kind,
                              const std::vector<double>& grid);

// Censoring-weighted pseudo-observations
//   nu(T~, t) * 1{event or T~ >= t} / G((T~ ^ t)- | stratum),
// with G the per-stratum Kaplan-Meier of the censoring distribution evaluated
// at the left limit. Throws "censoring weight diverges" when a required
// evaluation point has G = 0.
PseudoMatrix pseudo_ipcw(const SurvivalDataset& data, FunctionalKind kind,
                         const std::vector<double>& grid);

}  // namespace survcal
