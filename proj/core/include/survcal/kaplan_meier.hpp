#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <vector>

#include "survcal/dataset.hpp"
#include "survcal/step_curve.hpp"

namespace survcal {

// Product-limit estimator of the survival function. Ties are aggregated per
// distinct time; every unit with observed time >= t belongs to the risk set at
// t, so events at a timestamp are processed before censorings there. The curve
// stays flat beyond the last observed time.
StepCurve kaplan_meier(const Eigen::VectorXd& times,
                       const std::vector<std::uint8_t>& events);

// Per-stratum Kaplan-Meier estimate of the censoring survival function
// (product-limit with the censoring indicator 1 - event as the event). A
// dataset without strata yields a single curve under key 0.
std::map<std::int32_t, StepCurve> censoring_survival(const SurvivalDataset& data);

}  // namespace survcal
