#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace survcal {

inline constexpr std::int32_t kTargetDomain = -1;
inline constexpr int kMaxStrata = 64;

// Observed right-censored data. `domain` holds kTargetDomain for target rows
// and 0-based source indices otherwise. `strata`, when non-empty, carries the
// small-cardinality labels that covariate-dependent censoring is stratified on.
struct SurvivalDataset {
  Eigen::MatrixXd covariates;        // N x d; column 0 may be an all-ones intercept
  Eigen::VectorXd observed_time;     // N, nonnegative
  std::vector<std::uint8_t> event;   // N, 1 = event observed
  std::vector<std::int32_t> domain;  // N
  std::vector<std::int32_t> strata;  // empty, or N

  Eigen::Index n() const { return observed_time.size(); }
  Eigen::Index dim() const { return covariates.cols(); }

  // Throws std::invalid_argument on any violated invariant (empty dataset,
  // negative times, NaN, strata cardinality above kMaxStrata, size mismatch).
  void validate() const;

  bool has_strata() const { return !strata.empty(); }
  int n_sources() const;

  std::vector<int> rows_with_domain(std::int32_t label) const;
  std::vector<int> source_rows() const;
  std::vector<int> target_rows() const;

  SurvivalDataset subset(const std::vector<int>& rows) const;
};

}  // namespace survcal
