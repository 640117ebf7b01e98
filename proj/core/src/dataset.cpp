#include "survcal/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace survcal {

void SurvivalDataset::validate() const {
  const Eigen::Index N = n();
  if (N == 0) throw std::invalid_argument("empty dataset");
  if (covariates.rows() != N) {
    throw std::invalid_argument("dataset: covariate row count mismatch");
  }
  if (static_cast<Eigen::Index>(event.size()) != N ||
      static_cast<Eigen::Index>(domain.size()) != N) {
    throw std::invalid_argument("dataset: column length mismatch");
  }
  if (!strata.empty() && static_cast<Eigen::Index>(strata.size()) != N) {
    throw std::invalid_argument("dataset: strata length mismatch");
  }
  for (Eigen::Index i = 0; i < N; ++i) {
    if (!(observed_time[i] >= 0.0) || std::isnan(observed_time[i])) {
      throw std::invalid_argument("dataset: observed_time must be nonnegative and finite");
    }
  }
  if (covariates.hasNaN()) {
    throw std::invalid_argument("dataset: covariates contain NaN");
  }
  if (!strata.empty()) {
    std::set<std::int32_t> distinct(strata.begin(), strata.end());
    if (static_cast<int>(distinct.size()) > kMaxStrata) {
      throw std::invalid_argument("dataset: strata cardinality exceeds finite-support bound");
    }
  }
}

int SurvivalDataset::n_sources() const {
  std::int32_t max_label = -1;
  for (std::int32_t d : domain) max_label = std::max(max_label, d);
  return static_cast<int>(max_label) + 1;
}

std::vector<int> SurvivalDataset::rows_with_domain(std::int32_t label) const {
  std::vector<int> rows;
  for (std::size_t i = 0; i < domain.size(); ++i) {
    if (domain[i] == label) rows.push_back(static_cast<int>(i));
  }
  return rows;
}

std::vector<int> SurvivalDataset::source_rows() const {
  std::vector<int> rows;
  for (std::size_t i = 0; i < domain.size(); ++i) {
    if (domain[i] != kTargetDomain) rows.push_back(static_cast<int>(i));
  }
  return rows;
}

std::vector<int> SurvivalDataset::target_rows() const {
  return rows_with_domain(kTargetDomain);
}

SurvivalDataset SurvivalDataset::subset(const std::vector<int>& rows) const {
  SurvivalDataset out;
  const Eigen::Index m = static_cast<Eigen::Index>(rows.size());
  out.covariates.resize(m, covariates.cols());
  out.observed_time.resize(m);
  out.event.resize(rows.size());
  out.domain.resize(rows.size());
  if (!strata.empty()) out.strata.resize(rows.size());
  for (Eigen::Index k = 0; k < m; ++k) {
    const int i = rows[static_cast<std::size_t>(k)];
    out.covariates.row(k) = covariates.row(i);
    out.observed_time[k] = observed_time[i];
    out.event[static_cast<std::size_t>(k)] = event[static_cast<std::size_t>(i)];
    out.domain[static_cast<std::size_t>(k)] = domain[static_cast<std::size_t>(i)];
    if (!strata.empty()) {
      out.strata[static_cast<std::size_t>(k)] = strata[static_cast<std::size_t>(i)];
    }
  }
  return out;
}

}  // namespace survcal
