#pragma once

#include <Eigen/Dense>

#include <map>
#include <vector>

#include "survcal/learners.hpp"

namespace survcal {

inline constexpr double kMaxPropensityOdds = 1e12;

// Logistic membership model P(D = source | x) fit against the target sample.
// Propensity odds are sigma_T / sigma_S = (1 - p) / p.
struct PropensityModel {
  LogisticModel source_given_x;
  bool warning = false;  // set when the logistic fit did not converge

  Eigen::VectorXd odds(const Eigen::MatrixXd& X) const;
};

PropensityModel fit_propensity(const Eigen::MatrixXd& source_X,
                               const Eigen::MatrixXd& target_X);

// Self-normalized weighted mean of pseudo-observations; invariant to scaling
// all odds by a positive constant. Throws on nonpositive or overflowing odds.
double ipsw_estimate(const Eigen::VectorXd& pseudo, const Eigen::VectorXd& odds);
double ipsw_estimate(const Eigen::VectorXd& pseudo, const Eigen::MatrixXd& source_X,
                     const PropensityModel& model);

// Caps odds at the given upper quantile (e.g. 0.995); a stability aid that is
// off by default in every estimator here.
Eigen::VectorXd truncate_odds(Eigen::VectorXd odds, double quantile);

// Per-group propensity fit and estimate, keyed by the group label. Every
// source group must appear in the target sample.
std::map<int, double> ipsw_subgroup(const Eigen::VectorXd& pseudo,
                                    const Eigen::MatrixXd& source_X,
                                    const std::vector<int>& source_groups,
                                    const Eigen::MatrixXd& target_X,
                                    const std::vector<int>& target_groups);

// Multi-source estimator: per-source propensity fits against the target,
// prior weights from sample fractions, one self-normalized combination.
double ipsw_multisource(const std::vector<Eigen::VectorXd>& pseudo_per_source,
                        const std::vector<Eigen::MatrixXd>& source_X,
                        const Eigen::MatrixXd& target_X);

}  // namespace survcal
