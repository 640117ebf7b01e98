#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "survcal/dataset.hpp"
#include "survcal/pseudo.hpp"
#include "survcal/rng.hpp"

namespace survcal {

// Failure-time generators.
struct WeibullHazard {
  double eta = 0.0001;
  double nu = 3.0;
  Eigen::VectorXd coeffs;  // linear predictor over the design columns
};
struct LogNormalAft {
  double mu0 = 3.5;
  double sigma = 0.8;  // sd of log-time
  Eigen::VectorXd coeffs;
};
using HazardSpec = std::variant<WeibullHazard, LogNormalAft>;

// Censoring generators.
struct UniformCensoring {
  double lo = 0.0;
  double hi = 120.0;
};
struct WeibullCensoring {
  double eta = 0.0001;
  double nu = 2.7;
  Eigen::VectorXd coeffs;    // same length as columns
  std::vector<int> columns;  // design columns the coefficients multiply
};
using CensoringSpec = std::variant<UniformCensoring, WeibullCensoring>;

// Domain assignment: per-source log-odds against the target are q * x.omega_j.
struct ShiftSpec {
  std::vector<Eigen::VectorXd> omegas;  // one per source
  double q = 1.0;
};

// One synthetic scenario: generators, shift, sample size, seed, horizons.
struct ScenarioSpec {
  int n_total = 1000;
  HazardSpec hazard;
  CensoringSpec censoring;
  ShiftSpec shift;
  std::uint64_t seed = 1;
  std::vector<double> grid;
  std::vector<FunctionalKind> functionals = {FunctionalKind::SurvivalProbability};
};

// Estimator-facing dataset plus hidden truth columns for oracle evaluation.
// Estimators receive only `data`; the truth never leaks through it.
struct GeneratedCohort {
  SurvivalDataset data;
  Eigen::VectorXd true_time;
  Eigen::VectorXd true_censor;
  Eigen::MatrixXd membership;  // N x (n_sources + 1), target probability last
};

struct DomainAssignment {
  std::vector<std::int32_t> domain;
  Eigen::MatrixXd membership;
};

// Design: column 0 all-ones; (X1, X2) bivariate normal with variance 2 and
// correlation 1/4; X3 ~ Bernoulli(0.4); X4 ~ Bernoulli(0.1 X3 + 0.2).
Eigen::MatrixXd gen_covariates(int n, std::uint64_t seed);
Eigen::MatrixXd gen_covariates(int n, RngStream& normal_stream,
                               RngStream& binary3_stream, RngStream& binary4_stream);

// Inverse-transform draw from the proportional-hazards Weibull model
// Lambda(t | x) = eta * t^nu * exp(x.coeffs).
Eigen::VectorXd gen_failure_weibull(const Eigen::MatrixXd& X, double eta, double nu,
                                    const Eigen::VectorXd& coeffs, RngStream& rng);
Eigen::VectorXd gen_failure_weibull(const Eigen::MatrixXd& X, double eta, double nu,
                                    const Eigen::VectorXd& coeffs, std::uint64_t seed);

// log T ~ Normal(mu0 - x.coeffs, sigma^2).
Eigen::VectorXd gen_failure_aft(const Eigen::MatrixXd& X, const Eigen::VectorXd& coeffs,
                                RngStream& rng, double mu0 = 3.5, double sigma = 0.8);
Eigen::VectorXd gen_failure_aft(const Eigen::MatrixXd& X, const Eigen::VectorXd& coeffs,
                                std::uint64_t seed, double mu0 = 3.5, double sigma = 0.8);

Eigen::VectorXd gen_censoring(const Eigen::MatrixXd& X, const CensoringSpec& spec,
                              RngStream& rng);
Eigen::VectorXd gen_censoring(const Eigen::MatrixXd& X, const CensoringSpec& spec,
                              std::uint64_t seed);

// Two-domain case: P(source | x) = logistic(q * x.omega). Multi-source:
// softmax over {q * x.omega_j} with the target as the zero reference.
DomainAssignment assign_domains(const Eigen::MatrixXd& X,
                                const std::vector<Eigen::VectorXd>& omegas, double q,
                                RngStream& rng);
DomainAssignment assign_domains(const Eigen::MatrixXd& X,
                                const std::vector<Eigen::VectorXd>& omegas, double q,
                                std::uint64_t seed);

// Full cohort for one replication. Per-role RNG streams are derived from
// (spec.seed, replication), so adding roles or scenarios never perturbs
// existing draws. Covariate-dependent censoring sets strata to the (X3, X4)
// cell index.
GeneratedCohort generate_cohort(const ScenarioSpec& spec, int replication = 0);

}  // namespace survcal
