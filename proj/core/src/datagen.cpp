#include "survcal/datagen.hpp"

#include <cmath>
#include <stdexcept>

namespace survcal {

namespace {

std::uint64_t rep_stream(std::uint64_t base, int replication) {
  return base + streams::kReplicationStride * static_cast<std::uint64_t>(replication);
}

double weibull_inverse(double u, double rate_scale, double shape) {
  // Solves eta * t^nu * exp(L) = -log(u) with rate_scale = eta * exp(L).
  return std::pow(-std::log(u) / rate_scale, 1.0 / shape);
}

}  // namespace

Eigen::MatrixXd gen_covariates(int n, RngStream& normal_stream,
                               RngStream& binary3_stream, RngStream& binary4_stream) {
  if (n < 1) throw std::invalid_argument("gen_covariates: n must be positive");
  constexpr double kSd = 1.4142135623730950488;  // sqrt(variance 2)
  constexpr double kRho = 0.25;
  const double rho_comp = std::sqrt(1.0 - kRho * kRho);

  Eigen::MatrixXd X(n, 5);
  for (int i = 0; i < n; ++i) {
    const double z1 = normal_stream.normal();
    const double z2 = normal_stream.normal();
    X(i, 0) = 1.0;
    X(i, 1) = kSd * z1;
    X(i, 2) = kSd * (kRho * z1 + rho_comp * z2);
    const double x3 = binary3_stream.bernoulli(0.4) ? 1.0 : 0.0;
    X(i, 3) = x3;
    X(i, 4) = binary4_stream.bernoulli(0.1 * x3 + 0.2) ? 1.0 : 0.0;
  }
  return X;
}

Eigen::MatrixXd gen_covariates(int n, std::uint64_t seed) {
  RngStream normal(seed, streams::kCovariatesNormal);
  RngStream b3(seed, streams::kCovariatesBinary3);
  RngStream b4(seed, streams::kCovariatesBinary4);
  return gen_covariates(n, normal, b3, b4);
}

Eigen::VectorXd gen_failure_weibull(const Eigen::MatrixXd& X, double eta, double nu,
                                    const Eigen::VectorXd& coeffs, RngStream& rng) {
  if (!(eta > 0.0) || !(nu > 0.0)) {
    throw std::invalid_argument("gen_failure_weibull: parameters must be positive");
  }
  if (coeffs.size() != X.cols()) {
    throw std::invalid_argument("gen_failure_weibull: coefficient length mismatch");
  }
  const Eigen::VectorXd linear = X * coeffs;
  Eigen::VectorXd t(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    t[i] = weibull_inverse(rng.uniform(), eta * std::exp(linear[i]), nu);
  }
  return t;
}

Eigen::VectorXd gen_failure_weibull(const Eigen::MatrixXd& X, double eta, double nu,
                                    const Eigen::VectorXd& coeffs, std::uint64_t seed) {
  RngStream rng(seed, streams::kFailure);
  return gen_failure_weibull(X, eta, nu, coeffs, rng);
}

Eigen::VectorXd gen_failure_aft(const Eigen::MatrixXd& X, const Eigen::VectorXd& coeffs,
                                RngStream& rng, double mu0, double sigma) {
  if (coeffs.size() != X.cols()) {
    throw std::invalid_argument("gen_failure_aft: coefficient length mismatch");
  }
  const Eigen::VectorXd linear = X * coeffs;
  Eigen::VectorXd t(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    t[i] = std::exp(mu0 - linear[i] + sigma * rng.normal());
  }
  return t;
}

Eigen::VectorXd gen_failure_aft(const Eigen::MatrixXd& X, const Eigen::VectorXd& coeffs,
                                std::uint64_t seed, double mu0, double sigma) {
  RngStream rng(seed, streams::kFailure);
  return gen_failure_aft(X, coeffs, rng, mu0, sigma);
}

Eigen::VectorXd gen_censoring(const Eigen::MatrixXd& X, const CensoringSpec& spec,
                              RngStream& rng) {
  Eigen::VectorXd c(X.rows());
  if (const auto* uniform = std::get_if<UniformCensoring>(&spec)) {
    if (!(uniform->hi > uniform->lo)) {
      throw std::invalid_argument("gen_censoring: uniform bounds inverted");
    }
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      c[i] = rng.uniform(uniform->lo, uniform->hi);
    }
    return c;
  }
  const auto& weibull = std::get<WeibullCensoring>(spec);
  if (!(weibull.eta > 0.0) || !(weibull.nu > 0.0)) {
    throw std::invalid_argument("gen_censoring: parameters must be positive");
  }
  if (weibull.coeffs.size() != static_cast<Eigen::Index>(weibull.columns.size())) {
    throw std::invalid_argument("gen_censoring: coefficient/column count mismatch");
  }
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    double linear = 0.0;
    for (std::size_t k = 0; k < weibull.columns.size(); ++k) {
      const int col = weibull.columns[k];
      if (col < 0 || col >= X.cols()) {
        throw std::invalid_argument("gen_censoring: column index out of range");
      }
      linear += weibull.coeffs[static_cast<Eigen::Index>(k)] * X(i, col);
    }
    c[i] = weibull_inverse(rng.uniform(), weibull.eta * std::exp(linear), weibull.nu);
  }
  return c;
}

Eigen::VectorXd gen_censoring(const Eigen::MatrixXd& X, const CensoringSpec& spec,
                              std::uint64_t seed) {
  RngStream rng(seed, streams::kCensoring);
  return gen_censoring(X, spec, rng);
}

DomainAssignment assign_domains(const Eigen::MatrixXd& X,
                                const std::vector<Eigen::VectorXd>& omegas, double q,
                                RngStream& rng) {
  if (omegas.empty()) throw std::invalid_argument("assign_domains: need at least one source");
  for (const auto& omega : omegas) {
    if (omega.size() != X.cols()) {
      throw std::invalid_argument("assign_domains: omega length mismatch");
    }
  }
  const int n_sources = static_cast<int>(omegas.size());

  DomainAssignment out;
  out.domain.resize(static_cast<std::size_t>(X.rows()));
  out.membership.resize(X.rows(), n_sources + 1);

  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    // Softmax over {q * x.omega_j} plus 0 for the target; with one source this
    // is logistic(q * x.omega).
    double norm = 1.0;
    for (int m = 0; m < n_sources; ++m) {
      out.membership(i, m) = std::exp(q * X.row(i).dot(omegas[static_cast<std::size_t>(m)]));
      norm += out.membership(i, m);
    }
    for (int m = 0; m < n_sources; ++m) out.membership(i, m) /= norm;
    out.membership(i, n_sources) = 1.0 / norm;

    const double u = rng.uniform();
    double cum = 0.0;
    std::int32_t label = kTargetDomain;
    for (int m = 0; m < n_sources; ++m) {
      cum += out.membership(i, m);
      if (u < cum) {
        label = m;
        break;
      }
    }
    out.domain[static_cast<std::size_t>(i)] = label;
  }
  return out;
}

DomainAssignment assign_domains(const Eigen::MatrixXd& X,
                                const std::vector<Eigen::VectorXd>& omegas, double q,
                                std::uint64_t seed) {
  RngStream rng(seed, streams::kDomain);
  return assign_domains(X, omegas, q, rng);
}

GeneratedCohort generate_cohort(const ScenarioSpec& spec, int replication) {
  RngStream normal(spec.seed, rep_stream(streams::kCovariatesNormal, replication));
  RngStream b3(spec.seed, rep_stream(streams::kCovariatesBinary3, replication));
  RngStream b4(spec.seed, rep_stream(streams::kCovariatesBinary4, replication));
  RngStream failure(spec.seed, rep_stream(streams::kFailure, replication));
  RngStream censoring(spec.seed, rep_stream(streams::kCensoring, replication));
  RngStream domain(spec.seed, rep_stream(streams::kDomain, replication));

  GeneratedCohort cohort;
  Eigen::MatrixXd X = gen_covariates(spec.n_total, normal, b3, b4);

  if (const auto* weibull = std::get_if<WeibullHazard>(&spec.hazard)) {
    cohort.true_time =
        gen_failure_weibull(X, weibull->eta, weibull->nu, weibull->coeffs, failure);
  } else {
    const auto& aft = std::get<LogNormalAft>(spec.hazard);
    cohort.true_time = gen_failure_aft(X, aft.coeffs, failure, aft.mu0, aft.sigma);
  }
  cohort.true_censor = gen_censoring(X, spec.censoring, censoring);

  DomainAssignment domains = assign_domains(X, spec.shift.omegas, spec.shift.q, domain);
  cohort.membership = std::move(domains.membership);

  const int n = spec.n_total;
  cohort.data.covariates = std::move(X);
  cohort.data.observed_time.resize(n);
  cohort.data.event.resize(static_cast<std::size_t>(n));
  cohort.data.domain = std::move(domains.domain);
  for (int i = 0; i < n; ++i) {
    const double t = cohort.true_time[i];
    const double c = cohort.true_censor[i];
    cohort.data.observed_time[i] = std::min(t, c);
    cohort.data.event[static_cast<std::size_t>(i)] = t <= c ? 1 : 0;
  }
  if (std::holds_alternative<WeibullCensoring>(spec.censoring)) {
    cohort.data.strata.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      cohort.data.strata[static_cast<std::size_t>(i)] = static_cast<std::int32_t>(
          2.0 * cohort.data.covariates(i, 3) + cohort.data.covariates(i, 4));
    }
  }
  cohort.data.validate();
  return cohort;
}

}  // namespace survcal
