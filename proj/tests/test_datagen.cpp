#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "oracles.hpp"
#include "survcal/datagen.hpp"

using namespace survcal;

namespace {

Eigen::VectorXd vec5(double a, double b, double c, double d, double e) {
  Eigen::VectorXd v(5);
  v << a, b, c, d, e;
  return v;
}

double sample_median(Eigen::VectorXd v) {
  std::sort(v.data(), v.data() + v.size());
  const Eigen::Index n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

TEST_CASE("covariate moments match the design") {
  const int n = 100000;
  const Eigen::MatrixXd X = gen_covariates(n, 1234);
  REQUIRE(X.cols() == 5);

  CHECK((X.col(0).array() == 1.0).all());

  const double mean1 = X.col(1).mean();
  const double mean2 = X.col(2).mean();
  const double var1 = (X.col(1).array() - mean1).square().sum() / (n - 1);
  const double var2 = (X.col(2).array() - mean2).square().sum() / (n - 1);
  const double cov =
      ((X.col(1).array() - mean1) * (X.col(2).array() - mean2)).sum() / (n - 1);
  CHECK(std::abs(var1 - 2.0) < 0.05);
  CHECK(std::abs(var2 - 2.0) < 0.05);
  CHECK(std::abs(cov / std::sqrt(var1 * var2) - 0.25) < 0.02);

  CHECK(std::abs(X.col(3).mean() - 0.4) < 0.01);
  // P(X4 = 1 | X3) = 0.1 X3 + 0.2.
  double x4_given_x3 = 0.0, n_x3 = 0.0, x4_given_not = 0.0, n_not = 0.0;
  for (int i = 0; i < n; ++i) {
    if (X(i, 3) == 1.0) {
      x4_given_x3 += X(i, 4);
      n_x3 += 1.0;
    } else {
      x4_given_not += X(i, 4);
      n_not += 1.0;
    }
  }
  CHECK(std::abs(x4_given_x3 / n_x3 - 0.3) < 0.01);
  CHECK(std::abs(x4_given_not / n_not - 0.2) < 0.01);
}

TEST_CASE("generators are bit-reproducible under a fixed seed") {
  const Eigen::MatrixXd a = gen_covariates(500, 77);
  const Eigen::MatrixXd b = gen_covariates(500, 77);
  CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
  const Eigen::MatrixXd c = gen_covariates(500, 78);
  CHECK((a - c).cwiseAbs().maxCoeff() > 0.0);

  const Eigen::VectorXd t1 = gen_failure_weibull(a, 0.0001, 3.0, vec5(0, 2, 1, -1.2, 0.8), 9);
  const Eigen::VectorXd t2 = gen_failure_weibull(a, 0.0001, 3.0, vec5(0, 2, 1, -1.2, 0.8), 9);
  CHECK((t1 - t2).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("weibull failure times match the closed-form median") {
  const int n = 100000;
  Eigen::MatrixXd X = Eigen::MatrixXd::Zero(n, 5);  // zero linear predictor
  const Eigen::VectorXd t = gen_failure_weibull(X, 0.0001, 3.0, vec5(0, 2, 1, -1.2, 0.8), 31);
  const double want = oracles::weibull_median(0.0001, 3.0, 0.0);
  CHECK(want == doctest::Approx(19.0649).epsilon(1e-3));
  CHECK(std::abs(sample_median(t) - want) < 0.2);
}

TEST_CASE("larger linear predictor means stochastically smaller times") {
  const int n = 50000;
  Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(n, 5);
  Eigen::MatrixXd one = Eigen::MatrixXd::Zero(n, 5);
  one.col(0).setConstant(1.0);
  Eigen::VectorXd coeffs = vec5(1, 0, 0, 0, 0);  // linear predictor = x0
  const Eigen::VectorXd t0 = gen_failure_weibull(zero, 0.0001, 3.0, coeffs, 8);
  const Eigen::VectorXd t1 = gen_failure_weibull(one, 0.0001, 3.0, coeffs, 8);
  const double frac0 = (t0.array() > 30.0).cast<double>().mean();
  const double frac1 = (t1.array() > 30.0).cast<double>().mean();
  CHECK(frac1 < frac0);
}

TEST_CASE("aft times match the log-normal design") {
  const int n = 100000;
  Eigen::MatrixXd X = Eigen::MatrixXd::Zero(n, 5);
  const Eigen::VectorXd t = gen_failure_aft(X, vec5(0, 2, 1, -1.2, 0.8), 21);
  CHECK(std::abs(sample_median(t) - std::exp(3.5)) < 0.5);
  const Eigen::VectorXd logt = t.array().log();
  const double mean = logt.mean();
  const double var = (logt.array() - mean).square().sum() / (n - 1);
  CHECK(std::abs(var - 0.64) < 0.02);
}

TEST_CASE("censoring generators") {
  const int n = 100000;
  const Eigen::MatrixXd X = gen_covariates(n, 3);
  SUBCASE("uniform mean") {
    const Eigen::VectorXd c = gen_censoring(X, UniformCensoring{0.0, 120.0}, 5);
    CHECK(std::abs(c.mean() - 60.0) < 0.5);
  }
  SUBCASE("covariate-dependent weibull produces a sane censoring fraction") {
    WeibullCensoring spec;
    spec.eta = 0.0001;
    spec.nu = 2.7;
    spec.coeffs = Eigen::VectorXd(4);
    spec.coeffs << 1.0, 0.5, -0.5, -0.5;
    spec.columns = {0, 2, 3, 4};
    const Eigen::VectorXd c = gen_censoring(X, spec, 5);
    const Eigen::VectorXd t = gen_failure_weibull(X, 0.0001, 3.0, vec5(0, 2, 1, -1.2, 0.8), 5);
    const double censored = (c.array() < t.array()).cast<double>().mean();
    MESSAGE("censoring fraction: ", censored);
    CHECK(censored > 0.1);
    CHECK(censored < 0.7);
  }
}

TEST_CASE("domain assignment") {
  SUBCASE("null shift splits evenly") {
    const int n = 100000;
    const Eigen::MatrixXd X = gen_covariates(n, 6);
    const auto domains = assign_domains(X, {Eigen::VectorXd::Zero(5)}, 1.0, 6);
    double frac = 0.0;
    for (auto d : domains.domain) frac += d == 0 ? 1.0 : 0.0;
    frac /= n;
    CHECK(std::abs(frac - 0.5) < 0.01);
    CHECK((domains.membership.col(0).array() == 0.5).all());
  }
  SUBCASE("q scales the log-odds linearly") {
    Eigen::MatrixXd X(1, 5);
    X << 1, 0.7, -0.4, 1, 0;
    const Eigen::VectorXd omega = vec5(0.0, 0.5, 0.45, -0.9, -0.7);
    for (double q : {1.0, 2.0, 3.0}) {
      const auto domains = assign_domains(X, {omega}, q, 1);
      const double p = domains.membership(0, 0);
      const double logit = std::log(p / (1.0 - p));
      CHECK(logit == doctest::Approx(q * X.row(0).dot(omega)).epsilon(1e-9));
    }
  }
  SUBCASE("shift direction over-represents the binaries in the target") {
    const int n = 100000;
    const Eigen::MatrixXd X = gen_covariates(n, 10);
    const auto domains = assign_domains(X, {vec5(0.0, 0.5, 0.45, -0.9, -0.7)}, 3.0, 10);
    double src_x3 = 0.0, src_n = 0.0, tgt_x3 = 0.0, tgt_n = 0.0;
    double src_x4 = 0.0, tgt_x4 = 0.0;
    for (int i = 0; i < n; ++i) {
      if (domains.domain[static_cast<std::size_t>(i)] == 0) {
        src_x3 += X(i, 3);
        src_x4 += X(i, 4);
        src_n += 1.0;
      } else {
        tgt_x3 += X(i, 3);
        tgt_x4 += X(i, 4);
        tgt_n += 1.0;
      }
    }
    CHECK(tgt_x3 / tgt_n > src_x3 / src_n);
    CHECK(tgt_x4 / tgt_n > src_x4 / src_n);
  }
  SUBCASE("multi-source memberships are a proper distribution") {
    const Eigen::MatrixXd X = gen_covariates(200, 12);
    const auto domains = assign_domains(
        X, {vec5(0, 0.5, 0.45, -0.9, -0.7), vec5(0, 0.4, 0.9, -0.5, -0.9)}, 1.0, 12);
    REQUIRE(domains.membership.cols() == 3);
    for (int i = 0; i < 200; ++i) {
      CHECK(domains.membership.row(i).sum() == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(domains.membership.row(i).minCoeff() > 0.0);
    }
  }
}

TEST_CASE("cohorts are observationally consistent") {
  ScenarioSpec spec;
  spec.n_total = 2000;
  spec.hazard = WeibullHazard{0.0001, 3.0, vec5(0, 2, 1, -1.2, 0.8)};
  WeibullCensoring cens;
  cens.eta = 0.0001;
  cens.nu = 2.7;
  cens.coeffs = Eigen::VectorXd(4);
  cens.coeffs << 1.0, 0.5, -0.5, -0.5;
  cens.columns = {0, 2, 3, 4};
  spec.censoring = cens;
  spec.shift = ShiftSpec{{vec5(0.0, 0.5, 0.45, -0.9, -0.7)}, 2.0};
  spec.seed = 314;
  spec.grid = {30.0};

  const GeneratedCohort cohort = generate_cohort(spec, 3);
  for (int i = 0; i < spec.n_total; ++i) {
    const double t = cohort.true_time[i];
    const double c = cohort.true_censor[i];
    CHECK(cohort.data.observed_time[i] == std::min(t, c));
    CHECK(cohort.data.event[static_cast<std::size_t>(i)] == (t <= c ? 1 : 0));
  }
  // Covariate-dependent censoring carries the (X3, X4) cell as the stratum.
  REQUIRE(cohort.data.has_strata());
  for (int i = 0; i < spec.n_total; ++i) {
    const int want = static_cast<int>(2 * cohort.data.covariates(i, 3) +
                                      cohort.data.covariates(i, 4));
    CHECK(cohort.data.strata[static_cast<std::size_t>(i)] == want);
  }
  // Replications are distinct but reproducible.
  const GeneratedCohort again = generate_cohort(spec, 3);
  CHECK((cohort.data.observed_time - again.data.observed_time).cwiseAbs().maxCoeff() == 0.0);
  const GeneratedCohort other = generate_cohort(spec, 4);
  CHECK((cohort.data.observed_time - other.data.observed_time).cwiseAbs().maxCoeff() > 0.0);
}
