#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace survcal {

// Unweighted mean of target-domain pseudo-observations over a subgroup; the
// benchmark every method is scored against.
double target_benchmark(const Eigen::VectorXd& pseudo_col,
                        const std::vector<int>& subgroup_rows);

struct BiasResult {
  double absolute = 0.0;
  std::optional<double> relative;  // empty when |benchmark| <= 1e-9
};

BiasResult bias(double estimate, double benchmark);

struct CIndexOptions {
  // The displayed pair count uses strict inequality, so tied predictions earn
  // nothing; tie_credit scores ties 1/2 like common implementations.
  bool tie_credit = false;
};

// Concordance between predicted survival and observed ordering: over pairs
// (i, j) with an event at i and T_j > T_i, the fraction with S(t|X_j) >
// S(t|X_i). Throws "no comparable pairs" when the denominator is empty.
double c_index(const Eigen::VectorXd& predictions, const Eigen::VectorXd& times,
               const std::vector<std::uint8_t>& events, CIndexOptions opts = {});

struct EvalRow {
  std::string method;
  std::string subgroup;
  double horizon = 0.0;
  std::optional<double> estimate;
  std::optional<double> benchmark;
  std::optional<double> abs_bias;
  std::optional<double> rel_bias;
  std::optional<double> se;
  int reps = 0;
};

struct EvalReport {
  std::vector<EvalRow> rows;

  // Stable column order: method, subgroup, horizon, estimate, benchmark,
  // abs_bias, rel_bias, se, reps. Undefined cells print NA.
  void write_csv(const std::string& path) const;
};

}  // namespace survcal
