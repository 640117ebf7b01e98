#pragma once

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include "survcal/learners.hpp"

namespace survcal {

enum class AuditorKind { Ridge, Tree };

struct AuditorConfig {
  AuditorKind kind = AuditorKind::Ridge;
  double ridge_lambda = 1.0;
  std::optional<Eigen::Index> ridge_intercept_col = Eigen::Index{0};
  int tree_depth = 2;
  int tree_min_leaf = 10;
};

// A fitted auditing function with outputs clamped to [-clamp, clamp]. A bare
// double is the constant auditor used for buckets too small to fit on.
struct FittedAuditor {
  std::variant<double, LinearModel, RegressionTree> fn = 0.0;
  double clamp = 1.0;

  double predict_row(const Eigen::RowVectorXd& x) const;
};

struct Correction {
  double eta = 0.0;  // signed step, negative when the audit correlation was negative
  int bucket = 1;    // 1-based bucket index the auditor was trained on
  FittedAuditor auditor;
};

struct CalibrationConfig {
  double alpha = 0.02;
  double eta = 0.3;
  int n_buckets = 5;
  int max_iters = 200;
  AuditorConfig auditor;
  double range_max = 1.0;  // prediction range bound: 1 for SP, horizon for RM
  double clamp = 1.0;      // auditor output bound
  bool global_auditors = false;  // true = ungated updates (multiaccuracy mode)
  std::optional<std::pair<double, double>> clip;  // reporting clip, off by default
};

// Step-size rule matching the convergence analysis: alpha / (2 * clamp^2).
double prescribed_step_size(double alpha, double clamp);

// 1-based bucket index of a prediction value. Boundary values go to the lower
// bucket except 0, which goes to bucket 1; values outside [0, range_max] go to
// the nearest end bucket.
int bucket_of(double value, int n_buckets, double range_max);

// Index sets S_k over [0, range_max] split into n_buckets value bands.
// Element k of the result is bucket k+1. Buckets may be empty.
std::vector<std::vector<int>> make_buckets(const Eigen::VectorXd& predictions,
                                           int n_buckets, double range_max);

// Fit one auditor to predict residuals from covariates using only the bucket
// rows. Buckets too small for the configured auditor get a constant auditor
// equal to the clamped mean residual.
FittedAuditor audit_bucket(const Eigen::MatrixXd& X,
                           const Eigen::VectorXd& residuals,
                           const std::vector<int>& bucket,
                           const AuditorConfig& cfg, double clamp);

using PredictFn = std::function<Eigen::VectorXd(const Eigen::MatrixXd&)>;

PredictFn constant_predictor(double value);
PredictFn predictor_from(LinearModel model);
PredictFn predictor_from(Forest model);

// Base predictor plus ordered signed corrections. Each correction applies only
// to rows whose running prediction falls in the correction's bucket (unless
// global_auditors is set), so a replayed predict() reproduces the exact values
// seen while calibrating.
struct AdditivePredictor {
  PredictFn base;
  std::vector<Correction> corrections;
  int n_buckets = 5;
  double range_max = 1.0;
  bool global_auditors = false;
  std::optional<std::pair<double, double>> clip;

  Eigen::VectorXd predict(const Eigen::MatrixXd& X) const;
  PredictFn as_fn() const;
};

enum class HaltReason { Converged, MaxIters };

struct AuditRecord {
  int iteration = 0;
  int bucket = 1;
  double delta = 0.0;       // signed audit value of the chosen bucket
  double audit_stat = 0.0;  // max_k |Delta_k| on the validation set
  double mse = 0.0;         // calibration-set squared loss vs pseudo-observations
};

struct AuditTrace {
  std::vector<AuditRecord> records;
  HaltReason halt = HaltReason::Converged;
};

struct CalibrationResult {
  AdditivePredictor predictor;
  AuditTrace trace;
};

// Boosting post-processing against pseudo-observations: bucket the calibration
// set by current predictions, fit one gated auditor per nonempty bucket, pick
// the bucket with the largest validation audit |Delta_k| (ties to the lowest
// index), and step the predictor until every |Delta_k| <= alpha or max_iters.
CalibrationResult calibrate(const PredictFn& base, const Eigen::MatrixXd& X,
                            const Eigen::VectorXd& pseudo,
                            const std::vector<int>& calibration_rows,
                            const std::vector<int>& validation_rows,
                            const CalibrationConfig& cfg);

// Post-hoc audit: refit auditors per bucket on the fit set and return
// max_k |Delta_k| evaluated on the eval set, mirroring calibrate's inner loop.
double audit_statistic(const PredictFn& predictor, const Eigen::MatrixXd& X_fit,
                       const Eigen::VectorXd& pseudo_fit,
                       const Eigen::MatrixXd& X_eval,
                       const Eigen::VectorXd& pseudo_eval,
                       const CalibrationConfig& cfg);
double audit_statistic(const PredictFn& predictor, const Eigen::MatrixXd& X,
                       const Eigen::VectorXd& pseudo,
                       const CalibrationConfig& cfg);

}  // namespace survcal
