#include "survcal/mcboost.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace survcal {

double FittedAuditor::predict_row(const Eigen::RowVectorXd& x) const {
  double v = 0.0;
  if (const double* c = std::get_if<double>(&fn)) {
    v = *c;
  } else if (const LinearModel* lm = std::get_if<LinearModel>(&fn)) {
    v = lm->predict_row(x);
  } else {
    v = std::get<RegressionTree>(fn).predict_row(x);
  }
  return std::clamp(v, -clamp, clamp);
}

double prescribed_step_size(double alpha, double clamp) {
  if (!(alpha > 0.0) || !(clamp > 0.0)) {
    throw std::invalid_argument("prescribed_step_size: alpha and clamp must be positive");
  }
  return alpha / (2.0 * clamp * clamp);
}

int bucket_of(double value, int n_buckets, double range_max) {
  if (value <= 0.0) return 1;
  if (value >= range_max) return n_buckets;
  const int k = static_cast<int>(std::ceil(value * n_buckets / range_max));
  return std::clamp(k, 1, n_buckets);
}

std::vector<std::vector<int>> make_buckets(const Eigen::VectorXd& predictions,
                                           int n_buckets, double range_max) {
  if (n_buckets < 1) throw std::invalid_argument("make_buckets: need at least one bucket");
  std::vector<std::vector<int>> buckets(static_cast<std::size_t>(n_buckets));
  for (Eigen::Index i = 0; i < predictions.size(); ++i) {
    buckets[static_cast<std::size_t>(bucket_of(predictions[i], n_buckets, range_max) - 1)]
        .push_back(static_cast<int>(i));
  }
  return buckets;
}

FittedAuditor audit_bucket(const Eigen::MatrixXd& X,
                           const Eigen::VectorXd& residuals,
                           const std::vector<int>& bucket,
                           const AuditorConfig& cfg, double clamp) {
  if (bucket.empty()) throw std::invalid_argument("audit_bucket: empty bucket");

  const int min_fit = cfg.kind == AuditorKind::Tree ? std::max(2, cfg.tree_min_leaf) : 2;
  FittedAuditor auditor;
  auditor.clamp = clamp;

  if (static_cast<int>(bucket.size()) < min_fit) {
    double mean = 0.0;
    for (int i : bucket) mean += residuals[i];
    mean /= static_cast<double>(bucket.size());
    auditor.fn = std::clamp(mean, -clamp, clamp);
    return auditor;
  }

  Eigen::MatrixXd Xb(static_cast<Eigen::Index>(bucket.size()), X.cols());
  Eigen::VectorXd rb(static_cast<Eigen::Index>(bucket.size()));
  for (std::size_t k = 0; k < bucket.size(); ++k) {
    Xb.row(static_cast<Eigen::Index>(k)) = X.row(bucket[k]);
    rb[static_cast<Eigen::Index>(k)] = residuals[bucket[k]];
  }
  if (cfg.kind == AuditorKind::Ridge) {
    auditor.fn = fit_ridge(Xb, rb, cfg.ridge_lambda, cfg.ridge_intercept_col);
  } else {
    auditor.fn = fit_tree(Xb, rb, cfg.tree_depth, cfg.tree_min_leaf);
  }
  return auditor;
}

PredictFn constant_predictor(double value) {
  return [value](const Eigen::MatrixXd& X) {
    return Eigen::VectorXd::Constant(X.rows(), value).eval();
  };
}

PredictFn predictor_from(LinearModel model) {
  return [model = std::move(model)](const Eigen::MatrixXd& X) { return model.predict(X); };
}

PredictFn predictor_from(Forest model) {
  return [model = std::move(model)](const Eigen::MatrixXd& X) { return model.predict(X); };
}

Eigen::VectorXd AdditivePredictor::predict(const Eigen::MatrixXd& X) const {
  Eigen::VectorXd values = base(X);
  for (const Correction& corr : corrections) {
    for (Eigen::Index i = 0; i < values.size(); ++i) {
      if (global_auditors ||
          bucket_of(values[i], n_buckets, range_max) == corr.bucket) {
        values[i] -= corr.eta * corr.auditor.predict_row(X.row(i));
      }
    }
  }
  if (clip) {
    for (Eigen::Index i = 0; i < values.size(); ++i) {
      values[i] = std::clamp(values[i], clip->first, clip->second);
    }
  }
  return values;
}

PredictFn AdditivePredictor::as_fn() const {
  return [copy = *this](const Eigen::MatrixXd& X) { return copy.predict(X); };
}

namespace {

struct BucketAudit {
  int bucket = 0;          // 1-based; 0 = none available
  double delta = 0.0;      // signed audit value of the chosen bucket
  double max_abs = 0.0;    // max over buckets of |Delta_k|
  std::vector<FittedAuditor> auditors;  // indexed by bucket-1, fitted or default
  std::vector<bool> fitted;
};

// One round of Algorithm-style auditing: fit per-bucket auditors on the fit
// split, evaluate each candidate's Delta_k on the eval split.
BucketAudit run_audit(const Eigen::MatrixXd& X, const Eigen::VectorXd& pseudo,
                      const std::vector<int>& fit_rows,
                      const Eigen::VectorXd& fit_preds,
                      const std::vector<int>& eval_rows,
                      const Eigen::VectorXd& eval_preds,
                      const CalibrationConfig& cfg) {
  BucketAudit result;
  result.auditors.resize(static_cast<std::size_t>(cfg.n_buckets));
  result.fitted.assign(static_cast<std::size_t>(cfg.n_buckets), false);

  Eigen::VectorXd residuals = Eigen::VectorXd::Zero(X.rows());
  std::vector<std::vector<int>> buckets(static_cast<std::size_t>(cfg.n_buckets));
  for (std::size_t k = 0; k < fit_rows.size(); ++k) {
    const int row = fit_rows[k];
    residuals[row] = fit_preds[static_cast<Eigen::Index>(k)] - pseudo[row];
    const int b = bucket_of(fit_preds[static_cast<Eigen::Index>(k)], cfg.n_buckets,
                            cfg.range_max);
    buckets[static_cast<std::size_t>(b - 1)].push_back(row);
  }

  // Eval-side bucket membership follows the current predictions there.
  std::vector<int> eval_bucket(eval_rows.size());
  for (std::size_t k = 0; k < eval_rows.size(); ++k) {
    eval_bucket[k] =
        bucket_of(eval_preds[static_cast<Eigen::Index>(k)], cfg.n_buckets, cfg.range_max);
  }

  for (int b = 1; b <= cfg.n_buckets; ++b) {
    const auto& bucket = buckets[static_cast<std::size_t>(b - 1)];
    if (bucket.empty()) continue;  // empty buckets are skipped, not errors
    FittedAuditor auditor = audit_bucket(X, residuals, bucket, cfg.auditor, cfg.clamp);

    double delta = 0.0;
    for (std::size_t k = 0; k < eval_rows.size(); ++k) {
      if (!cfg.global_auditors && eval_bucket[k] != b) continue;
      const int row = eval_rows[k];
      delta += auditor.predict_row(X.row(row)) *
               (eval_preds[static_cast<Eigen::Index>(k)] - pseudo[row]);
    }
    delta /= static_cast<double>(eval_rows.size());

    result.auditors[static_cast<std::size_t>(b - 1)] = std::move(auditor);
    result.fitted[static_cast<std::size_t>(b - 1)] = true;
    if (std::abs(delta) > result.max_abs) {
      result.max_abs = std::abs(delta);
      result.delta = delta;
      result.bucket = b;
    } else if (result.bucket == 0) {
      result.delta = delta;
      result.bucket = b;
    }
  }
  return result;
}

}  // namespace

CalibrationResult calibrate(const PredictFn& base, const Eigen::MatrixXd& X,
                            const Eigen::VectorXd& pseudo,
                            const std::vector<int>& calibration_rows,
                            const std::vector<int>& validation_rows,
                            const CalibrationConfig& cfg) {
  if (!(cfg.alpha > 0.0)) throw std::invalid_argument("calibrate: alpha must be positive");
  if (validation_rows.empty()) throw std::invalid_argument("validation set required");
  if (calibration_rows.empty()) throw std::invalid_argument("calibrate: empty calibration set");

  CalibrationResult result;
  result.predictor.base = base;
  result.predictor.n_buckets = cfg.n_buckets;
  result.predictor.range_max = cfg.range_max;
  result.predictor.global_auditors = cfg.global_auditors;
  result.predictor.clip = cfg.clip;
  result.trace.halt = HaltReason::MaxIters;

  auto gather = [&X](const std::vector<int>& rows) {
    Eigen::MatrixXd sub(static_cast<Eigen::Index>(rows.size()), X.cols());
    for (std::size_t k = 0; k < rows.size(); ++k) sub.row(static_cast<Eigen::Index>(k)) = X.row(rows[k]);
    return sub;
  };
  Eigen::VectorXd calib_preds = base(gather(calibration_rows));
  Eigen::VectorXd val_preds = base(gather(validation_rows));

  for (int iter = 0; iter < cfg.max_iters; ++iter) {
    const BucketAudit audit = run_audit(X, pseudo, calibration_rows, calib_preds,
                                        validation_rows, val_preds, cfg);

    double mse = 0.0;
    for (std::size_t k = 0; k < calibration_rows.size(); ++k) {
      const double r = calib_preds[static_cast<Eigen::Index>(k)] - pseudo[calibration_rows[k]];
      mse += r * r;
    }
    mse /= static_cast<double>(calibration_rows.size());

    result.trace.records.push_back(
        AuditRecord{iter, std::max(audit.bucket, 1), audit.delta, audit.max_abs, mse});

    if (audit.bucket == 0 || audit.max_abs <= cfg.alpha) {
      result.trace.halt = HaltReason::Converged;
      return result;
    }

    Correction corr;
    corr.eta = audit.delta > 0.0 ? cfg.eta : -cfg.eta;
    corr.bucket = audit.bucket;
    corr.auditor = audit.auditors[static_cast<std::size_t>(audit.bucket - 1)];
    result.predictor.corrections.push_back(corr);

    auto apply = [&](const std::vector<int>& rows, Eigen::VectorXd& preds) {
      for (std::size_t k = 0; k < rows.size(); ++k) {
        double& v = preds[static_cast<Eigen::Index>(k)];
        if (cfg.global_auditors ||
            bucket_of(v, cfg.n_buckets, cfg.range_max) == corr.bucket) {
          v -= corr.eta * corr.auditor.predict_row(X.row(rows[k]));
        }
      }
    };
    apply(calibration_rows, calib_preds);
    apply(validation_rows, val_preds);
  }
  return result;
}

double audit_statistic(const PredictFn& predictor, const Eigen::MatrixXd& X_fit,
                       const Eigen::VectorXd& pseudo_fit,
                       const Eigen::MatrixXd& X_eval,
                       const Eigen::VectorXd& pseudo_eval,
                       const CalibrationConfig& cfg) {
  if (X_eval.rows() == 0) throw std::invalid_argument("audit_statistic: empty eval set");

  const Eigen::Index n_fit = X_fit.rows();
  const Eigen::Index n_eval = X_eval.rows();
  Eigen::MatrixXd stacked(n_fit + n_eval, X_fit.cols());
  stacked.topRows(n_fit) = X_fit;
  stacked.bottomRows(n_eval) = X_eval;
  Eigen::VectorXd pseudo(n_fit + n_eval);
  pseudo.head(n_fit) = pseudo_fit;
  pseudo.tail(n_eval) = pseudo_eval;

  std::vector<int> fit_rows(static_cast<std::size_t>(n_fit));
  std::vector<int> eval_rows(static_cast<std::size_t>(n_eval));
  for (Eigen::Index i = 0; i < n_fit; ++i) fit_rows[static_cast<std::size_t>(i)] = static_cast<int>(i);
  for (Eigen::Index i = 0; i < n_eval; ++i) {
    eval_rows[static_cast<std::size_t>(i)] = static_cast<int>(n_fit + i);
  }

  const Eigen::VectorXd fit_preds = predictor(X_fit);
  const Eigen::VectorXd eval_preds = predictor(X_eval);
  return run_audit(stacked, pseudo, fit_rows, fit_preds, eval_rows, eval_preds, cfg).max_abs;
}

double audit_statistic(const PredictFn& predictor, const Eigen::MatrixXd& X,
                       const Eigen::VectorXd& pseudo,
                       const CalibrationConfig& cfg) {
  return audit_statistic(predictor, X, pseudo, X, pseudo, cfg);
}

}  // namespace survcal
