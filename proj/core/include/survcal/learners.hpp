#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <vector>

namespace survcal {

struct LinearModel {
  Eigen::VectorXd weights;

  double predict_row(const Eigen::RowVectorXd& x) const { return x.dot(weights); }
  Eigen::VectorXd predict(const Eigen::MatrixXd& X) const { return X * weights; }
};

// Least squares via a rank-revealing QR. Rank-deficient designs fall through
// to a tiny ridge (lambda = 1e-8) unless ridge_fallback is disabled, in which
// case they throw.
LinearModel fit_ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                    bool ridge_fallback = true);

// Closed-form ridge. The intercept column (all-ones, by convention column 0)
// is excluded from the penalty; pass std::nullopt to penalize every column.
LinearModel fit_ridge(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                      double lambda,
                      std::optional<Eigen::Index> intercept_col = Eigen::Index{0});

struct LogisticModel {
  Eigen::VectorXd weights;
  bool converged = true;

  Eigen::VectorXd predict_proba(const Eigen::MatrixXd& X) const;
  double predict_proba_row(const Eigen::RowVectorXd& x) const;
};

// Newton/IRLS with an L2 jitter (1e-6) that keeps separated problems finite.
// Stops when the gradient infinity-norm drops below tol. Throws
// "degenerate labels" when only one class is present.
LogisticModel fit_logistic(const Eigen::MatrixXd& X,
                           const std::vector<std::uint8_t>& labels,
                           int max_iter = 100, double tol = 1e-8);

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;  // leaf mean
};

class RegressionTree {
 public:
  double predict_row(const Eigen::RowVectorXd& x) const;
  Eigen::VectorXd predict(const Eigen::MatrixXd& X) const;

  const std::vector<TreeNode>& nodes() const { return nodes_; }
  int max_depth() const { return max_depth_; }
  int min_leaf() const { return min_leaf_; }

  std::vector<TreeNode> nodes_;
  int max_depth_ = 0;
  int min_leaf_ = 1;
};

// Greedy CART with exhaustive threshold scans over midpoints of sorted unique
// feature values; splits minimize the summed squared error and leaves carry
// the mean of the targets routed to them.
RegressionTree fit_tree(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                        int max_depth, int min_leaf);

struct Forest {
  std::vector<RegressionTree> trees;
  std::uint64_t seed = 0;

  double predict_row(const Eigen::RowVectorXd& x) const;
  Eigen::VectorXd predict(const Eigen::MatrixXd& X) const;
};

// Bagged trees: bootstrap rows per tree, mtry features sampled per split.
// Tree t draws from an RNG stream keyed by (seed, t), so results do not
// depend on growth scheduling.
Forest fit_forest(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                  int n_trees, int max_depth, int mtry, std::uint64_t seed,
                  int min_leaf = 5);

}  // namespace survcal
