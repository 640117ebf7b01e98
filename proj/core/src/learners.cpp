#include "survcal/learners.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "survcal/rng.hpp"

namespace survcal {

namespace {

void check_shapes(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  if (X.rows() != y.size()) throw std::invalid_argument("design/target row mismatch");
  if (X.rows() == 0) throw std::invalid_argument("empty design matrix");
}

}  // namespace

LinearModel fit_ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                    bool ridge_fallback) {
  check_shapes(X, y);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  if (qr.rank() < X.cols()) {
    if (!ridge_fallback) throw std::runtime_error("fit_ols: rank-deficient design");
    return fit_ridge(X, y, 1e-8, std::nullopt);
  }
  return LinearModel{qr.solve(y)};
}

LinearModel fit_ridge(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                      double lambda, std::optional<Eigen::Index> intercept_col) {
  check_shapes(X, y);
  if (!(lambda > 0.0)) throw std::invalid_argument("fit_ridge: lambda must be positive");
  const Eigen::Index d = X.cols();
  Eigen::MatrixXd gram = X.transpose() * X;
  for (Eigen::Index j = 0; j < d; ++j) {
    if (intercept_col && *intercept_col == j) continue;
    gram(j, j) += lambda;
  }
  return LinearModel{gram.ldlt().solve(X.transpose() * y)};
}

Eigen::VectorXd LogisticModel::predict_proba(const Eigen::MatrixXd& X) const {
  Eigen::VectorXd z = X * weights;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const double p = 1.0 / (1.0 + std::exp(-z[i]));
    z[i] = std::clamp(p, 1e-15, 1.0 - 1e-15);
  }
  return z;
}

double LogisticModel::predict_proba_row(const Eigen::RowVectorXd& x) const {
  const double p = 1.0 / (1.0 + std::exp(-x.dot(weights)));
  return std::clamp(p, 1e-15, 1.0 - 1e-15);
}

LogisticModel fit_logistic(const Eigen::MatrixXd& X,
                           const std::vector<std::uint8_t>& labels,
                           int max_iter, double tol) {
  if (X.rows() != static_cast<Eigen::Index>(labels.size())) {
    throw std::invalid_argument("design/label row mismatch");
  }
  const Eigen::Index n = X.rows();
  const Eigen::Index d = X.cols();
  if (n == 0) throw std::invalid_argument("empty design matrix");

  std::size_t positives = 0;
  for (auto v : labels) positives += v ? 1 : 0;
  if (positives == 0 || positives == labels.size()) {
    throw std::invalid_argument("degenerate labels");
  }

  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) y[i] = labels[static_cast<std::size_t>(i)] ? 1.0 : 0.0;

  constexpr double kJitter = 1e-6;
  LogisticModel model;
  model.weights = Eigen::VectorXd::Zero(d);
  model.converged = false;

  for (int iter = 0; iter < max_iter; ++iter) {
    Eigen::VectorXd p = model.predict_proba(X);
    Eigen::VectorXd grad = X.transpose() * (y - p);
    if (grad.lpNorm<Eigen::Infinity>() < tol) {
      model.converged = true;
      break;
    }
    Eigen::VectorXd r = p.array() * (1.0 - p.array());
    r = r.cwiseMax(1e-10);
    Eigen::MatrixXd hessian = X.transpose() * r.asDiagonal() * X;
    hessian.diagonal().array() += kJitter;
    model.weights += hessian.ldlt().solve(grad);
  }
  return model;
}

double RegressionTree::predict_row(const Eigen::RowVectorXd& x) const {
  int node = 0;
  while (nodes_[static_cast<std::size_t>(node)].feature >= 0) {
    const TreeNode& nd = nodes_[static_cast<std::size_t>(node)];
    node = x[nd.feature] <= nd.threshold ? nd.left : nd.right;
  }
  return nodes_[static_cast<std::size_t>(node)].value;
}

Eigen::VectorXd RegressionTree::predict(const Eigen::MatrixXd& X) const {
  Eigen::VectorXd out(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) out[i] = predict_row(X.row(i));
  return out;
}

namespace {

struct SplitChoice {
  int feature = -1;
  double threshold = 0.0;
  double sse = std::numeric_limits<double>::infinity();
};

double subset_mean(const Eigen::VectorXd& y, const std::vector<int>& rows) {
  double s = 0.0;
  for (int i : rows) s += y[i];
  return s / static_cast<double>(rows.size());
}

double subset_sse(const Eigen::VectorXd& y, const std::vector<int>& rows) {
  const double mean = subset_mean(y, rows);
  double s = 0.0;
  for (int i : rows) s += (y[i] - mean) * (y[i] - mean);
  return s;
}

class TreeGrower {
 public:
  TreeGrower(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, int max_depth,
             int min_leaf, int mtry, RngStream* rng)
      : X_(X), y_(y), max_depth_(max_depth), min_leaf_(std::max(1, min_leaf)),
        mtry_(mtry), rng_(rng) {}

  RegressionTree grow(std::vector<int> rows) {
    RegressionTree tree;
    tree.max_depth_ = max_depth_;
    tree.min_leaf_ = min_leaf_;
    build(tree, std::move(rows), 0);
    return tree;
  }

 private:
  int build(RegressionTree& tree, std::vector<int> rows, int depth) {
    const int node_id = static_cast<int>(tree.nodes_.size());
    tree.nodes_.push_back(TreeNode{});
    tree.nodes_[static_cast<std::size_t>(node_id)].value = subset_mean(y_, rows);

    if (depth >= max_depth_ || static_cast<int>(rows.size()) < 2 * min_leaf_) {
      return node_id;
    }
    const SplitChoice split = best_split(rows);
    if (split.feature < 0) return node_id;

    std::vector<int> left, right;
    left.reserve(rows.size());
    right.reserve(rows.size());
    for (int i : rows) {
      (X_(i, split.feature) <= split.threshold ? left : right).push_back(i);
    }
    rows.clear();
    rows.shrink_to_fit();

    tree.nodes_[static_cast<std::size_t>(node_id)].feature = split.feature;
    tree.nodes_[static_cast<std::size_t>(node_id)].threshold = split.threshold;
    const int left_id = build(tree, std::move(left), depth + 1);
    tree.nodes_[static_cast<std::size_t>(node_id)].left = left_id;
    const int right_id = build(tree, std::move(right), depth + 1);
    tree.nodes_[static_cast<std::size_t>(node_id)].right = right_id;
    return node_id;
  }

  std::vector<int> candidate_features() const {
    const int d = static_cast<int>(X_.cols());
    std::vector<int> features(static_cast<std::size_t>(d));
    std::iota(features.begin(), features.end(), 0);
    if (mtry_ <= 0 || mtry_ >= d || rng_ == nullptr) return features;
    // Partial Fisher-Yates; restore ascending order so the scan stays
    // deterministic given the drawn set.
    for (int k = 0; k < mtry_; ++k) {
      const int j = k + static_cast<int>(rng_->uniform_int(static_cast<std::uint32_t>(d - k)));
      std::swap(features[static_cast<std::size_t>(k)], features[static_cast<std::size_t>(j)]);
    }
    features.resize(static_cast<std::size_t>(mtry_));
    std::sort(features.begin(), features.end());
    return features;
  }

  SplitChoice best_split(const std::vector<int>& rows) const {
    SplitChoice best;
    const double parent_sse = subset_sse(y_, rows);
    const int n = static_cast<int>(rows.size());

    std::vector<std::pair<double, double>> xy(static_cast<std::size_t>(n));
    for (int feature : candidate_features()) {
      for (int k = 0; k < n; ++k) {
        xy[static_cast<std::size_t>(k)] = {X_(rows[static_cast<std::size_t>(k)], feature),
                                           y_[rows[static_cast<std::size_t>(k)]]};
      }
      std::sort(xy.begin(), xy.end());

      double left_sum = 0.0, left_sq = 0.0;
      double total_sum = 0.0, total_sq = 0.0;
      for (const auto& [x, yv] : xy) {
        total_sum += yv;
        total_sq += yv * yv;
      }
      for (int k = 0; k < n - 1; ++k) {
        const double yv = xy[static_cast<std::size_t>(k)].second;
        left_sum += yv;
        left_sq += yv * yv;
        if (xy[static_cast<std::size_t>(k)].first == xy[static_cast<std::size_t>(k + 1)].first) {
          continue;  // not a boundary between distinct values
        }
        const int nl = k + 1;
        const int nr = n - nl;
        if (nl < min_leaf_ || nr < min_leaf_) continue;
        const double right_sum = total_sum - left_sum;
        const double right_sq = total_sq - left_sq;
        const double sse = (left_sq - left_sum * left_sum / nl) +
                           (right_sq - right_sum * right_sum / nr);
        if (sse < best.sse) {
          best.feature = feature;
          best.threshold = 0.5 * (xy[static_cast<std::size_t>(k)].first +
                                  xy[static_cast<std::size_t>(k + 1)].first);
          best.sse = sse;
        }
      }
    }
    if (best.feature >= 0 && best.sse >= parent_sse) best.feature = -1;
    return best;
  }

  const Eigen::MatrixXd& X_;
  const Eigen::VectorXd& y_;
  int max_depth_;
  int min_leaf_;
  int mtry_;
  RngStream* rng_;
};

}  // namespace

RegressionTree fit_tree(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                        int max_depth, int min_leaf) {
  check_shapes(X, y);
  if (X.rows() < min_leaf) throw std::invalid_argument("fit_tree: fewer rows than min_leaf");
  std::vector<int> rows(static_cast<std::size_t>(X.rows()));
  std::iota(rows.begin(), rows.end(), 0);
  TreeGrower grower(X, y, max_depth, min_leaf, 0, nullptr);
  return grower.grow(std::move(rows));
}

double Forest::predict_row(const Eigen::RowVectorXd& x) const {
  double s = 0.0;
  for (const auto& tree : trees) s += tree.predict_row(x);
  return s / static_cast<double>(trees.size());
}

Eigen::VectorXd Forest::predict(const Eigen::MatrixXd& X) const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(X.rows());
  for (const auto& tree : trees) out += tree.predict(X);
  return out / static_cast<double>(trees.size());
}

Forest fit_forest(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                  int n_trees, int max_depth, int mtry, std::uint64_t seed,
                  int min_leaf) {
  check_shapes(X, y);
  if (n_trees < 1) throw std::invalid_argument("fit_forest: need at least one tree");
  const int n = static_cast<int>(X.rows());

  Forest forest;
  forest.seed = seed;
  forest.trees.reserve(static_cast<std::size_t>(n_trees));
  for (int t = 0; t < n_trees; ++t) {
    RngStream rng(seed, streams::kForestBase + static_cast<std::uint64_t>(t));
    std::vector<int> rows(static_cast<std::size_t>(n));
    for (auto& r : rows) r = static_cast<int>(rng.uniform_int(static_cast<std::uint32_t>(n)));
    TreeGrower grower(X, y, max_depth, min_leaf, mtry, &rng);
    forest.trees.push_back(grower.grow(std::move(rows)));
  }
  return forest;
}

}  // namespace survcal
