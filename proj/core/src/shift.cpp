#include "survcal/shift.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace survcal {

Eigen::VectorXd PropensityModel::odds(const Eigen::MatrixXd& X) const {
  Eigen::VectorXd p = source_given_x.predict_proba(X);
  for (Eigen::Index i = 0; i < p.size(); ++i) p[i] = (1.0 - p[i]) / p[i];
  return p;
}

PropensityModel fit_propensity(const Eigen::MatrixXd& source_X,
                               const Eigen::MatrixXd& target_X) {
  if (source_X.rows() == 0 || target_X.rows() == 0) {
    throw std::invalid_argument("fit_propensity: both domains must be nonempty");
  }
  if (source_X.cols() != target_X.cols()) {
    throw std::invalid_argument("fit_propensity: covariate dimension mismatch");
  }
  const Eigen::Index ns = source_X.rows();
  const Eigen::Index nt = target_X.rows();
  Eigen::MatrixXd stacked(ns + nt, source_X.cols());
  stacked.topRows(ns) = source_X;
  stacked.bottomRows(nt) = target_X;
  std::vector<std::uint8_t> labels(static_cast<std::size_t>(ns + nt), 0);
  std::fill(labels.begin(), labels.begin() + ns, 1);

  PropensityModel model;
  model.source_given_x = fit_logistic(stacked, labels);
  model.warning = !model.source_given_x.converged;
  return model;
}

double ipsw_estimate(const Eigen::VectorXd& pseudo, const Eigen::VectorXd& odds) {
  if (pseudo.size() != odds.size()) {
    throw std::invalid_argument("ipsw_estimate: pseudo/odds size mismatch");
  }
  if (pseudo.size() == 0) throw std::invalid_argument("ipsw_estimate: empty input");
  double num = 0.0;
  double den = 0.0;
  for (Eigen::Index i = 0; i < pseudo.size(); ++i) {
    if (!(odds[i] > 0.0)) throw std::runtime_error("ipsw_estimate: nonpositive propensity odds");
    if (odds[i] > kMaxPropensityOdds) {
      throw std::runtime_error("ipsw_estimate: propensity weight overflow");
    }
    num += pseudo[i] * odds[i];
    den += odds[i];
  }
  return num / den;
}

double ipsw_estimate(const Eigen::VectorXd& pseudo, const Eigen::MatrixXd& source_X,
                     const PropensityModel& model) {
  return ipsw_estimate(pseudo, model.odds(source_X));
}

Eigen::VectorXd truncate_odds(Eigen::VectorXd odds, double quantile) {
  if (!(quantile > 0.0 && quantile <= 1.0)) {
    throw std::invalid_argument("truncate_odds: quantile must lie in (0, 1]");
  }
  if (odds.size() == 0) return odds;
  std::vector<double> sorted(odds.data(), odds.data() + odds.size());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t idx = std::min(
      sorted.size() - 1,
      static_cast<std::size_t>(quantile * static_cast<double>(sorted.size() - 1)));
  const double cap = sorted[idx];
  for (Eigen::Index i = 0; i < odds.size(); ++i) odds[i] = std::min(odds[i], cap);
  return odds;
}

std::map<int, double> ipsw_subgroup(const Eigen::VectorXd& pseudo,
                                    const Eigen::MatrixXd& source_X,
                                    const std::vector<int>& source_groups,
                                    const Eigen::MatrixXd& target_X,
                                    const std::vector<int>& target_groups) {
  if (source_X.rows() != static_cast<Eigen::Index>(source_groups.size()) ||
      target_X.rows() != static_cast<Eigen::Index>(target_groups.size())) {
    throw std::invalid_argument("ipsw_subgroup: group label size mismatch");
  }
  std::set<int> groups(source_groups.begin(), source_groups.end());

  std::map<int, double> estimates;
  for (int g : groups) {
    std::vector<int> src_rows, tgt_rows;
    for (std::size_t i = 0; i < source_groups.size(); ++i) {
      if (source_groups[i] == g) src_rows.push_back(static_cast<int>(i));
    }
    for (std::size_t i = 0; i < target_groups.size(); ++i) {
      if (target_groups[i] == g) tgt_rows.push_back(static_cast<int>(i));
    }
    if (tgt_rows.empty()) throw std::runtime_error("ipsw_subgroup: empty target subgroup");

    Eigen::MatrixXd src(static_cast<Eigen::Index>(src_rows.size()), source_X.cols());
    Eigen::MatrixXd tgt(static_cast<Eigen::Index>(tgt_rows.size()), target_X.cols());
    Eigen::VectorXd theta(static_cast<Eigen::Index>(src_rows.size()));
    for (std::size_t k = 0; k < src_rows.size(); ++k) {
      src.row(static_cast<Eigen::Index>(k)) = source_X.row(src_rows[k]);
      theta[static_cast<Eigen::Index>(k)] = pseudo[src_rows[k]];
    }
    for (std::size_t k = 0; k < tgt_rows.size(); ++k) {
      tgt.row(static_cast<Eigen::Index>(k)) = target_X.row(tgt_rows[k]);
    }
    estimates[g] = ipsw_estimate(theta, src, fit_propensity(src, tgt));
  }
  return estimates;
}

double ipsw_multisource(const std::vector<Eigen::VectorXd>& pseudo_per_source,
                        const std::vector<Eigen::MatrixXd>& source_X,
                        const Eigen::MatrixXd& target_X) {
  if (source_X.size() < 2) {
    throw std::invalid_argument("ipsw_multisource: need at least two sources");
  }
  if (pseudo_per_source.size() != source_X.size()) {
    throw std::invalid_argument("ipsw_multisource: pseudo/source count mismatch");
  }
  Eigen::Index total = target_X.rows();
  for (const auto& x : source_X) {
    if (x.rows() == 0) throw std::invalid_argument("ipsw_multisource: empty source domain");
    total += x.rows();
  }

  double num = 0.0;
  double den = 0.0;
  for (std::size_t m = 0; m < source_X.size(); ++m) {
    if (pseudo_per_source[m].size() != source_X[m].rows()) {
      throw std::invalid_argument("ipsw_multisource: pseudo/source row mismatch");
    }
    const double prior = static_cast<double>(source_X[m].rows()) / static_cast<double>(total);
    const PropensityModel model = fit_propensity(source_X[m], target_X);
    const Eigen::VectorXd odds = model.odds(source_X[m]);
    for (Eigen::Index i = 0; i < odds.size(); ++i) {
      if (odds[i] > kMaxPropensityOdds) {
        throw std::runtime_error("ipsw_multisource: propensity weight overflow");
      }
      const double w = prior * odds[i];
      num += pseudo_per_source[m][i] * w;
      den += w;
    }
  }
  return num / den;
}

}  // namespace survcal
