#include "survcal/kaplan_meier.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace survcal {

StepCurve kaplan_meier(const Eigen::VectorXd& times,
                       const std::vector<std::uint8_t>& events) {
  const Eigen::Index n = times.size();
  if (n == 0) throw std::invalid_argument("empty dataset");
  if (static_cast<Eigen::Index>(events.size()) != n) {
    throw std::invalid_argument("kaplan_meier: times/events size mismatch");
  }

  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return times[a] < times[b]; });

  std::vector<double> knots;
  std::vector<double> values;
  double survival = 1.0;
  Eigen::Index at_risk = n;
  std::size_t k = 0;
  while (k < order.size()) {
    const double t = times[order[k]];
    int d = 0;
    int removed = 0;
    while (k < order.size() && times[order[k]] == t) {
      if (events[static_cast<std::size_t>(order[k])]) ++d;
      ++removed;
      ++k;
    }
    if (d > 0) {
      survival *= 1.0 - static_cast<double>(d) / static_cast<double>(at_risk);
      knots.push_back(t);
      values.push_back(survival);
    }
    at_risk -= removed;
  }
  return StepCurve(std::move(knots), std::move(values), 1.0);
}

std::map<std::int32_t, StepCurve> censoring_survival(const SurvivalDataset& data) {
  data.validate();
  std::map<std::int32_t, std::vector<int>> groups;
  if (data.has_strata()) {
    for (std::size_t i = 0; i < data.strata.size(); ++i) {
      groups[data.strata[i]].push_back(static_cast<int>(i));
    }
  } else {
    std::vector<int> all(static_cast<std::size_t>(data.n()));
    std::iota(all.begin(), all.end(), 0);
    groups[0] = std::move(all);
  }

  std::map<std::int32_t, StepCurve> curves;
  for (const auto& [label, rows] : groups) {
    if (rows.empty()) throw std::invalid_argument("censoring_survival: empty stratum");
    Eigen::VectorXd t(static_cast<Eigen::Index>(rows.size()));
    std::vector<std::uint8_t> censored(rows.size());
    for (std::size_t k = 0; k < rows.size(); ++k) {
      t[static_cast<Eigen::Index>(k)] = data.observed_time[rows[k]];
      censored[k] = data.event[static_cast<std::size_t>(rows[k])] ? 0 : 1;
    }
    curves.emplace(label, kaplan_meier(t, censored));
  }
  return curves;
}

}  // namespace survcal
