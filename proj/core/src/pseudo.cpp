#include "survcal/pseudo.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "survcal/kaplan_meier.hpp"

namespace survcal {

double functional_value(FunctionalKind kind, double time, double horizon) {
  switch (kind) {
    case FunctionalKind::SurvivalProbability:
      return time >= horizon ? 1.0 : 0.0;
    case FunctionalKind::RestrictedMean:
      return std::min(time, horizon);
  }
  return 0.0;
}

double functional_range(FunctionalKind kind, double horizon) {
  return kind == FunctionalKind::SurvivalProbability ? 1.0 : horizon;
}

namespace {

// Aggregated distinct-time table for one sample.
struct TimeTable {
  std::vector<double> time;  // distinct observed times, increasing
  std::vector<int> events;   // events at time[j]
  std::vector<int> at_risk;  // units with observed time >= time[j]
  std::vector<int> row_slot; // per row: index into time of its observed time
};

TimeTable build_table(const Eigen::VectorXd& times,
                      const std::vector<std::uint8_t>& events) {
  const Eigen::Index n = times.size();
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return times[a] < times[b]; });

  TimeTable table;
  table.row_slot.resize(static_cast<std::size_t>(n));
  std::size_t k = 0;
  Eigen::Index at_risk = n;
  while (k < order.size()) {
    const double t = times[order[k]];
    int d = 0;
    int removed = 0;
    const int slot = static_cast<int>(table.time.size());
    while (k < order.size() && times[order[k]] == t) {
      if (events[static_cast<std::size_t>(order[k])]) ++d;
      table.row_slot[static_cast<std::size_t>(order[k])] = slot;
      ++removed;
      ++k;
    }
    table.time.push_back(t);
    table.events.push_back(d);
    table.at_risk.push_back(static_cast<int>(at_risk));
    at_risk -= removed;
  }
  return table;
}

}  // namespace

PseudoMatrix pseudo_jackknife(const Eigen::VectorXd& times,
                              const std::vector<std::uint8_t>& events,
                              FunctionalKind kind,
                              const std::vector<double>& grid) {
  const Eigen::Index n = times.size();
  if (n < 2) throw std::invalid_argument("pseudo_jackknife: need at least 2 observations");
  if (static_cast<Eigen::Index>(events.size()) != n) {
    throw std::invalid_argument("pseudo_jackknife: times/events size mismatch");
  }

  const TimeTable table = build_table(times, events);
  const std::size_t J = table.time.size();
  const bool rm = kind == FunctionalKind::RestrictedMean;

  PseudoMatrix out;
  out.grid = grid;
  out.kind = kind;
  out.method = PseudoMethod::Jackknife;
  out.values.resize(n, static_cast<Eigen::Index>(grid.size()));

  // Prefix quantities over distinct times, accumulated in long double so the
  // incremental scheme stays well inside the 1e-10 agreement bound against a
  // naive N-fold recomputation.
  std::vector<long double> full(J + 1);      // full-sample survival after slot j
  std::vector<long double> loo(J + 1);       // survival with one at-risk unit removed
  std::vector<long double> full_int(J + 1);  // integral of full curve over [0, time[j]]
  std::vector<long double> loo_int(J + 1);
  std::vector<long double> suffix(J + 1);    // product of full factors after slot j
  std::vector<long double> suffix_int(J + 1);

  for (std::size_t m = 0; m < grid.size(); ++m) {
    const double horizon = grid[m];
    // Slots with time <= horizon participate.
    std::size_t limit = 0;
    while (limit < J && table.time[limit] <= horizon) ++limit;

    full[0] = 1.0L;
    loo[0] = 1.0L;
    full_int[0] = 0.0L;
    loo_int[0] = 0.0L;
    for (std::size_t j = 0; j < limit; ++j) {
      const double prev_time = j == 0 ? 0.0 : table.time[j - 1];
      full_int[j + 1] = full_int[j] + full[j] * (table.time[j] - prev_time);
      loo_int[j + 1] = loo_int[j] + loo[j] * (table.time[j] - prev_time);
      const int d = table.events[j];
      const int y = table.at_risk[j];
      full[j + 1] = full[j] * (1.0L - static_cast<long double>(d) / y);
      loo[j + 1] = y > 1 ? loo[j] * (1.0L - static_cast<long double>(d) / (y - 1))
                         : loo[j];
    }

    suffix[limit] = 1.0L;
    suffix_int[limit] = horizon - (limit == 0 ? 0.0 : table.time[limit - 1]);
    for (std::size_t j = limit; j-- > 0;) {
      const long double factor =
          1.0L - static_cast<long double>(table.events[j]) / table.at_risk[j];
      suffix[j] = factor * suffix[j + 1];
      const double prev_time = j == 0 ? 0.0 : table.time[j - 1];
      suffix_int[j] = (table.time[j] - prev_time) + factor * suffix_int[j + 1];
    }
    // suffix[j]: product of factors at slots j..limit-1 (survival beyond slot
    // j-1 relative to slot j-1); suffix_int[j]: integral of that relative
    // curve over [time[j-1], horizon].

    const long double plugin =
        rm ? full_int[limit] + full[limit] * (horizon - (limit == 0 ? 0.0 : table.time[limit - 1]))
           : full[limit];
    const long double loo_beyond =
        rm ? loo_int[limit] + loo[limit] * (horizon - (limit == 0 ? 0.0 : table.time[limit - 1]))
           : loo[limit];

    for (Eigen::Index i = 0; i < n; ++i) {
      const std::size_t slot = static_cast<std::size_t>(table.row_slot[static_cast<std::size_t>(i)]);
      long double loo_value;
      if (slot >= limit) {
        // Observation beyond the horizon: it only thins every risk set.
        loo_value = loo_beyond;
      } else {
        const int d = table.events[slot] - (events[static_cast<std::size_t>(i)] ? 1 : 0);
        const int y = table.at_risk[slot] - 1;
        const long double own = y > 0 ? 1.0L - static_cast<long double>(d) / y : 1.0L;
        if (rm) {
          loo_value = loo_int[slot + 1] + loo[slot] * own * suffix_int[slot + 1];
        } else {
          loo_value = loo[slot] * own * suffix[slot + 1];
        }
      }
      out.values(i, static_cast<Eigen::Index>(m)) = static_cast<double>(
          static_cast<long double>(n) * plugin -
          static_cast<long double>(n - 1) * loo_value);
    }
  }
  return out;
}

PseudoMatrix pseudo_jackknife(const SurvivalDataset& data, FunctionalKind kind,
                              const std::vector<double>& grid) {
  return pseudo_jackknife(data.observed_time, data.event, kind, grid);
}

PseudoMatrix pseudo_ipcw(const SurvivalDataset& data, FunctionalKind kind,
                         const std::vector<double>& grid) {
  data.validate();
  const auto curves = censoring_survival(data);
  const Eigen::Index n = data.n();

  PseudoMatrix out;
  out.grid = grid;
  out.kind = kind;
  out.method = PseudoMethod::Ipcw;
  out.values.resize(n, static_cast<Eigen::Index>(grid.size()));

  for (Eigen::Index i = 0; i < n; ++i) {
    const std::int32_t stratum = data.has_strata() ? data.strata[static_cast<std::size_t>(i)] : 0;
    const StepCurve& curve = curves.at(stratum);
    const double t_obs = data.observed_time[i];
    const bool observed_event = data.event[static_cast<std::size_t>(i)] != 0;
    for (std::size_t m = 0; m < grid.size(); ++m) {
      const double horizon = grid[m];
      // 1{C >= T~ ^ t}, measurable as (event observed OR followed past t).
      const bool uncensored_by_horizon = observed_event || t_obs >= horizon;
      double value = 0.0;
      if (uncensored_by_horizon) {
        const double numerator = functional_value(kind, t_obs, horizon);
        if (numerator != 0.0) {
          const double g = curve.at_left(std::min(t_obs, horizon));
          if (!(g > 0.0)) throw std::runtime_error("censoring weight diverges");
          value = numerator / g;
        }
      }
      out.values(i, static_cast<Eigen::Index>(m)) = value;
    }
  }
  return out;
}

}  // namespace survcal
