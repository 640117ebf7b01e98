#include "survcal/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace survcal {

double target_benchmark(const Eigen::VectorXd& pseudo_col,
                        const std::vector<int>& subgroup_rows) {
  if (subgroup_rows.empty()) throw std::invalid_argument("target_benchmark: empty subgroup");
  double s = 0.0;
  for (int i : subgroup_rows) s += pseudo_col[i];
  return s / static_cast<double>(subgroup_rows.size());
}

BiasResult bias(double estimate, double benchmark) {
  BiasResult out;
  out.absolute = std::abs(estimate - benchmark);
  if (std::abs(benchmark) > 1e-9) out.relative = out.absolute / std::abs(benchmark);
  return out;
}

double c_index(const Eigen::VectorXd& predictions, const Eigen::VectorXd& times,
               const std::vector<std::uint8_t>& events, CIndexOptions opts) {
  const Eigen::Index n = times.size();
  if (predictions.size() != n || static_cast<Eigen::Index>(events.size()) != n) {
    throw std::invalid_argument("c_index: input size mismatch");
  }
  double concordant = 0.0;
  long long comparable = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!events[static_cast<std::size_t>(i)]) continue;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (!(times[j] > times[i])) continue;
      ++comparable;
      if (predictions[j] > predictions[i]) {
        concordant += 1.0;
      } else if (opts.tie_credit && predictions[j] == predictions[i]) {
        concordant += 0.5;
      }
    }
  }
  if (comparable == 0) throw std::runtime_error("no comparable pairs");
  return concordant / static_cast<double>(comparable);
}

namespace {

std::string format_cell(const std::optional<double>& v) {
  if (!v) return "NA";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", *v);
  return buf;
}

}  // namespace

void EvalReport::write_csv(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << "method,subgroup,horizon,estimate,benchmark,abs_bias,rel_bias,se,reps\n";
  char buf[40];
  for (const EvalRow& row : rows) {
    std::snprintf(buf, sizeof(buf), "%.12g", row.horizon);
    out << row.method << ',' << row.subgroup << ',' << buf << ','
        << format_cell(row.estimate) << ',' << format_cell(row.benchmark) << ','
        << format_cell(row.abs_bias) << ',' << format_cell(row.rel_bias) << ','
        << format_cell(row.se) << ',' << row.reps << '\n';
  }
}

}  // namespace survcal
