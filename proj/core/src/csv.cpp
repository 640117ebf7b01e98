#include "survcal/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace survcal {

namespace {

std::string coordinates(const std::string& path, int line, const std::string& column) {
  std::ostringstream oss;
  oss << path << ": row " << line << ", column '" << column << "': ";
  return oss.str();
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  for (char ch : line) {
    if (ch == ',') {
      cells.push_back(cell);
      cell.clear();
    } else if (ch != '\r') {
      cell.push_back(ch);
    }
  }
  cells.push_back(cell);
  return cells;
}

double parse_double(const std::string& cell, const std::string& path, int line,
                    const std::string& column) {
  double value = 0.0;
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end) {
    throw CsvError(path, line, column, "expected a number, got '" + cell + "'");
  }
  return value;
}

}  // namespace

CsvError::CsvError(const std::string& path, int line_no, const std::string& column_name,
                   const std::string& message)
    : std::runtime_error(coordinates(path, line_no, column_name) + message),
      line(line_no), column(column_name) {}

SurvivalDataset read_dataset_csv(const std::string& path, const std::string& target_label,
                                 std::vector<std::string>* domain_labels_out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);

  std::string line;
  if (!std::getline(in, line)) throw CsvError(path, 1, "header", "empty file");
  const std::vector<std::string> header = split_line(line);

  int d = 0;
  while (d < static_cast<int>(header.size()) && header[static_cast<std::size_t>(d)] == "x" + std::to_string(d)) {
    ++d;
  }
  if (d == 0) throw CsvError(path, 1, "header", "expected covariate columns x0..");
  const std::size_t expected_min = static_cast<std::size_t>(d) + 3;
  if (header.size() < expected_min || header[static_cast<std::size_t>(d)] != "time" ||
      header[static_cast<std::size_t>(d) + 1] != "event" ||
      header[static_cast<std::size_t>(d) + 2] != "domain") {
    throw CsvError(path, 1, "header", "expected x0..x{d-1},time,event,domain[,stratum]");
  }
  const bool has_stratum = header.size() > expected_min;
  if (has_stratum &&
      (header.size() != expected_min + 1 || header[expected_min] != "stratum")) {
    throw CsvError(path, 1, "header", "unexpected trailing columns after domain");
  }

  std::vector<std::vector<double>> covariates;
  std::vector<double> times;
  std::vector<std::uint8_t> events;
  std::vector<std::int32_t> domains;
  std::vector<std::int32_t> strata;
  std::map<std::string, std::int32_t> domain_ids;
  std::vector<std::string> labels;

  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const std::vector<std::string> cells = split_line(line);
    if (cells.size() != header.size()) {
      throw CsvError(path, line_no, "row",
                     "expected " + std::to_string(header.size()) + " cells, got " +
                         std::to_string(cells.size()));
    }
    std::vector<double> x(static_cast<std::size_t>(d));
    for (int j = 0; j < d; ++j) {
      x[static_cast<std::size_t>(j)] =
          parse_double(cells[static_cast<std::size_t>(j)], path, line_no,
                       header[static_cast<std::size_t>(j)]);
    }
    const double t = parse_double(cells[static_cast<std::size_t>(d)], path, line_no, "time");
    if (t < 0.0) throw CsvError(path, line_no, "time", "must be nonnegative");

    const std::string& ev = cells[static_cast<std::size_t>(d) + 1];
    if (ev != "0" && ev != "1") {
      throw CsvError(path, line_no, "event", "expected 0 or 1, got '" + ev + "'");
    }

    const std::string& dom = cells[static_cast<std::size_t>(d) + 2];
    if (dom.empty()) throw CsvError(path, line_no, "domain", "empty label");
    std::int32_t dom_id;
    if (dom == target_label) {
      dom_id = kTargetDomain;
    } else {
      auto it = domain_ids.find(dom);
      if (it == domain_ids.end()) {
        dom_id = static_cast<std::int32_t>(domain_ids.size());
        domain_ids[dom] = dom_id;
        labels.push_back(dom);
      } else {
        dom_id = it->second;
      }
    }

    covariates.push_back(std::move(x));
    times.push_back(t);
    events.push_back(ev == "1" ? 1 : 0);
    domains.push_back(dom_id);
    if (has_stratum) {
      const double s = parse_double(cells[expected_min], path, line_no, "stratum");
      strata.push_back(static_cast<std::int32_t>(s));
    }
  }
  if (times.empty()) throw CsvError(path, line_no, "row", "no data rows");

  SurvivalDataset data;
  const Eigen::Index n = static_cast<Eigen::Index>(times.size());
  data.covariates.resize(n, d);
  data.observed_time.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) {
      data.covariates(i, j) = covariates[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
    data.observed_time[i] = times[static_cast<std::size_t>(i)];
  }
  data.event = std::move(events);
  data.domain = std::move(domains);
  data.strata = std::move(strata);
  data.validate();
  if (domain_labels_out) *domain_labels_out = labels;
  return data;
}

void write_dataset_csv(const std::string& path, const SurvivalDataset& data,
                       const std::vector<std::string>& domain_labels,
                       const std::string& target_label) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");

  const int d = static_cast<int>(data.dim());
  for (int j = 0; j < d; ++j) out << 'x' << j << ',';
  out << "time,event,domain";
  if (data.has_strata()) out << ",stratum";
  out << '\n';

  char buf[40];
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    for (int j = 0; j < d; ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", data.covariates(i, j));
      out << buf << ',';
    }
    std::snprintf(buf, sizeof(buf), "%.17g", data.observed_time[i]);
    out << buf << ',' << (data.event[static_cast<std::size_t>(i)] ? '1' : '0') << ',';
    const std::int32_t dom = data.domain[static_cast<std::size_t>(i)];
    if (dom == kTargetDomain) {
      out << target_label;
    } else if (dom >= 0 && dom < static_cast<std::int32_t>(domain_labels.size())) {
      out << domain_labels[static_cast<std::size_t>(dom)];
    } else {
      out << 'S' << (dom + 1);
    }
    if (data.has_strata()) out << ',' << data.strata[static_cast<std::size_t>(i)];
    out << '\n';
  }
}

void write_pseudo_csv(const std::string& path, const PseudoMatrix& matrix) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  char buf[40];
  out << "row";
  for (double t : matrix.grid) {
    std::snprintf(buf, sizeof(buf), "%.12g", t);
    out << ",theta_" << buf;
  }
  out << '\n';
  for (Eigen::Index i = 0; i < matrix.values.rows(); ++i) {
    out << i;
    for (Eigen::Index m = 0; m < matrix.values.cols(); ++m) {
      std::snprintf(buf, sizeof(buf), "%.12g", matrix.values(i, m));
      out << ',' << buf;
    }
    out << '\n';
  }
}

}  // namespace survcal
