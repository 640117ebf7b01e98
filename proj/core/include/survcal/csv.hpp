#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "survcal/dataset.hpp"
#include "survcal/pseudo.hpp"

namespace survcal {

// Schema violation with file coordinates (1-based line, named column).
struct CsvError : std::runtime_error {
  CsvError(const std::string& path, int line, const std::string& column,
           const std::string& message);
  int line = 0;
  std::string column;
};

// Dataset CSV schema: header `x0..x{d-1},time,event,domain[,stratum]`;
// event in {0,1}; domain is a string label mapped to source indices in
// first-appearance order, with `target_label` mapped to the target domain.
// Decimal parsing is locale-independent.
SurvivalDataset read_dataset_csv(const std::string& path,
                                 const std::string& target_label = "T",
                                 std::vector<std::string>* domain_labels_out = nullptr);

void write_dataset_csv(const std::string& path, const SurvivalDataset& data,
                       const std::vector<std::string>& domain_labels,
                       const std::string& target_label = "T");

// Wide dump: header `row,theta_<t1>,...`, one line per observation.
void write_pseudo_csv(const std::string& path, const PseudoMatrix& matrix);

}  // namespace survcal
