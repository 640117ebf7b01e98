#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "survcal/config.hpp"
#include "survcal/datagen.hpp"
#include "survcal/mcboost.hpp"
#include "survcal/metrics.hpp"

namespace survcal {

// The method roster reported in the benchmark tables.
enum class Method {
  Naive,      // unweighted mean of source pseudo-observations
  Ipsw,       // propensity-weighted mean (multi-source form when applicable)
  IpswSub,    // per-subgroup propensity fits
  Lm,         // least squares on pseudo-observations, averaged on the target
  MclmRidge,  // lm post-processed with ridge auditing
  MclmTree,   // lm post-processed with tree auditing
  Rf,         // random forest on pseudo-observations
  McrfRidge,  // rf post-processed with ridge auditing
  McrfTree,   // rf post-processed with tree auditing
};

const std::vector<Method>& all_methods();
std::string method_name(Method method);
std::optional<Method> parse_method(const std::string& name);
// Methods that produce per-covariate predictions (and hence C-index rows).
bool is_prediction_method(Method method);
bool is_calibrated_method(Method method);

struct CalibSettings {
  double alpha_frac = 0.02;  // alpha = alpha_frac * functional range
  double eta = 0.3;
  int buckets = 5;
  int max_iters = 200;
  double ridge_lambda = 1.0;
  int tree_depth = 2;
  int tree_min_leaf = 10;
  double clamp = 1.0;
  bool global_auditors = false;
};

struct ForestSettings {
  int n_trees = 100;
  int max_depth = 6;
  int mtry = 0;  // 0 = ceil(d / 3)
};

struct SplitSettings {
  double train = 0.5;
  double calib = 0.25;  // validation gets the remainder
};

struct ExperimentConfig {
  std::string id = "scenario";
  ScenarioSpec scenario;
  int replications = 1;
  std::vector<Method> methods;
  CalibSettings calib;
  ForestSettings forest;
  SplitSettings split;
};

ExperimentConfig experiment_from_config(const Config& cfg);
ExperimentConfig load_experiment_config(const std::string& path);
// Fully-resolved key-value form (defaults filled in); its canonical text is
// the content the manifest's config hash digests.
Config resolved_config(const ExperimentConfig& cfg);

struct AbortedReplication {
  int replication = 0;
  std::uint64_t seed = 0;
  std::string error;
};

struct ScenarioOutputs {
  std::map<FunctionalKind, EvalReport> reports;
  std::vector<AbortedReplication> aborted;
  std::vector<std::string> files;
  std::string manifest_path;
};

// Runs every replication (worker pool of `threads`), aggregates mean bias and
// its standard error per (method, subgroup, horizon), and writes
// report_<functional>.csv, traces.csv, cindex.csv and manifest.json under
// out_dir. Replication r uses the deterministic streams of (seed, r); a
// failed replication is recorded and skipped, and the scenario throws if more
// than 10% of replications abort.
ScenarioOutputs run_scenario(const ExperimentConfig& cfg, const std::string& out_dir,
                             int threads = 1);

struct SingleRunOptions {
  Method method = Method::Naive;
  TargetFunctional functional;
  std::uint64_t seed = 1;
  CalibSettings calib;
  ForestSettings forest;
  SplitSettings split;
  std::optional<std::string> subgroup_column;  // required for ipsw-sub
};

struct SingleEstimate {
  std::string subgroup;
  double estimate = 0.0;
};

struct SingleRunResult {
  std::vector<SingleEstimate> rows;
  std::optional<AuditTrace> trace;  // present for calibrated methods
};

// One estimate from a user-supplied dataset. Pseudo-observations use the
// censoring-weighted construction when the dataset carries strata, the plain
// jackknife otherwise.
SingleRunResult run_single(const SurvivalDataset& data, const SingleRunOptions& opts);

void write_audit_trace_csv(const std::string& path, const AuditTrace& trace);

}  // namespace survcal
