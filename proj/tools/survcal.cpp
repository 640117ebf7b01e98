#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "survcal/csv.hpp"
#include "survcal/experiment.hpp"

namespace {

using namespace survcal;

std::string method_roster() {
  std::string roster;
  for (Method m : all_methods()) {
    if (!roster.empty()) roster += ", ";
    roster += method_name(m);
  }
  return roster;
}

FunctionalKind parse_functional_or_die(const std::string& name) {
  if (name == "sp") return FunctionalKind::SurvivalProbability;
  if (name == "rm") return FunctionalKind::RestrictedMean;
  throw CLI::ValidationError("--functional", "expected sp or rm, got '" + name + "'");
}

std::string join(const std::vector<double>& values) {
  std::string out;
  char buf[40];
  for (double v : values) {
    if (!out.empty()) out += ' ';
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    out += buf;
  }
  return out;
}

int cmd_run(const std::string& config_path, const std::string& out_dir, int threads,
            std::uint64_t seed, bool seed_set, int reps, double q, bool q_set,
            const std::vector<double>& horizons, const std::string& functional,
            const std::string& methods, const std::string& dump_cohort) {
  Config raw = Config::parse_file(config_path);
  if (seed_set) raw.set("seed", std::to_string(seed));
  if (reps > 0) raw.set("replications", std::to_string(reps));
  if (q_set) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", q);
    raw.set("shift.q", buf);
  }
  if (!horizons.empty()) raw.set("horizons", join(horizons));
  if (!functional.empty()) raw.set("functional", functional);
  if (!methods.empty()) raw.set("methods", methods);

  const ExperimentConfig cfg = experiment_from_config(raw);

  if (!dump_cohort.empty()) {
    const GeneratedCohort cohort = generate_cohort(cfg.scenario, 0);
    std::vector<std::string> labels;
    for (std::size_t m = 0; m < cfg.scenario.shift.omegas.size(); ++m) {
      labels.push_back("S" + std::to_string(m + 1));
    }
    write_dataset_csv(dump_cohort, cohort.data, labels);
    std::cout << "cohort (replication 0) written to " << dump_cohort << "\n";
  }

  const ScenarioOutputs outputs = run_scenario(cfg, out_dir, threads);
  for (const std::string& file : outputs.files) std::cout << "wrote " << file << "\n";
  if (!outputs.aborted.empty()) {
    std::cout << outputs.aborted.size() << " replication(s) aborted; see manifest\n";
  }
  return 0;
}

int cmd_single(const std::string& dataset_path, const std::string& method_name_arg,
               const std::string& functional, double horizon, std::uint64_t seed,
               const std::string& target_label, const std::string& subgroup,
               const std::string& out_path) {
  const auto method = parse_method(method_name_arg);
  if (!method) {
    std::cerr << "unknown method '" << method_name_arg << "'; available: "
              << method_roster() << "\n";
    return 2;
  }
  const SurvivalDataset data = read_dataset_csv(dataset_path, target_label);

  SingleRunOptions opts;
  opts.method = *method;
  opts.functional = {parse_functional_or_die(functional), horizon};
  opts.seed = seed;
  if (!subgroup.empty()) opts.subgroup_column = subgroup;

  const SingleRunResult result = run_single(data, opts);

  std::ofstream out;
  const bool to_file = !out_path.empty();
  if (to_file) {
    out.open(out_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + out_path);
    out << "method,subgroup,horizon,estimate\n";
  }
  char buf[40];
  for (const SingleEstimate& row : result.rows) {
    std::snprintf(buf, sizeof(buf), "%.12g", row.estimate);
    std::cout << method_name_arg << " " << row.subgroup << " t=" << horizon
              << " estimate=" << buf << "\n";
    if (to_file) {
      out << method_name_arg << ',' << row.subgroup << ',' << horizon << ',' << buf
          << '\n';
    }
  }
  if (result.trace && to_file) {
    const std::string trace_path =
        (std::filesystem::path(out_path).parent_path() /
         (std::filesystem::path(out_path).stem().string() + "_trace.csv"))
            .string();
    write_audit_trace_csv(trace_path, *result.trace);
    std::cout << "audit trace written to " << trace_path << "\n";
  }
  return 0;
}

int cmd_pseudo(const std::string& dataset_path, const std::string& functional,
               const std::vector<double>& horizons, const std::string& method,
               const std::string& target_label, const std::string& out_path) {
  const SurvivalDataset data = read_dataset_csv(dataset_path, target_label);
  const FunctionalKind kind = parse_functional_or_die(functional);
  PseudoMatrix matrix;
  if (method == "jackknife") {
    matrix = pseudo_jackknife(data, kind, horizons);
  } else if (method == "ipcw") {
    matrix = pseudo_ipcw(data, kind, horizons);
  } else {
    std::cerr << "unknown pseudo method '" << method << "' (jackknife or ipcw)\n";
    return 2;
  }
  write_pseudo_csv(out_path, matrix);
  std::cout << "pseudo-observations (" << matrix.values.rows() << " x "
            << matrix.values.cols() << ") written to " << out_path << "\n";
  return 0;
}

int cmd_validate(const std::string& dataset_path, const std::string& target_label) {
  std::vector<std::string> labels;
  const SurvivalDataset data = read_dataset_csv(dataset_path, target_label, &labels);
  std::size_t events = 0;
  for (auto e : data.event) events += e ? 1 : 0;
  std::cout << "OK: " << data.n() << " rows, " << data.dim() << " covariates, "
            << labels.size() << " source domain(s), " << data.target_rows().size()
            << " target rows, " << events << " events";
  if (data.has_strata()) {
    std::set<std::int32_t> distinct(data.strata.begin(), data.strata.end());
    std::cout << ", " << distinct.size() << " strata";
  }
  std::cout << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"survcal: multicalibrated survival estimation under covariate shift"};
  app.require_subcommand(1);

  // run
  std::string config_path, out_dir = "out", functional_list, methods, dump_cohort;
  int threads = 1, reps = -1;
  std::uint64_t seed = 0;
  double q = 0.0;
  std::vector<double> horizons;
  auto* run = app.add_subcommand("run", "run a scenario config end to end");
  run->add_option("config", config_path, "scenario config file")->required();
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--threads", threads, "replication worker threads");
  auto* seed_opt = run->add_option("--seed", seed, "override the seed");
  run->add_option("--reps", reps, "override replication count");
  auto* q_opt = run->add_option("--q", q, "override shift strength");
  run->add_option("--horizons", horizons, "override time horizons");
  run->add_option("--functional", functional_list, "override functionals (sp rm)");
  run->add_option("--methods", methods, "override the method list");
  run->add_option("--dump-cohort", dump_cohort, "write replication 0 cohort CSV");

  // single
  std::string dataset_path, method_arg = "naive", functional_one = "sp";
  std::string target_label = "T", subgroup, single_out;
  double horizon = 0.0;
  std::uint64_t single_seed = 1;
  auto* single = app.add_subcommand("single", "one estimate from a dataset CSV");
  single->add_option("dataset", dataset_path, "dataset CSV")->required();
  single->add_option("--method", method_arg, "method (" + method_roster() + ")");
  single->add_option("--functional", functional_one, "sp or rm");
  single->add_option("--horizon", horizon, "time horizon")->required();
  single->add_option("--seed", single_seed, "split/forest seed");
  single->add_option("--target-label", target_label, "domain label of the target");
  single->add_option("--subgroup", subgroup, "subgroup column (x<k>) for ipsw-sub");
  single->add_option("--out", single_out, "write the estimate row(s) as CSV");

  // pseudo
  std::string pseudo_dataset, pseudo_functional = "sp", pseudo_method = "jackknife";
  std::string pseudo_target = "T", pseudo_out = "pseudo.csv";
  std::vector<double> pseudo_horizons;
  auto* pseudo = app.add_subcommand("pseudo", "dump a pseudo-observation matrix");
  pseudo->add_option("dataset", pseudo_dataset, "dataset CSV")->required();
  pseudo->add_option("--functional", pseudo_functional, "sp or rm");
  pseudo->add_option("--horizons", pseudo_horizons, "time horizons")->required();
  pseudo->add_option("--method", pseudo_method, "jackknife or ipcw");
  pseudo->add_option("--target-label", pseudo_target, "domain label of the target");
  pseudo->add_option("--out", pseudo_out, "output CSV path");

  // validate
  std::string validate_dataset, validate_target = "T";
  auto* validate = app.add_subcommand("validate", "schema-check a dataset CSV");
  validate->add_option("dataset", validate_dataset, "dataset CSV")->required();
  validate->add_option("--target-label", validate_target, "domain label of the target");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      return cmd_run(config_path, out_dir, threads, seed, seed_opt->count() > 0, reps, q,
                     q_opt->count() > 0, horizons, functional_list, methods, dump_cohort);
    }
    if (single->parsed()) {
      return cmd_single(dataset_path, method_arg, functional_one, horizon, single_seed,
                        target_label, subgroup, single_out);
    }
    if (pseudo->parsed()) {
      return cmd_pseudo(pseudo_dataset, pseudo_functional, pseudo_horizons, pseudo_method,
                        pseudo_target, pseudo_out);
    }
    if (validate->parsed()) {
      return cmd_validate(validate_dataset, validate_target);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
