#include "survcal/experiment.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <nlohmann/json.hpp>

#include "survcal/kaplan_meier.hpp"
#include "survcal/shift.hpp"

namespace survcal {

namespace {

constexpr const char* kMethodNames[] = {"naive",      "ipsw",       "ipsw-sub",
                                        "lm",         "mclm-ridge", "mclm-tree",
                                        "rf",         "mcrf-ridge", "mcrf-tree"};

std::string fmt(double v, const char* spec = "%.12g") {
  char buf[40];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

}  // namespace

const std::vector<Method>& all_methods() {
  static const std::vector<Method> methods = {
      Method::Naive,     Method::Ipsw,      Method::IpswSub,
      Method::Lm,        Method::MclmRidge, Method::MclmTree,
      Method::Rf,        Method::McrfRidge, Method::McrfTree};
  return methods;
}

std::string method_name(Method method) {
  return kMethodNames[static_cast<int>(method)];
}

std::optional<Method> parse_method(const std::string& name) {
  for (Method m : all_methods()) {
    if (method_name(m) == name) return m;
  }
  return std::nullopt;
}

bool is_prediction_method(Method method) {
  switch (method) {
    case Method::Lm:
    case Method::MclmRidge:
    case Method::MclmTree:
    case Method::Rf:
    case Method::McrfRidge:
    case Method::McrfTree:
      return true;
    default:
      return false;
  }
}

bool is_calibrated_method(Method method) {
  switch (method) {
    case Method::MclmRidge:
    case Method::MclmTree:
    case Method::McrfRidge:
    case Method::McrfTree:
      return true;
    default:
      return false;
  }
}

namespace {

FunctionalKind parse_functional(const std::string& name) {
  if (name == "sp") return FunctionalKind::SurvivalProbability;
  if (name == "rm") return FunctionalKind::RestrictedMean;
  throw std::runtime_error("unknown functional '" + name + "' (expected sp or rm)");
}

std::string functional_name(FunctionalKind kind) {
  return kind == FunctionalKind::SurvivalProbability ? "sp" : "rm";
}

Eigen::VectorXd to_vector(const std::vector<double>& values) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) v[static_cast<Eigen::Index>(i)] = values[i];
  return v;
}

std::string join_doubles(const Eigen::VectorXd& v) {
  std::ostringstream oss;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) oss << ' ';
    oss << fmt(v[i]);
  }
  return oss.str();
}

std::string join_doubles(const std::vector<double>& v) {
  return join_doubles(to_vector(v));
}

}  // namespace

ExperimentConfig experiment_from_config(const Config& cfg) {
  ExperimentConfig out;
  out.id = cfg.get_string("id", "scenario");
  out.replications = cfg.get_int("replications", 1);

  ScenarioSpec& spec = out.scenario;
  spec.n_total = cfg.get_int("n_total");
  spec.seed = cfg.get_u64("seed", 1);
  spec.grid = cfg.get_doubles("horizons");
  if (spec.grid.empty()) throw std::runtime_error("config: horizons must be nonempty");

  spec.functionals.clear();
  for (const std::string& name : cfg.has("functional")
                                     ? cfg.get_strings("functional")
                                     : std::vector<std::string>{"sp"}) {
    spec.functionals.push_back(parse_functional(name));
  }

  const std::string hazard_kind = cfg.get_string("hazard.kind", "weibull_ph");
  if (hazard_kind == "weibull_ph") {
    WeibullHazard hz;
    hz.eta = cfg.get_double("hazard.eta", 0.0001);
    hz.nu = cfg.get_double("hazard.nu", 3.0);
    hz.coeffs = to_vector(cfg.get_doubles("hazard.coeffs"));
    spec.hazard = hz;
  } else if (hazard_kind == "lognormal_aft") {
    LogNormalAft hz;
    hz.mu0 = cfg.get_double("hazard.mu0", 3.5);
    hz.sigma = cfg.get_double("hazard.sigma", 0.8);
    hz.coeffs = to_vector(cfg.get_doubles("hazard.coeffs"));
    spec.hazard = hz;
  } else {
    throw std::runtime_error("unknown hazard.kind '" + hazard_kind + "'");
  }

  const std::string cens_kind = cfg.get_string("censoring.kind", "uniform");
  if (cens_kind == "uniform") {
    UniformCensoring cs;
    cs.lo = cfg.get_double("censoring.lo", 0.0);
    cs.hi = cfg.get_double("censoring.hi", 120.0);
    spec.censoring = cs;
  } else if (cens_kind == "weibull") {
    WeibullCensoring cs;
    cs.eta = cfg.get_double("censoring.eta", 0.0001);
    cs.nu = cfg.get_double("censoring.nu", 2.7);
    cs.coeffs = to_vector(cfg.get_doubles("censoring.coeffs"));
    cs.columns.clear();
    if (cfg.has("censoring.columns")) {
      for (double c : cfg.get_doubles("censoring.columns")) {
        cs.columns.push_back(static_cast<int>(c));
      }
    } else {
      cs.columns = {0, 2, 3, 4};  // documented default mapping of the 4 coefficients
    }
    spec.censoring = cs;
  } else {
    throw std::runtime_error("unknown censoring.kind '" + cens_kind + "'");
  }

  spec.shift.q = cfg.get_double("shift.q", 1.0);
  spec.shift.omegas.clear();
  if (cfg.has("shift.omega")) {
    spec.shift.omegas.push_back(to_vector(cfg.get_doubles("shift.omega")));
  }
  for (int j = 1; j <= 16; ++j) {
    const std::string key = "shift.omega" + std::to_string(j);
    if (cfg.has(key)) spec.shift.omegas.push_back(to_vector(cfg.get_doubles(key)));
  }
  if (spec.shift.omegas.empty()) {
    throw std::runtime_error("config: shift.omega (or shift.omega1..) is required");
  }

  out.methods.clear();
  const std::vector<std::string> method_names =
      cfg.has("methods") ? cfg.get_strings("methods")
                         : std::vector<std::string>{"naive", "ipsw"};
  for (const std::string& name : method_names) {
    const auto m = parse_method(name);
    if (!m) throw std::runtime_error("unknown method '" + name + "'");
    out.methods.push_back(*m);
  }

  out.calib.alpha_frac = cfg.get_double("calib.alpha_frac", 0.02);
  out.calib.eta = cfg.get_double("calib.eta", 0.3);
  out.calib.buckets = cfg.get_int("calib.buckets", 5);
  out.calib.max_iters = cfg.get_int("calib.max_iters", 200);
  out.calib.ridge_lambda = cfg.get_double("calib.ridge_lambda", 1.0);
  out.calib.tree_depth = cfg.get_int("calib.tree_depth", 2);
  out.calib.tree_min_leaf = cfg.get_int("calib.tree_min_leaf", 10);
  out.calib.clamp = cfg.get_double("calib.clamp", 1.0);
  out.calib.global_auditors = cfg.get_bool("calib.global_auditors", false);

  out.forest.n_trees = cfg.get_int("forest.n_trees", 100);
  out.forest.max_depth = cfg.get_int("forest.max_depth", 6);
  out.forest.mtry = cfg.get_int("forest.mtry", 0);

  out.split.train = cfg.get_double("split.train", 0.5);
  out.split.calib = cfg.get_double("split.calib", 0.25);
  if (!(out.split.train > 0.0) || !(out.split.calib > 0.0) ||
      out.split.train + out.split.calib >= 1.0) {
    throw std::runtime_error("config: split fractions must leave room for validation");
  }
  return out;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  return experiment_from_config(Config::parse_file(path));
}

Config resolved_config(const ExperimentConfig& cfg) {
  Config out;
  out.set("id", cfg.id);
  out.set("n_total", std::to_string(cfg.scenario.n_total));
  out.set("seed", std::to_string(cfg.scenario.seed));
  out.set("replications", std::to_string(cfg.replications));
  out.set("horizons", join_doubles(cfg.scenario.grid));

  std::string functionals;
  for (FunctionalKind f : cfg.scenario.functionals) {
    if (!functionals.empty()) functionals += ' ';
    functionals += functional_name(f);
  }
  out.set("functional", functionals);

  if (const auto* wb = std::get_if<WeibullHazard>(&cfg.scenario.hazard)) {
    out.set("hazard.kind", "weibull_ph");
    out.set("hazard.eta", fmt(wb->eta));
    out.set("hazard.nu", fmt(wb->nu));
    out.set("hazard.coeffs", join_doubles(wb->coeffs));
  } else {
    const auto& aft = std::get<LogNormalAft>(cfg.scenario.hazard);
    out.set("hazard.kind", "lognormal_aft");
    out.set("hazard.mu0", fmt(aft.mu0));
    out.set("hazard.sigma", fmt(aft.sigma));
    out.set("hazard.coeffs", join_doubles(aft.coeffs));
  }

  if (const auto* uc = std::get_if<UniformCensoring>(&cfg.scenario.censoring)) {
    out.set("censoring.kind", "uniform");
    out.set("censoring.lo", fmt(uc->lo));
    out.set("censoring.hi", fmt(uc->hi));
  } else {
    const auto& wc = std::get<WeibullCensoring>(cfg.scenario.censoring);
    out.set("censoring.kind", "weibull");
    out.set("censoring.eta", fmt(wc.eta));
    out.set("censoring.nu", fmt(wc.nu));
    out.set("censoring.coeffs", join_doubles(wc.coeffs));
    std::string cols;
    for (int c : wc.columns) {
      if (!cols.empty()) cols += ' ';
      cols += std::to_string(c);
    }
    out.set("censoring.columns", cols);
  }

  out.set("shift.q", fmt(cfg.scenario.shift.q));
  for (std::size_t j = 0; j < cfg.scenario.shift.omegas.size(); ++j) {
    out.set("shift.omega" + std::to_string(j + 1),
            join_doubles(cfg.scenario.shift.omegas[j]));
  }

  std::string methods;
  for (Method m : cfg.methods) {
    if (!methods.empty()) methods += ' ';
    methods += method_name(m);
  }
  out.set("methods", methods);

  out.set("calib.alpha_frac", fmt(cfg.calib.alpha_frac));
  out.set("calib.eta", fmt(cfg.calib.eta));
  out.set("calib.buckets", std::to_string(cfg.calib.buckets));
  out.set("calib.max_iters", std::to_string(cfg.calib.max_iters));
  out.set("calib.ridge_lambda", fmt(cfg.calib.ridge_lambda));
  out.set("calib.tree_depth", std::to_string(cfg.calib.tree_depth));
  out.set("calib.tree_min_leaf", std::to_string(cfg.calib.tree_min_leaf));
  out.set("calib.clamp", fmt(cfg.calib.clamp));
  out.set("calib.global_auditors", cfg.calib.global_auditors ? "true" : "false");
  out.set("forest.n_trees", std::to_string(cfg.forest.n_trees));
  out.set("forest.max_depth", std::to_string(cfg.forest.max_depth));
  out.set("forest.mtry", std::to_string(cfg.forest.mtry));
  out.set("split.train", fmt(cfg.split.train));
  out.set("split.calib", fmt(cfg.split.calib));
  return out;
}

namespace {

struct SubgroupDef {
  std::string name;
  int column = -1;  // -1 = everyone
  double value = 0.0;
};

std::vector<SubgroupDef> subgroup_roster(Eigen::Index dim) {
  std::vector<SubgroupDef> roster = {{"All", -1, 0.0}};
  if (dim >= 5) {
    roster.push_back({"X3=1", 3, 1.0});
    roster.push_back({"X3=0", 3, 0.0});
    roster.push_back({"X4=1", 4, 1.0});
    roster.push_back({"X4=0", 4, 0.0});
  }
  return roster;
}

std::vector<int> subgroup_rows(const Eigen::MatrixXd& X, const SubgroupDef& sg) {
  std::vector<int> rows;
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    if (sg.column < 0 || X(i, sg.column) == sg.value) rows.push_back(static_cast<int>(i));
  }
  return rows;
}

double mean_over(const Eigen::VectorXd& v, const std::vector<int>& rows) {
  double s = 0.0;
  for (int i : rows) s += v[i];
  return s / static_cast<double>(rows.size());
}

// Self-normalized weighted mean restricted to a row subset.
std::optional<double> weighted_mean_over(const Eigen::VectorXd& values,
                                         const Eigen::VectorXd& weights,
                                         const std::vector<int>& rows) {
  if (rows.empty()) return std::nullopt;
  double num = 0.0, den = 0.0;
  for (int i : rows) {
    if (weights[i] > kMaxPropensityOdds) {
      throw std::runtime_error("propensity weight overflow");
    }
    num += values[i] * weights[i];
    den += weights[i];
  }
  if (!(den > 0.0)) return std::nullopt;
  return num / den;
}

struct TraceEntry {
  Method method;
  FunctionalKind functional;
  double horizon;
  AuditTrace trace;
};

struct RepOutput {
  // estimates[f][h][method][subgroup]; benchmarks[f][h][subgroup]
  std::vector<std::vector<std::vector<std::vector<std::optional<double>>>>> estimates;
  std::vector<std::vector<std::vector<double>>> benchmarks;
  // cindex[h][prediction method][subgroup], SP functional only
  std::vector<std::vector<std::vector<std::optional<double>>>> cindex;
  std::vector<TraceEntry> traces;
  long long wall_ms = 0;
};

struct SplitRows {
  std::vector<int> train, calib, validation;
};

SplitRows split_source(int n, const SplitSettings& split, std::uint64_t seed, int rep) {
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  RngStream rng(seed, streams::kSplit +
                          streams::kReplicationStride * static_cast<std::uint64_t>(rep));
  for (int i = n - 1; i > 0; --i) {
    const int j = static_cast<int>(rng.uniform_int(static_cast<std::uint32_t>(i + 1)));
    std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
  }
  SplitRows rows;
  const int n_train = static_cast<int>(std::lround(split.train * n));
  const int n_calib = static_cast<int>(std::lround(split.calib * n));
  for (int k = 0; k < n; ++k) {
    if (k < n_train) {
      rows.train.push_back(order[static_cast<std::size_t>(k)]);
    } else if (k < n_train + n_calib) {
      rows.calib.push_back(order[static_cast<std::size_t>(k)]);
    } else {
      rows.validation.push_back(order[static_cast<std::size_t>(k)]);
    }
  }
  if (rows.train.empty() || rows.calib.empty() || rows.validation.empty()) {
    throw std::runtime_error("source sample too small for train/calib/validation split");
  }
  return rows;
}

CalibrationConfig calibration_config(const CalibSettings& settings, AuditorKind kind,
                                     double range) {
  CalibrationConfig cfg;
  cfg.alpha = settings.alpha_frac * range;
  cfg.eta = settings.eta;
  cfg.n_buckets = settings.buckets;
  cfg.max_iters = settings.max_iters;
  cfg.auditor.kind = kind;
  cfg.auditor.ridge_lambda = settings.ridge_lambda;
  cfg.auditor.tree_depth = settings.tree_depth;
  cfg.auditor.tree_min_leaf = settings.tree_min_leaf;
  cfg.range_max = range;
  cfg.clamp = settings.clamp;
  cfg.global_auditors = settings.global_auditors;
  return cfg;
}

bool contains(const std::vector<Method>& methods, Method m) {
  return std::find(methods.begin(), methods.end(), m) != methods.end();
}

RepOutput run_replication(const ExperimentConfig& cfg, int rep) {
  const auto start = std::chrono::steady_clock::now();
  const ScenarioSpec& spec = cfg.scenario;
  const GeneratedCohort cohort = generate_cohort(spec, rep);
  const SurvivalDataset& data = cohort.data;

  const std::vector<int> src_rows = data.source_rows();
  const std::vector<int> tgt_rows = data.target_rows();
  if (src_rows.empty()) throw std::runtime_error("replication has no source rows");
  if (tgt_rows.empty()) throw std::runtime_error("replication has no target rows");

  const SurvivalDataset src = data.subset(src_rows);
  const SurvivalDataset tgt = data.subset(tgt_rows);
  const bool use_ipcw = std::holds_alternative<WeibullCensoring>(spec.censoring);
  const int n_sources = data.n_sources();

  const std::vector<SubgroupDef> roster = subgroup_roster(data.dim());
  std::vector<std::vector<int>> src_sg(roster.size()), tgt_sg(roster.size());
  for (std::size_t s = 0; s < roster.size(); ++s) {
    src_sg[s] = subgroup_rows(src.covariates, roster[s]);
    tgt_sg[s] = subgroup_rows(tgt.covariates, roster[s]);
  }

  const bool needs_ml = std::any_of(cfg.methods.begin(), cfg.methods.end(),
                                    is_prediction_method);
  const bool needs_ipsw =
      contains(cfg.methods, Method::Ipsw) || contains(cfg.methods, Method::IpswSub);

  SplitRows split;
  if (needs_ml) {
    split = split_source(static_cast<int>(src.n()), cfg.split, spec.seed, rep);
  }

  // Propensity machinery is shared across functionals and horizons.
  std::vector<Eigen::VectorXd> source_odds(static_cast<std::size_t>(n_sources));
  std::vector<std::vector<int>> rows_per_source(static_cast<std::size_t>(n_sources));
  std::vector<double> source_prior(static_cast<std::size_t>(n_sources));
  // Per-subgroup odds for ipsw-sub, indexed [subgroup][source row].
  std::vector<Eigen::VectorXd> subgroup_odds(roster.size());
  if (needs_ipsw) {
    for (int m = 0; m < n_sources; ++m) {
      auto& rows = rows_per_source[static_cast<std::size_t>(m)];
      for (Eigen::Index i = 0; i < src.n(); ++i) {
        if (src.domain[static_cast<std::size_t>(i)] == m) rows.push_back(static_cast<int>(i));
      }
      if (rows.empty()) throw std::runtime_error("source domain has no rows");
      Eigen::MatrixXd sx(static_cast<Eigen::Index>(rows.size()), src.covariates.cols());
      for (std::size_t k = 0; k < rows.size(); ++k) {
        sx.row(static_cast<Eigen::Index>(k)) = src.covariates.row(rows[k]);
      }
      const PropensityModel model = fit_propensity(sx, tgt.covariates);
      const Eigen::VectorXd odds = model.odds(sx);
      source_odds[static_cast<std::size_t>(m)].resize(src.n());
      for (std::size_t k = 0; k < rows.size(); ++k) {
        source_odds[static_cast<std::size_t>(m)][rows[k]] = odds[static_cast<Eigen::Index>(k)];
      }
      source_prior[static_cast<std::size_t>(m)] =
          static_cast<double>(rows.size()) / static_cast<double>(data.n());
    }

    if (contains(cfg.methods, Method::IpswSub)) {
      for (std::size_t s = 1; s < roster.size(); ++s) {
        subgroup_odds[s] = Eigen::VectorXd::Zero(src.n());
        const std::vector<int>& sg_tgt = tgt_sg[s];
        if (sg_tgt.empty()) throw std::runtime_error("ipsw_subgroup: empty target subgroup");

        std::vector<std::vector<int>> sg_by_source(static_cast<std::size_t>(n_sources));
        std::size_t sg_total = sg_tgt.size();
        for (int m = 0; m < n_sources; ++m) {
          for (int i : rows_per_source[static_cast<std::size_t>(m)]) {
            if (roster[s].column < 0 ||
                src.covariates(i, roster[s].column) == roster[s].value) {
              sg_by_source[static_cast<std::size_t>(m)].push_back(i);
            }
          }
          sg_total += sg_by_source[static_cast<std::size_t>(m)].size();
        }
        for (int m = 0; m < n_sources; ++m) {
          const auto& sg_src = sg_by_source[static_cast<std::size_t>(m)];
          if (sg_src.empty()) continue;
          Eigen::MatrixXd sx(static_cast<Eigen::Index>(sg_src.size()), src.covariates.cols());
          Eigen::MatrixXd tx(static_cast<Eigen::Index>(sg_tgt.size()), tgt.covariates.cols());
          for (std::size_t k = 0; k < sg_src.size(); ++k) {
            sx.row(static_cast<Eigen::Index>(k)) = src.covariates.row(sg_src[k]);
          }
          for (std::size_t k = 0; k < sg_tgt.size(); ++k) {
            tx.row(static_cast<Eigen::Index>(k)) = tgt.covariates.row(sg_tgt[k]);
          }
          const PropensityModel model = fit_propensity(sx, tx);
          const Eigen::VectorXd odds = model.odds(sx);
          const double prior =
              static_cast<double>(sg_src.size()) / static_cast<double>(sg_total);
          for (std::size_t k = 0; k < sg_src.size(); ++k) {
            subgroup_odds[s][sg_src[k]] = prior * odds[static_cast<Eigen::Index>(k)];
          }
        }
      }
    }
  }

  // Combined multi-source weights w_m * sigma_T/sigma_m, zero off-source.
  Eigen::VectorXd ipsw_weights;
  if (needs_ipsw) {
    ipsw_weights = Eigen::VectorXd::Zero(src.n());
    for (int m = 0; m < n_sources; ++m) {
      for (int i : rows_per_source[static_cast<std::size_t>(m)]) {
        ipsw_weights[i] =
            source_prior[static_cast<std::size_t>(m)] * source_odds[static_cast<std::size_t>(m)][i];
      }
    }
  }

  const std::size_t n_func = spec.functionals.size();
  const std::size_t n_grid = spec.grid.size();
  const std::size_t n_methods = cfg.methods.size();

  RepOutput out;
  out.estimates.assign(
      n_func, std::vector<std::vector<std::vector<std::optional<double>>>>(
                  n_grid, std::vector<std::vector<std::optional<double>>>(
                              n_methods,
                              std::vector<std::optional<double>>(roster.size()))));
  out.benchmarks.assign(n_func, std::vector<std::vector<double>>(
                                    n_grid, std::vector<double>(roster.size(), 0.0)));

  std::vector<int> prediction_method_slots;
  for (std::size_t mi = 0; mi < n_methods; ++mi) {
    if (is_prediction_method(cfg.methods[mi])) {
      prediction_method_slots.push_back(static_cast<int>(mi));
    }
  }
  const bool wants_cindex =
      std::find(spec.functionals.begin(), spec.functionals.end(),
                FunctionalKind::SurvivalProbability) != spec.functionals.end() &&
      !prediction_method_slots.empty();
  if (wants_cindex) {
    out.cindex.assign(n_grid, std::vector<std::vector<std::optional<double>>>(
                                  prediction_method_slots.size(),
                                  std::vector<std::optional<double>>(roster.size())));
  }

  for (std::size_t f = 0; f < n_func; ++f) {
    const FunctionalKind kind = spec.functionals[f];
    const PseudoMatrix pseudo_src = use_ipcw ? pseudo_ipcw(src, kind, spec.grid)
                                             : pseudo_jackknife(src, kind, spec.grid);
    const PseudoMatrix pseudo_tgt = use_ipcw ? pseudo_ipcw(tgt, kind, spec.grid)
                                             : pseudo_jackknife(tgt, kind, spec.grid);

    // Per-source pseudo-observations for the multi-source weighting.
    std::vector<PseudoMatrix> pseudo_by_source;
    if (needs_ipsw && n_sources >= 2) {
      for (int m = 0; m < n_sources; ++m) {
        const SurvivalDataset per = src.subset(rows_per_source[static_cast<std::size_t>(m)]);
        pseudo_by_source.push_back(use_ipcw ? pseudo_ipcw(per, kind, spec.grid)
                                            : pseudo_jackknife(per, kind, spec.grid));
      }
    }

    for (std::size_t h = 0; h < n_grid; ++h) {
      const double horizon = spec.grid[h];
      const double range = functional_range(kind, horizon);
      const Eigen::VectorXd theta_src = pseudo_src.values.col(static_cast<Eigen::Index>(h));
      const Eigen::VectorXd theta_tgt = pseudo_tgt.values.col(static_cast<Eigen::Index>(h));

      for (std::size_t s = 0; s < roster.size(); ++s) {
        out.benchmarks[f][h][s] = target_benchmark(theta_tgt, tgt_sg[s]);
      }

      // Multi-source pseudo values aligned to pooled-source row order.
      Eigen::VectorXd theta_ipsw = theta_src;
      if (needs_ipsw && n_sources >= 2) {
        for (int m = 0; m < n_sources; ++m) {
          const auto& rows = rows_per_source[static_cast<std::size_t>(m)];
          for (std::size_t k = 0; k < rows.size(); ++k) {
            theta_ipsw[rows[k]] =
                pseudo_by_source[static_cast<std::size_t>(m)].values(
                    static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(h));
          }
        }
      }

      // Initial predictors and calibrated versions, shared by method pairs.
      PredictFn lm_fn, rf_fn;
      Eigen::VectorXd train_theta;
      Eigen::MatrixXd train_X;
      if (needs_ml) {
        train_X.resize(static_cast<Eigen::Index>(split.train.size()), src.covariates.cols());
        train_theta.resize(static_cast<Eigen::Index>(split.train.size()));
        for (std::size_t k = 0; k < split.train.size(); ++k) {
          train_X.row(static_cast<Eigen::Index>(k)) = src.covariates.row(split.train[k]);
          train_theta[static_cast<Eigen::Index>(k)] = theta_src[split.train[k]];
        }
        const bool needs_lm = contains(cfg.methods, Method::Lm) ||
                              contains(cfg.methods, Method::MclmRidge) ||
                              contains(cfg.methods, Method::MclmTree);
        const bool needs_rf = contains(cfg.methods, Method::Rf) ||
                              contains(cfg.methods, Method::McrfRidge) ||
                              contains(cfg.methods, Method::McrfTree);
        if (needs_lm) lm_fn = predictor_from(fit_ols(train_X, train_theta));
        if (needs_rf) {
          const int mtry = cfg.forest.mtry > 0
                               ? cfg.forest.mtry
                               : static_cast<int>((src.covariates.cols() + 2) / 3);
          RngStream seeder(spec.seed,
                           streams::kReplicationStride * static_cast<std::uint64_t>(rep) +
                               8000 + 16 * static_cast<std::uint64_t>(h) +
                               2 * static_cast<std::uint64_t>(f));
          rf_fn = predictor_from(fit_forest(train_X, train_theta, cfg.forest.n_trees,
                                            cfg.forest.max_depth, mtry, seeder.next_u64()));
        }
      }

      auto calibrated = [&](const PredictFn& base, AuditorKind auditor,
                            Method method) -> PredictFn {
        const CalibrationConfig ccfg = calibration_config(cfg.calib, auditor, range);
        CalibrationResult res =
            calibrate(base, src.covariates, theta_src, split.calib, split.validation, ccfg);
        out.traces.push_back(TraceEntry{method, kind, horizon, std::move(res.trace)});
        return res.predictor.as_fn();
      };

      for (std::size_t mi = 0; mi < n_methods; ++mi) {
        const Method method = cfg.methods[mi];
        auto& cells = out.estimates[f][h][mi];
        switch (method) {
          case Method::Naive:
            for (std::size_t s = 0; s < roster.size(); ++s) {
              if (!src_sg[s].empty()) cells[s] = mean_over(theta_src, src_sg[s]);
            }
            break;
          case Method::Ipsw:
            for (std::size_t s = 0; s < roster.size(); ++s) {
              cells[s] = weighted_mean_over(theta_ipsw, ipsw_weights, src_sg[s]);
            }
            break;
          case Method::IpswSub:
            // Defined per subgroup only; All stays undefined.
            for (std::size_t s = 1; s < roster.size(); ++s) {
              cells[s] = weighted_mean_over(theta_ipsw, subgroup_odds[s], src_sg[s]);
            }
            break;
          case Method::Lm:
          case Method::MclmRidge:
          case Method::MclmTree:
          case Method::Rf:
          case Method::McrfRidge:
          case Method::McrfTree: {
            PredictFn fn;
            if (method == Method::Lm) {
              fn = lm_fn;
            } else if (method == Method::Rf) {
              fn = rf_fn;
            } else if (method == Method::MclmRidge) {
              fn = calibrated(lm_fn, AuditorKind::Ridge, method);
            } else if (method == Method::MclmTree) {
              fn = calibrated(lm_fn, AuditorKind::Tree, method);
            } else if (method == Method::McrfRidge) {
              fn = calibrated(rf_fn, AuditorKind::Ridge, method);
            } else {
              fn = calibrated(rf_fn, AuditorKind::Tree, method);
            }
            const Eigen::VectorXd preds = fn(tgt.covariates);
            for (std::size_t s = 0; s < roster.size(); ++s) {
              if (!tgt_sg[s].empty()) cells[s] = mean_over(preds, tgt_sg[s]);
            }
            if (wants_cindex && kind == FunctionalKind::SurvivalProbability) {
              const auto slot = std::find(prediction_method_slots.begin(),
                                          prediction_method_slots.end(),
                                          static_cast<int>(mi));
              const std::size_t pm = static_cast<std::size_t>(
                  slot - prediction_method_slots.begin());
              for (std::size_t s = 0; s < roster.size(); ++s) {
                const auto& rows = tgt_sg[s];
                if (rows.size() < 2) continue;
                Eigen::VectorXd p(static_cast<Eigen::Index>(rows.size()));
                Eigen::VectorXd t(static_cast<Eigen::Index>(rows.size()));
                std::vector<std::uint8_t> e(rows.size());
                for (std::size_t k = 0; k < rows.size(); ++k) {
                  p[static_cast<Eigen::Index>(k)] = preds[rows[k]];
                  t[static_cast<Eigen::Index>(k)] = tgt.observed_time[rows[k]];
                  e[k] = tgt.event[static_cast<std::size_t>(rows[k])];
                }
                try {
                  out.cindex[h][pm][s] = c_index(p, t, e);
                } catch (const std::runtime_error&) {
                  // no comparable pairs in this subgroup draw
                }
              }
            }
            break;
          }
        }
      }
    }
  }

  out.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                    std::chrono::steady_clock::now() - start)
                    .count();
  return out;
}

}  // namespace

ScenarioOutputs run_scenario(const ExperimentConfig& cfg, const std::string& out_dir,
                             int threads) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);

  const int reps = cfg.replications;
  std::vector<std::optional<RepOutput>> results(static_cast<std::size_t>(reps));
  std::vector<AbortedReplication> aborted;
  std::mutex abort_mutex;

  std::atomic<int> next{0};
  auto worker = [&]() {
    while (true) {
      const int rep = next.fetch_add(1);
      if (rep >= reps) break;
      try {
        results[static_cast<std::size_t>(rep)] = run_replication(cfg, rep);
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(abort_mutex);
        aborted.push_back(AbortedReplication{rep, cfg.scenario.seed, e.what()});
      }
    }
  };

  const int n_workers = std::max(1, threads);
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_workers));
    for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  std::sort(aborted.begin(), aborted.end(),
            [](const AbortedReplication& a, const AbortedReplication& b) {
              return a.replication < b.replication;
            });

  ScenarioOutputs out;
  out.aborted = aborted;

  const std::vector<SubgroupDef> roster = subgroup_roster(5);
  const auto& grid = cfg.scenario.grid;

  for (std::size_t f = 0; f < cfg.scenario.functionals.size(); ++f) {
    const FunctionalKind kind = cfg.scenario.functionals[f];
    EvalReport report;
    for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi) {
      for (std::size_t s = 0; s < roster.size(); ++s) {
        for (std::size_t h = 0; h < grid.size(); ++h) {
          std::vector<double> abs_biases, rel_biases, ests, benches;
          for (int rep = 0; rep < reps; ++rep) {
            const auto& res = results[static_cast<std::size_t>(rep)];
            if (!res) continue;
            const auto& est = res->estimates[f][h][mi][s];
            const double bench = res->benchmarks[f][h][s];
            benches.push_back(bench);
            if (!est) continue;
            ests.push_back(*est);
            const BiasResult b = bias(*est, bench);
            abs_biases.push_back(b.absolute);
            if (b.relative) rel_biases.push_back(*b.relative);
          }
          EvalRow row;
          row.method = method_name(cfg.methods[mi]);
          row.subgroup = roster[s].name;
          row.horizon = grid[h];
          row.reps = static_cast<int>(ests.size());
          if (!benches.empty()) {
            row.benchmark = std::accumulate(benches.begin(), benches.end(), 0.0) /
                            static_cast<double>(benches.size());
          }
          if (!ests.empty()) {
            row.estimate = std::accumulate(ests.begin(), ests.end(), 0.0) /
                           static_cast<double>(ests.size());
            const double mean_abs =
                std::accumulate(abs_biases.begin(), abs_biases.end(), 0.0) /
                static_cast<double>(abs_biases.size());
            row.abs_bias = mean_abs;
            if (abs_biases.size() > 1) {
              double ss = 0.0;
              for (double v : abs_biases) ss += (v - mean_abs) * (v - mean_abs);
              row.se = std::sqrt(ss / static_cast<double>(abs_biases.size() - 1)) /
                       std::sqrt(static_cast<double>(abs_biases.size()));
            }
            if (!rel_biases.empty()) {
              row.rel_bias = std::accumulate(rel_biases.begin(), rel_biases.end(), 0.0) /
                             static_cast<double>(rel_biases.size());
            }
          }
          report.rows.push_back(std::move(row));
        }
      }
    }
    const std::string path =
        (fs::path(out_dir) / ("report_" + functional_name(kind) + ".csv")).string();
    report.write_csv(path);
    out.files.push_back(path);
    out.reports.emplace(kind, std::move(report));
  }

  // Combined audit traces across replications.
  {
    const std::string path = (fs::path(out_dir) / "traces.csv").string();
    std::ofstream trace_out(path, std::ios::binary);
    trace_out << "rep,method,functional,horizon,iteration,bucket,delta,audit_stat,mse,halt\n";
    for (int rep = 0; rep < reps; ++rep) {
      const auto& res = results[static_cast<std::size_t>(rep)];
      if (!res) continue;
      for (const TraceEntry& entry : res->traces) {
        const char* halt =
            entry.trace.halt == HaltReason::Converged ? "converged" : "max_iters";
        for (const AuditRecord& record : entry.trace.records) {
          trace_out << rep << ',' << method_name(entry.method) << ','
                    << functional_name(entry.functional) << ',' << fmt(entry.horizon)
                    << ',' << record.iteration << ',' << record.bucket << ','
                    << fmt(record.delta) << ',' << fmt(record.audit_stat) << ','
                    << fmt(record.mse) << ',' << halt << '\n';
        }
      }
    }
    out.files.push_back(path);
  }

  // Target-domain concordance for prediction methods (SP runs only).
  const bool wants_cindex =
      std::find(cfg.scenario.functionals.begin(), cfg.scenario.functionals.end(),
                FunctionalKind::SurvivalProbability) != cfg.scenario.functionals.end() &&
      std::any_of(cfg.methods.begin(), cfg.methods.end(), is_prediction_method);
  if (wants_cindex) {
    std::vector<int> slots;
    for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi) {
      if (is_prediction_method(cfg.methods[mi])) slots.push_back(static_cast<int>(mi));
    }
    const std::string path = (fs::path(out_dir) / "cindex.csv").string();
    std::ofstream cindex_out(path, std::ios::binary);
    cindex_out << "method,subgroup,horizon,cindex,se,reps\n";
    for (std::size_t pm = 0; pm < slots.size(); ++pm) {
      for (std::size_t s = 0; s < roster.size(); ++s) {
        for (std::size_t h = 0; h < grid.size(); ++h) {
          std::vector<double> values;
          for (int rep = 0; rep < reps; ++rep) {
            const auto& res = results[static_cast<std::size_t>(rep)];
            if (!res || res->cindex.empty()) continue;
            const auto& cell = res->cindex[h][pm][s];
            if (cell) values.push_back(*cell);
          }
          cindex_out << method_name(cfg.methods[static_cast<std::size_t>(slots[pm])]) << ','
                     << roster[s].name << ',' << fmt(grid[h]) << ',';
          if (values.empty()) {
            cindex_out << "NA,NA,0\n";
            continue;
          }
          const double mean = std::accumulate(values.begin(), values.end(), 0.0) /
                              static_cast<double>(values.size());
          double se = 0.0;
          if (values.size() > 1) {
            double ss = 0.0;
            for (double v : values) ss += (v - mean) * (v - mean);
            se = std::sqrt(ss / static_cast<double>(values.size() - 1)) /
                 std::sqrt(static_cast<double>(values.size()));
          }
          cindex_out << fmt(mean) << ',' << fmt(se) << ',' << values.size() << '\n';
        }
      }
    }
    out.files.push_back(path);
  }

  // Manifest: resolved configuration digest, seeds, outputs, timings.
  {
    nlohmann::json manifest;
    manifest["scenario"] = cfg.id;
    const std::string canonical = resolved_config(cfg).canonical();
    char hash_hex[32];
    std::snprintf(hash_hex, sizeof(hash_hex), "%016llx",
                  static_cast<unsigned long long>(fnv1a_hash(canonical)));
    manifest["config_hash"] = hash_hex;
    manifest["seed"] = cfg.scenario.seed;
    manifest["replications"] = reps;
    std::vector<std::string> method_list;
    for (Method m : cfg.methods) method_list.push_back(method_name(m));
    manifest["methods"] = method_list;
    manifest["outputs"] = out.files;
    nlohmann::json aborts = nlohmann::json::array();
    for (const auto& a : aborted) {
      aborts.push_back({{"replication", a.replication},
                        {"seed", a.seed},
                        {"error", a.error}});
    }
    manifest["aborted"] = aborts;
    nlohmann::json timings = nlohmann::json::array();
    for (int rep = 0; rep < reps; ++rep) {
      const auto& res = results[static_cast<std::size_t>(rep)];
      timings.push_back(res ? nlohmann::json(res->wall_ms) : nlohmann::json(nullptr));
    }
    manifest["wall_ms_per_replication"] = timings;

    out.manifest_path = (fs::path(out_dir) / "manifest.json").string();
    std::ofstream manifest_out(out.manifest_path, std::ios::binary);
    manifest_out << manifest.dump(2) << '\n';
    out.files.push_back(out.manifest_path);
  }

  if (static_cast<double>(aborted.size()) > 0.1 * static_cast<double>(reps)) {
    throw std::runtime_error("scenario failed: more than 10% of replications aborted");
  }
  return out;
}

SingleRunResult run_single(const SurvivalDataset& data, const SingleRunOptions& opts) {
  data.validate();
  const std::vector<int> src_rows = data.source_rows();
  const std::vector<int> tgt_rows = data.target_rows();
  if (src_rows.empty()) throw std::runtime_error("run_single: no source rows");

  const SurvivalDataset src = data.subset(src_rows);
  const std::vector<double> grid = {opts.functional.horizon};
  const PseudoMatrix pseudo = src.has_strata()
                                  ? pseudo_ipcw(src, opts.functional.kind, grid)
                                  : pseudo_jackknife(src, opts.functional.kind, grid);
  const Eigen::VectorXd theta = pseudo.values.col(0);

  SingleRunResult result;
  const Method method = opts.method;

  if (method == Method::Naive) {
    result.rows.push_back({"All", theta.mean()});
    return result;
  }

  if (tgt_rows.empty()) throw std::runtime_error("run_single: no target rows");
  const SurvivalDataset tgt = data.subset(tgt_rows);

  if (method == Method::Ipsw) {
    const PropensityModel model = fit_propensity(src.covariates, tgt.covariates);
    result.rows.push_back({"All", ipsw_estimate(theta, src.covariates, model)});
    return result;
  }

  if (method == Method::IpswSub) {
    if (!opts.subgroup_column) {
      throw std::runtime_error("run_single: ipsw-sub requires --subgroup");
    }
    // Column name xK from the dataset header convention.
    const std::string& name = *opts.subgroup_column;
    if (name.size() < 2 || name[0] != 'x') {
      throw std::runtime_error("run_single: subgroup column must be named x<k>");
    }
    const int col = std::stoi(name.substr(1));
    if (col < 0 || col >= data.dim()) {
      throw std::runtime_error("run_single: subgroup column out of range");
    }
    std::vector<int> src_groups(static_cast<std::size_t>(src.n()));
    std::vector<int> tgt_groups(static_cast<std::size_t>(tgt.n()));
    for (Eigen::Index i = 0; i < src.n(); ++i) {
      src_groups[static_cast<std::size_t>(i)] = static_cast<int>(src.covariates(i, col));
    }
    for (Eigen::Index i = 0; i < tgt.n(); ++i) {
      tgt_groups[static_cast<std::size_t>(i)] = static_cast<int>(tgt.covariates(i, col));
    }
    for (const auto& [group, estimate] :
         ipsw_subgroup(theta, src.covariates, src_groups, tgt.covariates, tgt_groups)) {
      result.rows.push_back({name + "=" + std::to_string(group), estimate});
    }
    return result;
  }

  // Prediction methods share the scenario pipeline: train/calib/validation
  // split of the source, base fit on train, optional post-processing.
  SplitRows split = split_source(static_cast<int>(src.n()), opts.split, opts.seed, 0);
  Eigen::MatrixXd train_X(static_cast<Eigen::Index>(split.train.size()), src.covariates.cols());
  Eigen::VectorXd train_theta(static_cast<Eigen::Index>(split.train.size()));
  for (std::size_t k = 0; k < split.train.size(); ++k) {
    train_X.row(static_cast<Eigen::Index>(k)) = src.covariates.row(split.train[k]);
    train_theta[static_cast<Eigen::Index>(k)] = theta[split.train[k]];
  }

  PredictFn base;
  if (method == Method::Lm || method == Method::MclmRidge || method == Method::MclmTree) {
    base = predictor_from(fit_ols(train_X, train_theta));
  } else {
    const int mtry = opts.forest.mtry > 0
                         ? opts.forest.mtry
                         : static_cast<int>((src.covariates.cols() + 2) / 3);
    base = predictor_from(fit_forest(train_X, train_theta, opts.forest.n_trees,
                                     opts.forest.max_depth, mtry, opts.seed));
  }

  PredictFn fn = base;
  if (is_calibrated_method(method)) {
    const AuditorKind auditor = (method == Method::MclmRidge || method == Method::McrfRidge)
                                    ? AuditorKind::Ridge
                                    : AuditorKind::Tree;
    const double range = functional_range(opts.functional.kind, opts.functional.horizon);
    CalibrationResult res = calibrate(base, src.covariates, theta, split.calib,
                                      split.validation,
                                      calibration_config(opts.calib, auditor, range));
    result.trace = std::move(res.trace);
    fn = res.predictor.as_fn();
  }

  result.rows.push_back({"All", fn(tgt.covariates).mean()});
  return result;
}

void write_audit_trace_csv(const std::string& path, const AuditTrace& trace) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << "iteration,bucket,delta,audit_stat,mse\n";
  for (const AuditRecord& record : trace.records) {
    out << record.iteration << ',' << record.bucket << ',' << fmt(record.delta) << ','
        << fmt(record.audit_stat) << ',' << fmt(record.mse) << '\n';
  }
}

}  // namespace survcal
