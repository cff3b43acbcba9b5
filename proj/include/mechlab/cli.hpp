#ifndef MECHLAB_CLI_HPP
#define MECHLAB_CLI_HPP

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "mechlab/analysis.hpp"
#include "mechlab/config.hpp"
#include "mechlab/mechanisms.hpp"
#include "mechlab/serialization.hpp"
#include "mechlab/svg.hpp"
#include "mechlab/verify.hpp"

namespace mechlab {

// Parsed command line.  Optional fields override the matching config keys.
struct CliOptions {
  std::string command;      // run | verify | sweep
  std::string config_path;  // --config (required for run and sweep)
  std::string suite;        // verify positional
  std::optional<std::uint64_t> seed;
  std::optional<long> trials;
  std::optional<int> workers;
  std::string out_dir = "out";  // --out
};

inline Json json_of(const VerifySuiteResult& result) {
  Json json;
  json["suite"] = result.suite;
  json["seed"] = result.seed;
  Json checks = Json::array();
  for (const BoundCheck& c : result.checks) checks.push_back(json_of(c));
  json["checks"] = std::move(checks);
  json["passed"] = result.passed;
  return json;
}

namespace detail {

inline std::string load_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path.string());
  out << content;
  if (!out) throw std::runtime_error("short write: " + path.string());
}

inline std::string json_text(const Json& json) { return json.dump(2) + "\n"; }

// One value broadcasts to every agent; otherwise exactly one per agent.
inline std::vector<double> broadcast(std::vector<double> values, int agents,
                                     const std::string& what) {
  if (static_cast<int>(values.size()) == 1) return std::vector<double>(agents, values[0]);
  if (static_cast<int>(values.size()) != agents)
    throw ConfigError(what + ": expected 1 or " + std::to_string(agents) + " values");
  return values;
}

inline PriorModel uniform_prior(double lo, double hi) {
  if (!(hi > lo)) throw ConfigError("prior: need hi > lo");
  const double width = hi - lo;
  return single_item_iid_prior(
      [lo, hi, width](double v) {
        if (v <= lo) return 0.0;
        if (v >= hi) return 1.0;
        return (v - lo) / width;
      },
      [lo, hi, width](double v) { return v < lo || v > hi ? 0.0 : 1.0 / width; }, lo, hi);
}

// A single experiment assembled from a config: the profile, the side
// information, and which mechanism consumes it.
struct Experiment {
  TypeProfile profile;
  std::vector<Polytope> predictions;
  std::string mechanism;
  TuningParams tuning;              // ladder
  std::vector<double> zeta;         // zeta
  AMParams am;                      // am
  SubspaceSpec subspace;            // subspace
  std::vector<PriorModel> priors;   // prior
  double beta = 0.0;                // discard
  std::uint64_t seed = 0;
  long trials = 20000;
  int workers = 1;
};

inline Experiment build_experiment(const ConfigMap& cfg) {
  Experiment exp;
  exp.mechanism = cfg.get_string("mechanism");

  const std::vector<std::string> labels = cfg.get_words("allocations");
  const int dim = static_cast<int>(labels.size());
  const int agents = cfg.count_indexed("agent");
  if (agents < 1) throw ConfigError("need agent.0.values, agent.1.values, ...");
  std::vector<TypeVector> values;
  for (int i = 0; i < agents; ++i) {
    TypeVector type = cfg.get_reals("agent." + std::to_string(i) + ".values");
    if (static_cast<int>(type.size()) != dim)
      throw ConfigError("agent." + std::to_string(i) + ".values: expected " +
                        std::to_string(dim) + " numbers");
    values.push_back(std::move(type));
  }
  exp.profile = make_profile(labels, values);

  exp.predictions.resize(agents);
  const bool wants_predictions = exp.mechanism != "vcg" && exp.mechanism != "subspace" &&
                                 exp.mechanism != "prior";
  if (wants_predictions) {
    for (int i = 0; i < agents; ++i) {
      const std::string prefix = "predictor." + std::to_string(i);
      Polytope& poly = exp.predictions[i];
      if (cfg.has(prefix + ".floor")) {
        const std::vector<double> lows = cfg.get_reals(prefix + ".floor");
        if (static_cast<int>(lows.size()) != dim)
          throw ConfigError(prefix + ".floor: expected " + std::to_string(dim) + " numbers");
        for (int a = 0; a < dim; ++a)
          poly.constraints.push_back(axis_constraint(a, Relation::GreaterEq, lows[a]));
      }
      if (cfg.has(prefix + ".ceil")) {
        const std::vector<double> highs = cfg.get_reals(prefix + ".ceil");
        if (static_cast<int>(highs.size()) != dim)
          throw ConfigError(prefix + ".ceil: expected " + std::to_string(dim) + " numbers");
        for (int a = 0; a < dim; ++a)
          poly.constraints.push_back(axis_constraint(a, Relation::LessEq, highs[a]));
      }
      const int rows = cfg.count_indexed(prefix + ".row");
      for (int r = 0; r < rows; ++r)
        poly.constraints.push_back(parse_constraint_row(
            exp.profile.space, cfg.get_string(prefix + ".row." + std::to_string(r))));
    }
  }

  if (exp.mechanism == "ladder") {
    exp.tuning.zeta = broadcast(cfg.get_reals("zeta"), agents, "zeta");
    exp.tuning.lambda = broadcast(cfg.get_reals("lambda"), agents, "lambda");
  } else if (exp.mechanism == "zeta") {
    exp.zeta = broadcast(cfg.get_reals("zeta"), agents, "zeta");
  } else if (exp.mechanism == "am") {
    exp.am.omega = broadcast(cfg.get_reals("omega"), agents, "omega");
    exp.am.tau = cfg.get_reals("tau");
    if (static_cast<int>(exp.am.tau.size()) == 1)
      exp.am.tau.assign(static_cast<std::size_t>(dim), exp.am.tau[0]);
    if (static_cast<int>(exp.am.tau.size()) != dim)
      throw ConfigError("tau: expected 1 or " + std::to_string(dim) + " values");
  } else if (exp.mechanism == "discard") {
    exp.beta = cfg.get_real("beta");
  } else if (exp.mechanism == "subspace") {
    exp.subspace.H = cfg.get_real("subspace.H");
    exp.subspace.basis.resize(agents);
    for (int i = 0; i < agents; ++i) {
      const std::string prefix = "subspace.basis." + std::to_string(i);
      const int rays = cfg.count_indexed(prefix);
      if (rays < 1) throw ConfigError(prefix + ".0: need at least one basis vector");
      for (int r = 0; r < rays; ++r) {
        TypeVector ray = cfg.get_reals(prefix + "." + std::to_string(r));
        if (static_cast<int>(ray.size()) != dim)
          throw ConfigError(prefix + "." + std::to_string(r) + ": expected " +
                            std::to_string(dim) + " numbers");
        exp.subspace.basis[i].push_back(std::move(ray));
      }
    }
  } else if (exp.mechanism == "prior") {
    if (cfg.count_indexed("prior") != agents)
      throw ConfigError("need prior.0.kind, ..., one per agent");
    for (int i = 0; i < agents; ++i) {
      const std::string prefix = "prior." + std::to_string(i);
      const std::string kind = cfg.get_string(prefix + ".kind");
      if (kind == "uniform") {
        exp.priors.push_back(
            uniform_prior(cfg.get_real(prefix + ".lo"), cfg.get_real(prefix + ".hi")));
      } else if (kind == "discrete") {
        const int points = cfg.count_indexed(prefix + ".support");
        if (points < 1) throw ConfigError(prefix + ".support.0: need support points");
        std::vector<TypeVector> support;
        for (int t = 0; t < points; ++t) {
          TypeVector point = cfg.get_reals(prefix + ".support." + std::to_string(t));
          if (static_cast<int>(point.size()) != dim)
            throw ConfigError(prefix + ".support." + std::to_string(t) + ": expected " +
                              std::to_string(dim) + " numbers");
          support.push_back(std::move(point));
        }
        std::vector<double> prob = cfg.get_reals(prefix + ".prob");
        if (prob.size() != support.size())
          throw ConfigError(prefix + ".prob: expected " + std::to_string(points) + " numbers");
        exp.priors.push_back(discrete_prior(std::move(support), std::move(prob)));
      } else {
        throw ConfigError(prefix + ".kind: expected 'uniform' or 'discrete'");
      }
    }
  } else if (exp.mechanism != "vcg" && exp.mechanism != "wtvcg" && exp.mechanism != "trust") {
    throw ConfigError("unknown mechanism: " + exp.mechanism);
  }

  exp.seed = static_cast<std::uint64_t>(cfg.get_int("seed", 0));
  exp.trials = cfg.get_int("trials", 20000);
  exp.workers = static_cast<int>(cfg.get_int("workers", 1));
  exp.tuning.seed = exp.seed;
  return exp;
}

inline MechanismOutcome run_once(const Experiment& exp, RngStream& rng) {
  if (exp.mechanism == "vcg") return vcg(exp.profile);
  if (exp.mechanism == "wtvcg") return weakest_type_vcg(exp.profile, exp.predictions);
  if (exp.mechanism == "zeta")
    return mechanism_zeta_zero(exp.profile, exp.predictions, exp.zeta);
  if (exp.mechanism == "ladder")
    return mechanism_zeta_lambda(exp.profile, exp.predictions, exp.tuning, rng);
  if (exp.mechanism == "am") return weakest_type_am(exp.profile, exp.predictions, exp.am);
  if (exp.mechanism == "trust") return baseline_trust(exp.profile, exp.predictions);
  if (exp.mechanism == "discard")
    return baseline_discard(exp.profile, exp.predictions, exp.beta, rng);
  if (exp.mechanism == "subspace") return subspace_mechanism(exp.profile, exp.subspace, rng);
  if (exp.mechanism == "prior") return prior_groves(exp.profile, exp.priors);
  throw ConfigError("unknown mechanism: " + exp.mechanism);
}

inline int command_run(const CliOptions& options, std::ostream& log) {
  const ConfigMap cfg = parse_config(load_file(options.config_path));
  Experiment exp = build_experiment(cfg);
  cfg.ensure_all_used();
  if (options.seed) exp.seed = *options.seed;
  if (options.trials) exp.trials = *options.trials;
  if (options.workers) exp.workers = *options.workers;
  exp.tuning.seed = exp.seed;

  const std::filesystem::path out(options.out_dir);
  std::filesystem::create_directories(out);

  RngStream rng(exp.seed);
  const MechanismOutcome outcome = run_once(exp, rng);
  write_file(out / "outcome.json", json_text(json_of(outcome, exp.profile)));

  const McSummary summary = monte_carlo(
      exp.profile, [&](RngStream& trial) { return run_once(exp, trial); }, exp.trials,
      exp.seed, exp.workers);
  write_file(out / "summary.json", json_text(json_of(summary)));

  log << "mechanism " << exp.mechanism << ": allocation "
      << exp.profile.space.labels[outcome.allocation] << ", welfare " << outcome.welfare
      << ", revenue " << outcome.revenue << "\n";
  log << "monte carlo (" << exp.trials << " trials): welfare " << summary.welfare.mean
      << " +- " << summary.welfare.se << ", revenue " << summary.revenue.mean << " +- "
      << summary.revenue.se << "\n";

  if (exp.mechanism == "ladder") {
    const GuaranteeReport report = guarantee_report(exp.profile, exp.predictions, exp.tuning,
                                                    exp.trials, exp.seed, exp.workers);
    write_file(out / "report.json", json_text(json_of(report)));
    for (const BoundCheck& check : report.checks)
      log << "  [" << check.verdict << "] " << check.label << "\n";
    log << "guarantees: " << (report.all_satisfied ? "all satisfied" : "NOT satisfied")
        << "\n";
  }
  log << "wrote " << (out / "outcome.json").string() << ", " << (out / "summary.json").string()
      << (exp.mechanism == "ladder" ? ", " + (out / "report.json").string() : "") << "\n";
  return 0;
}

inline int command_verify(const CliOptions& options, std::ostream& log) {
  if (options.suite.empty())
    throw ConfigError("verify: choose a suite (thm2, thm5, thm6, thm7, thm9, myerson, "
                      "lp_oracle)");
  const std::uint64_t seed = options.seed.value_or(20260821ULL);
  const int workers = options.workers.value_or(1);
  const long trials = options.trials.value_or(0);
  const VerifySuiteResult result = verify_suite(options.suite, seed, workers, trials);
  log << verify_text(result);
  const std::filesystem::path out(options.out_dir);
  std::filesystem::create_directories(out);
  const std::filesystem::path path = out / ("verify_" + result.suite + ".json");
  write_file(path, json_text(json_of(result)));
  log << "wrote " << path.string() << "\n";
  return result.passed ? 0 : 1;
}

inline int command_sweep(const CliOptions& options, std::ostream& log) {
  const ConfigMap cfg = parse_config(load_file(options.config_path));
  SweepSpec spec;
  const std::string axis = cfg.get_string("sweep.axis", "zeta");
  if (axis == "zeta") {
    spec.axis = SweepAxis::Zeta;
  } else if (axis == "err") {
    spec.axis = SweepAxis::DeltaErr;
  } else {
    throw ConfigError("sweep.axis: expected 'zeta' or 'err'");
  }
  spec.theta_star = cfg.get_real("sweep.theta_star", spec.theta_star);
  spec.delta_vcg = cfg.get_real("sweep.delta_vcg", spec.delta_vcg);
  spec.fixed_delta_err = cfg.get_real("sweep.delta_err", spec.fixed_delta_err);
  spec.fixed_zeta = cfg.get_real("sweep.zeta", spec.fixed_zeta);
  spec.grid = make_grid(cfg.get_real("sweep.from"), cfg.get_real("sweep.to"),
                        cfg.get_real("sweep.step", 1.0));
  spec.lambdas = cfg.get_reals("sweep.lambda");
  spec.trials = cfg.get_int("trials", 0);
  spec.seed = static_cast<std::uint64_t>(cfg.get_int("seed", 0));
  spec.workers = static_cast<int>(cfg.get_int("workers", 1));
  cfg.ensure_all_used();
  if (options.seed) spec.seed = *options.seed;
  if (options.trials) spec.trials = *options.trials;
  if (options.workers) spec.workers = *options.workers;

  const std::vector<SweepRow> rows = sweep_figures(spec);
  const std::filesystem::path out(options.out_dir);
  std::filesystem::create_directories(out);
  write_file(out / "sweep.csv", sweep_csv(rows));
  log << "wrote " << (out / "sweep.csv").string() << " (" << rows.size() << " rows)\n";

  const std::string x_label = spec.axis == SweepAxis::Zeta ? "zeta" : "prediction error";
  for (std::size_t k = 0; k < spec.lambdas.size(); ++k) {
    const double lambda = spec.lambdas[k];
    const std::string suffix = "_" + std::to_string(k) + ".svg";
    const std::string tag = "lambda = " + detail::fmt_g(lambda);
    const std::filesystem::path value_path = out / ("sweep_value" + suffix);
    const std::filesystem::path payment_path = out / ("sweep_payment" + suffix);
    write_file(value_path, sweep_svg(rows, lambda, SweepColumn::Value,
                                     "expected value, " + tag, x_label));
    write_file(payment_path, sweep_svg(rows, lambda, SweepColumn::Payment,
                                       "expected payment, " + tag, x_label));
    log << "wrote " << value_path.string() << ", " << payment_path.string() << "\n";
  }
  return 0;
}

}  // namespace detail

// Executes one parsed command line.  Returns the process exit code: 0 on
// success (for verify: all checks satisfied), 1 on failed verification or an
// internal error, 2 on config problems, 3 on an infeasible prediction set.
inline int run_command(const CliOptions& options, std::ostream& log) {
  try {
    if (options.command == "run") return detail::command_run(options, log);
    if (options.command == "verify") return detail::command_verify(options, log);
    if (options.command == "sweep") return detail::command_sweep(options, log);
    throw ConfigError("unknown command: " + options.command);
  } catch (const InfeasiblePredictionError& e) {
    log << "error: " << e.what() << "\n";
    return 3;
  } catch (const ConfigError& e) {
    log << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    log << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace mechlab

#endif  // MECHLAB_CLI_HPP
