#pragma once

// Closed-form guarantee calculators for the tuned level mechanisms, a
// deterministic multi-threaded Monte Carlo harness, the trust/discard
// baseline mechanisms, exact subspace expectations, and parameter sweeps.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "mechlab/geometry.hpp"
#include "mechlab/mechanisms.hpp"

namespace mechlab {

// ---------------------------------------------------------------------------
// Regime arithmetic for the randomized level ladder.
//
// A regime is the payment-relevant abstraction of one agent's situation:
// theta_star   value at the efficient allocation
// delta_err    true welfare minus the weakest consistent welfare
// delta_vcg    weakest consistent welfare minus the no-show welfare
// (zeta, lambda) the mechanism's tuning for that agent.
// ---------------------------------------------------------------------------

struct RegimeParams {
  double theta_star = 0.0;
  double zeta = 0.0;
  double lambda = 1.0;
  double delta_err = 0.0;
  double delta_vcg = 0.0;
};

namespace detail {

inline void validate_regime(const RegimeParams& p) {
  if (!(p.lambda > 0.0)) throw std::invalid_argument("regime: lambda must be positive");
  if (p.delta_vcg < 0.0) throw std::invalid_argument("regime: delta_vcg must be non-negative");
  if (!(p.zeta + p.delta_vcg > 0.0))
    throw std::invalid_argument("regime: zeta + delta_vcg must be positive");
  if (p.delta_err + p.delta_vcg < 0.0)
    throw std::invalid_argument(
        "regime: delta_err + delta_vcg must be non-negative (it equals the welfare the "
        "agent adds)");
}

}  // namespace detail

// Top rung index: the ladder discounts 2^0, ..., 2^K scaled by lambda.
inline int regime_K(const RegimeParams& p) {
  detail::validate_regime(p);
  return ceil_log2_plus((p.zeta + p.delta_vcg) / p.lambda);
}

// First rung deep enough for the agent to participate.
inline int regime_k_star(const RegimeParams& p) {
  detail::validate_regime(p);
  return ceil_log2_plus((p.zeta - p.delta_err) / p.lambda);
}

// Probability that the agent participates (rungs k_star..K out of 0..K).
inline double expected_value_factor(const RegimeParams& p) {
  const int cap = regime_K(p);
  const int first = regime_k_star(p);
  return 1.0 - static_cast<double>(first) / (1.0 + cap);
}

// Exact expected value enjoyed by the agent.
inline double thm5_expected_value(const RegimeParams& p) {
  return expected_value_factor(p) * p.theta_star;
}

// Exact expected payment, by summation over the participating rungs.  At
// rung k the agent pays theta_star - (delta_err - zeta) - 2^k lambda.
inline double exact_expected_payment(const RegimeParams& p) {
  const int cap = regime_K(p);
  const int first = regime_k_star(p);
  const double base = p.theta_star - (p.delta_err - p.zeta);
  double total = 0.0;
  for (int k = first; k <= cap; ++k) total += base - std::ldexp(p.lambda, k);
  return total / (1.0 + cap);
}

// Closed-form lower bound on the expected payment.
inline double thm6_payment_lower_bound(const RegimeParams& p) {
  const int cap = regime_K(p);
  const double factor = expected_value_factor(p);
  return factor * (p.theta_star - (p.delta_err - p.zeta)) -
         4.0 * (p.delta_vcg + p.zeta) / (1.0 + cap);
}

// ---------------------------------------------------------------------------
// Consistency / robustness ratios for the default tuning zeta = lambda = 1.
// ---------------------------------------------------------------------------

struct ConsistencyRobustness {
  double welfare_consistency = 1.0;   // perfect predictions: welfare / OPT
  double revenue_consistency = 1.0;   // perfect predictions: revenue / OPT
  double welfare_robustness = 1.0;    // arbitrary predictions: welfare / OPT
  double revenue_robustness = 1.0;    // arbitrary predictions: revenue / (VCG revenue)
};

inline ConsistencyRobustness consistency_robustness(double max_delta_vcg) {
  if (max_delta_vcg < 0.0)
    throw std::invalid_argument("consistency_robustness: delta_vcg must be non-negative");
  const double d = 1.0 / (1.0 + ceil_log2_plus(1.0 + max_delta_vcg));
  return {1.0, d, d, d};
}

inline ConsistencyRobustness consistency_robustness(const TypeProfile& profile,
                                                    const std::vector<Polytope>& predictions) {
  detail::require_per_agent(predictions.size(), profile.num_agents(), "predictions");
  double worst = 0.0;
  for (int i = 0; i < profile.num_agents(); ++i)
    worst = std::max(worst, error_measures(predictions[i], profile, i).delta_vcg);
  return consistency_robustness(worst);
}

// ---------------------------------------------------------------------------
// A two-agent instance family realizing any feasible regime exactly.
//
// Agent 0 (the focal agent) values allocation "hi" at theta_star; agent 1
// values "hi" at 2 and "lo" at 2 + theta_star - delta_err - delta_vcg.  A
// floor of theta_star - delta_err on the focal agent's "hi" value realizes
// the requested error measures; the rival keeps an uninformative prediction
// with the neutral tuning zeta = lambda = 1.
// ---------------------------------------------------------------------------

struct RealizedInstance {
  TypeProfile profile;
  std::vector<Polytope> predictions;
  TuningParams params;
  int focal = 0;  // index of the agent whose regime is realized
};

inline RealizedInstance realize_regime(const RegimeParams& p) {
  detail::validate_regime(p);
  const double rival_hi = 2.0;
  const double floor = p.theta_star - p.delta_err;
  const double rival_lo = rival_hi + p.theta_star - p.delta_err - p.delta_vcg;
  if (floor < 0.0)
    throw std::invalid_argument("realize_regime: delta_err cannot exceed theta_star");
  if (rival_lo < 0.0)
    throw std::invalid_argument(
        "realize_regime: delta_err + delta_vcg cannot exceed theta_star + 2");

  RealizedInstance inst;
  inst.profile = make_profile({"hi", "lo"}, {{p.theta_star, 0.0}, {rival_hi, rival_lo}});
  inst.predictions.resize(2);
  inst.predictions[0].constraints.push_back(axis_constraint(0, Relation::GreaterEq, floor));
  inst.params.zeta = {p.zeta, 1.0};
  inst.params.lambda = {p.lambda, 1.0};
  return inst;
}

// ---------------------------------------------------------------------------
// Baseline mechanisms: trust predictions completely, or discard them with
// probability beta.
// ---------------------------------------------------------------------------

inline MechanismOutcome baseline_trust(const TypeProfile& profile,
                                       const std::vector<Polytope>& predictions) {
  return mechanism_zeta_zero(profile, predictions,
                             std::vector<double>(profile.num_agents(), 0.0));
}

inline MechanismOutcome baseline_discard(const TypeProfile& profile,
                                         const std::vector<Polytope>& predictions, double beta,
                                         RngStream& rng) {
  if (!(beta >= 0.0 && beta <= 1.0))
    throw std::invalid_argument("baseline_discard: beta must lie in [0, 1]");
  RngStream call = detail::call_stream(rng);
  if (call.uniform() < beta) return vcg(profile);
  return baseline_trust(profile, predictions);
}

// ---------------------------------------------------------------------------
// Monte Carlo harness.
//
// Trials are numbered 0..trials-1 and each one receives the substream
// master.substream(t), so the estimate depends only on the master seed.
// Workers fill disjoint slots of per-trial result vectors and a final
// single-threaded pass aggregates in trial order, which makes every
// statistic bit-identical across worker counts.
// ---------------------------------------------------------------------------

struct McStat {
  double mean = 0.0;
  double se = 0.0;
};

struct McSummary {
  long trials = 0;
  McStat welfare;
  McStat revenue;
  std::vector<McStat> agent_value;    // realized theta_i[alpha] for participants
  std::vector<McStat> agent_payment;  // realized payments (0 for excluded)
  std::vector<double> participation;  // participation frequency per agent
};

using TrialMechanism = std::function<MechanismOutcome(RngStream&)>;

namespace detail {

inline McStat summarize_slots(const std::vector<double>& slots, long stride, long offset,
                              long trials) {
  double sum = 0.0;
  for (long t = 0; t < trials; ++t) sum += slots[t * stride + offset];
  const double mean = sum / trials;
  double ss = 0.0;
  for (long t = 0; t < trials; ++t) {
    const double d = slots[t * stride + offset] - mean;
    ss += d * d;
  }
  McStat stat;
  stat.mean = mean;
  stat.se = trials > 1 ? std::sqrt(ss / (trials - 1) / trials) : 0.0;
  return stat;
}

}  // namespace detail

inline McSummary monte_carlo(const TypeProfile& profile, const TrialMechanism& mechanism,
                             long trials, std::uint64_t master_seed, int workers = 1) {
  if (trials < 1) throw std::invalid_argument("monte_carlo: trials must be at least 1");
  validate_profile(profile);
  const int agents = profile.num_agents();
  const long stride = 2 + 3 * agents;  // welfare, revenue, (value, payment, flag) per agent
  std::vector<double> slots(trials * stride, 0.0);

  auto run_range = [&](long lo, long hi) {
    const RngStream master(master_seed);
    for (long t = lo; t < hi; ++t) {
      RngStream trial = master.substream(static_cast<std::uint64_t>(t));
      const MechanismOutcome out = mechanism(trial);
      double* row = slots.data() + t * stride;
      row[0] = out.welfare;
      row[1] = out.revenue;
      for (int i = 0; i < agents; ++i) {
        const bool in = out.participates(i);
        row[2 + 3 * i] = in ? profile.agents[i][out.allocation] : 0.0;
        row[3 + 3 * i] = out.payments[i];
        row[4 + 3 * i] = in ? 1.0 : 0.0;
      }
    }
  };

  const int used = static_cast<int>(std::clamp<long>(workers, 1, std::min<long>(trials, 64)));
  if (used == 1) {
    run_range(0, trials);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(used);
    for (int w = 0; w < used; ++w) {
      const long lo = trials * w / used;
      const long hi = trials * (w + 1) / used;
      pool.emplace_back([&, w, lo, hi] {
        try {
          run_range(lo, hi);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (std::thread& th : pool) th.join();
    for (const std::exception_ptr& err : errors)
      if (err) std::rethrow_exception(err);
  }

  McSummary summary;
  summary.trials = trials;
  summary.welfare = detail::summarize_slots(slots, stride, 0, trials);
  summary.revenue = detail::summarize_slots(slots, stride, 1, trials);
  summary.agent_value.resize(agents);
  summary.agent_payment.resize(agents);
  summary.participation.resize(agents);
  for (int i = 0; i < agents; ++i) {
    summary.agent_value[i] = detail::summarize_slots(slots, stride, 2 + 3 * i, trials);
    summary.agent_payment[i] = detail::summarize_slots(slots, stride, 3 + 3 * i, trials);
    summary.participation[i] =
        detail::summarize_slots(slots, stride, 4 + 3 * i, trials).mean;
  }
  return summary;
}

// ---------------------------------------------------------------------------
// Bound verdicts and guarantee reports.
// ---------------------------------------------------------------------------

inline std::string check_lower_bound(double observed, double se, double bound) {
  if (observed >= bound - kCompareEps) return "satisfied";
  if (observed + 3.0 * se < bound) return "violated";
  return "inconclusive";
}

inline std::string check_equality(double observed, double se, double target) {
  const double tol = std::max(3.0 * se, kCompareEps);
  return std::fabs(observed - target) <= tol ? "satisfied" : "violated";
}

struct BoundCheck {
  std::string label;
  double bound = 0.0;     // target (equality) or lower bound
  double observed = 0.0;  // empirical or exact quantity checked against it
  double se = 0.0;
  std::string verdict;
};

struct AgentGuarantee {
  RegimeParams regime;
  double closed_form_value = 0.0;      // exact expected value
  double exact_expected_payment = 0.0; // exact expected payment (rung sum)
  double payment_lower_bound = 0.0;    // closed-form lower bound
  McStat value;
  McStat payment;
};

struct GuaranteeReport {
  long trials = 0;
  std::uint64_t seed = 0;
  int workers = 1;
  std::vector<AgentGuarantee> agents;
  McStat welfare;
  McStat revenue;
  double welfare_closed_form = 0.0;
  double revenue_lower_bound = 0.0;
  std::vector<BoundCheck> checks;
  bool all_satisfied = true;
};

// Evaluates the randomized level mechanism against its closed-form
// guarantees on one instance.
inline GuaranteeReport guarantee_report(const TypeProfile& profile,
                                        const std::vector<Polytope>& predictions,
                                        const TuningParams& params, long trials,
                                        std::uint64_t seed, int workers = 1) {
  const int agents = profile.num_agents();
  detail::require_per_agent(predictions.size(), agents, "predictions");
  detail::require_per_agent(params.zeta.size(), agents, "zeta");
  detail::require_per_agent(params.lambda.size(), agents, "lambda");

  GuaranteeReport report;
  report.trials = trials;
  report.seed = seed;
  report.workers = workers;

  const WelfareResult eff = welfare(profile);
  const McSummary mc = monte_carlo(
      profile,
      [&](RngStream& rng) { return mechanism_zeta_lambda(profile, predictions, params, rng); },
      trials, seed, workers);
  report.welfare = mc.welfare;
  report.revenue = mc.revenue;

  auto add_check = [&](std::string label, double bound, double observed, double se,
                       std::string verdict) {
    if (verdict != "satisfied") report.all_satisfied = false;
    report.checks.push_back({std::move(label), bound, observed, se, std::move(verdict)});
  };

  for (int i = 0; i < agents; ++i) {
    const ErrorMeasures em = error_measures(predictions[i], profile, i);
    AgentGuarantee g;
    g.regime = {profile.agents[i][eff.allocation], params.zeta[i], params.lambda[i],
                em.delta_err, em.delta_vcg};
    g.closed_form_value = thm5_expected_value(g.regime);
    g.exact_expected_payment = exact_expected_payment(g.regime);
    g.payment_lower_bound = thm6_payment_lower_bound(g.regime);
    g.value = mc.agent_value[i];
    g.payment = mc.agent_payment[i];
    report.welfare_closed_form += g.closed_form_value;
    report.revenue_lower_bound += g.payment_lower_bound;

    const std::string tag = "agent " + std::to_string(i);
    add_check(tag + " value matches closed form", g.closed_form_value, g.value.mean,
              g.value.se, check_equality(g.value.mean, g.value.se, g.closed_form_value));
    add_check(tag + " payment matches exact expectation", g.exact_expected_payment,
              g.payment.mean, g.payment.se,
              check_equality(g.payment.mean, g.payment.se, g.exact_expected_payment));
    add_check(tag + " exact expectation meets payment bound", g.payment_lower_bound,
              g.exact_expected_payment, 0.0,
              check_lower_bound(g.exact_expected_payment, 0.0, g.payment_lower_bound));
    report.agents.push_back(std::move(g));
  }

  add_check("welfare matches closed form", report.welfare_closed_form, mc.welfare.mean,
            mc.welfare.se,
            check_equality(mc.welfare.mean, mc.welfare.se, report.welfare_closed_form));
  add_check("revenue meets summed payment bound", report.revenue_lower_bound, mc.revenue.mean,
            mc.revenue.se,
            check_lower_bound(mc.revenue.mean, mc.revenue.se, report.revenue_lower_bound));
  return report;
}

// ---------------------------------------------------------------------------
// Exact expectations for the subspace mechanism, by enumerating every level
// draw.  Each agent's draw is independent: a uniform minimum level, then a
// uniform tuple among those attaining that minimum.
// ---------------------------------------------------------------------------

struct SubspaceExpectation {
  double welfare = 0.0;
  double revenue = 0.0;
  std::vector<double> agent_value;
  std::vector<double> agent_payment;
};

inline SubspaceExpectation subspace_expectation(const TypeProfile& profile,
                                                const SubspaceSpec& spec) {
  validate_subspace(spec, profile);
  const int agents = profile.num_agents();
  const int dim = profile.num_allocations();
  const int levels = subspace_levels(spec.H);
  const WelfareResult eff = welfare(profile);

  SubspaceExpectation expect;
  expect.agent_value.resize(agents, 0.0);
  expect.agent_payment.resize(agents, 0.0);

  for (int i = 0; i < agents; ++i) {
    const std::vector<TypeVector>& basis = spec.basis[i];
    const int rays = static_cast<int>(basis.size());
    double total_tuples = 1.0;
    for (int j = 0; j < rays; ++j) total_tuples *= levels;
    if (total_tuples > 1e6)
      throw std::invalid_argument("subspace_expectation: tuple space too large to enumerate");

    // Count tuples by their minimum entry so each draw's probability is
    // 1 / (levels * |tuples with that minimum|).
    std::vector<long> min_count(levels + 1, 0);
    std::vector<int> tuple(rays, 1);
    const double theta_star = profile.agents[i][eff.allocation];
    const double surplus = surplus_others(profile, i, eff.allocation);

    std::vector<std::vector<int>> all_tuples;
    for (;;) {
      all_tuples.push_back(tuple);
      int low = levels;
      for (int v : tuple) low = std::min(low, v);
      ++min_count[low];
      int pos = rays - 1;
      while (pos >= 0 && tuple[pos] == levels) tuple[pos--] = 1;
      if (pos < 0) break;
      ++tuple[pos];
    }

    for (const std::vector<int>& t : all_tuples) {
      int low = levels;
      for (int v : t) low = std::min(low, v);
      const double prob = 1.0 / (static_cast<double>(levels) * min_count[low]);

      TypeVector scaled(dim, 0.0);
      for (int j = 0; j < rays; ++j) {
        double top = 0.0;
        for (double x : basis[j]) top = std::max(top, x);
        const double scale = std::ldexp(spec.H / top, -t[j]);
        for (int a = 0; a < dim; ++a) scaled[a] += scale * basis[j][a];
      }
      const double hypothetical = welfare_with_replacement(profile, i, scaled).value;
      const double payment = hypothetical - surplus;
      if (profile.agents[i][eff.allocation] - payment >= -kCompareEps) {
        expect.agent_value[i] += prob * theta_star;
        expect.agent_payment[i] += prob * payment;
      }
    }
    expect.welfare += expect.agent_value[i];
    expect.revenue += expect.agent_payment[i];
  }
  return expect;
}

// ---------------------------------------------------------------------------
// Numeric oracle for a two-bidder second-price auction with a reserve under
// an iid single-item prior: the reserve is collected when exactly one bidder
// clears it, the losing bid when both do.
// ---------------------------------------------------------------------------

inline double spa_revenue_two_bidders(const SingleItemIidPrior& prior, double reserve,
                                      int intervals = 4096) {
  if (!prior.cdf || !(prior.hi > prior.lo))
    throw std::invalid_argument("spa_revenue_two_bidders: malformed prior");
  if (!(reserve >= prior.lo && reserve <= prior.hi))
    throw std::invalid_argument("spa_revenue_two_bidders: reserve outside support");
  const double f_r = prior.cdf(reserve);
  double integral = 0.0;  // Simpson for the expected losing bid above the reserve
  const int n = intervals % 2 == 0 ? intervals : intervals + 1;
  const double h = (prior.hi - reserve) / n;
  for (int j = 0; j <= n; ++j) {
    const double t = reserve + h * j;
    const double tail = 1.0 - prior.cdf(t);
    const double weight = (j == 0 || j == n) ? 1.0 : (j % 2 == 1 ? 4.0 : 2.0);
    integral += weight * tail * tail;
  }
  integral *= h / 3.0;
  return 2.0 * reserve * f_r * (1.0 - f_r) + reserve * (1.0 - f_r) * (1.0 - f_r) + integral;
}

// ---------------------------------------------------------------------------
// Parameter sweeps: expected value and payment as functions of zeta or of
// the prediction error, for several lambda settings, with optional Monte
// Carlo verification on realized instances.
// ---------------------------------------------------------------------------

enum class SweepAxis { Zeta, DeltaErr };

struct SweepSpec {
  SweepAxis axis = SweepAxis::Zeta;
  double theta_star = 15.0;
  double delta_vcg = 10.0;
  double fixed_delta_err = 2.0;  // used when sweeping zeta
  double fixed_zeta = 2.0;       // used when sweeping the error
  std::vector<double> grid;      // swept values
  std::vector<double> lambdas;
  long trials = 0;  // 0: emit exact values in the empirical columns
  std::uint64_t seed = 0;
  int workers = 1;
};

struct SweepRow {
  double param = 0.0;
  double lambda = 0.0;
  double expected_value = 0.0;
  double expected_payment = 0.0;
  double empirical_value = 0.0;
  double empirical_payment = 0.0;
  double se = 0.0;  // standard error of the empirical payment
};

inline std::vector<double> make_grid(double lo, double hi, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("make_grid: step must be positive");
  std::vector<double> grid;
  for (double v = lo; v <= hi + 1e-12; v += step) grid.push_back(v);
  return grid;
}

inline std::vector<SweepRow> sweep_figures(const SweepSpec& spec) {
  if (spec.grid.empty()) throw std::invalid_argument("sweep: empty parameter range");
  if (spec.lambdas.empty()) throw std::invalid_argument("sweep: no lambda values");

  std::vector<double> grid = spec.grid;
  std::sort(grid.begin(), grid.end());

  std::vector<SweepRow> rows;
  const RngStream seeder(spec.seed);
  std::uint64_t row_index = 0;
  for (double param : grid) {
    for (double lambda : spec.lambdas) {
      RegimeParams regime;
      regime.theta_star = spec.theta_star;
      regime.lambda = lambda;
      regime.delta_vcg = spec.delta_vcg;
      regime.zeta = spec.axis == SweepAxis::Zeta ? param : spec.fixed_zeta;
      regime.delta_err = spec.axis == SweepAxis::Zeta ? spec.fixed_delta_err : param;

      SweepRow row;
      row.param = param;
      row.lambda = lambda;
      row.expected_value = thm5_expected_value(regime);
      row.expected_payment = exact_expected_payment(regime);
      if (spec.trials > 0) {
        const RealizedInstance inst = realize_regime(regime);
        RngStream derive = seeder.substream(row_index);
        const McSummary mc = monte_carlo(
            inst.profile,
            [&](RngStream& rng) {
              return mechanism_zeta_lambda(inst.profile, inst.predictions, inst.params, rng);
            },
            spec.trials, derive.next(), spec.workers);
        row.empirical_value = mc.agent_value[inst.focal].mean;
        row.empirical_payment = mc.agent_payment[inst.focal].mean;
        row.se = mc.agent_payment[inst.focal].se;
      } else {
        row.empirical_value = row.expected_value;
        row.empirical_payment = row.expected_payment;
      }
      rows.push_back(row);
      ++row_index;
    }
  }
  return rows;
}

inline const char* sweep_csv_header() {
  return "param,lambda,expected_value,expected_payment,empirical_value,empirical_payment,se";
}

inline std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string csv = sweep_csv_header();
  csv.push_back('\n');
  char buf[256];
  for (const SweepRow& r : rows) {
    std::snprintf(buf, sizeof(buf), "%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g\n", r.param,
                  r.lambda, r.expected_value, r.expected_payment, r.empirical_value,
                  r.empirical_payment, r.se);
    csv += buf;
  }
  return csv;
}

}  // namespace mechlab
