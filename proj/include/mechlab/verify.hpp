#ifndef MECHLAB_VERIFY_HPP
#define MECHLAB_VERIFY_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "mechlab/analysis.hpp"
#include "mechlab/common.hpp"
#include "mechlab/env.hpp"
#include "mechlab/geometry.hpp"
#include "mechlab/mechanisms.hpp"
#include "mechlab/rng.hpp"
#include "mechlab/vertexenum.hpp"

namespace mechlab {

// One named verification suite: a batch of checks with a single pass verdict.
struct VerifySuiteResult {
  std::string suite;
  std::uint64_t seed = 0;
  int workers = 1;
  std::vector<BoundCheck> checks;
  bool passed = true;  // every check "satisfied"
};

namespace detail {

inline std::string fmt_g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

inline void push_check(VerifySuiteResult& result, BoundCheck check) {
  result.passed = result.passed && check.verdict == "satisfied";
  result.checks.push_back(std::move(check));
}

inline BoundCheck exact_lower(std::string label, double observed, double bound) {
  return {std::move(label), bound, observed, 0.0, check_lower_bound(observed, 0.0, bound)};
}

inline BoundCheck exact_equal(std::string label, double observed, double target) {
  return {std::move(label), target, observed, 0.0, check_equality(observed, 0.0, target)};
}

inline BoundCheck tol_equal(std::string label, double observed, double target, double tol) {
  const bool ok = std::fabs(observed - target) <= tol;
  return {std::move(label), target, observed, 0.0, ok ? "satisfied" : "violated"};
}

inline BoundCheck mc_equal(std::string label, const McStat& stat, double target) {
  return {std::move(label), target, stat.mean, stat.se, check_equality(stat.mean, stat.se, target)};
}

// One-sided "meets the bound within three standard errors".
inline BoundCheck mc_meets(std::string label, const McStat& stat, double bound) {
  const bool ok = stat.mean >= bound - 3.0 * stat.se - kCompareEps;
  return {std::move(label), bound, stat.mean, stat.se, ok ? "satisfied" : "violated"};
}

inline BoundCheck count_check(std::string label, int got, int want) {
  return {std::move(label), static_cast<double>(want), static_cast<double>(got), 0.0,
          got == want ? "satisfied" : "violated"};
}

inline BoundCheck max_dev_check(std::string label, double deviation, double tol) {
  return {std::move(label), tol, deviation, 0.0, deviation <= tol ? "satisfied" : "violated"};
}

// ---------------------------------------------------------------------------
// Seeded generators
// ---------------------------------------------------------------------------

inline TypeProfile verify_profile(RngStream& rng, int agents, int dim) {
  std::vector<std::string> labels;
  for (int a = 0; a < dim; ++a) labels.push_back("g" + std::to_string(a));
  std::vector<TypeVector> values(agents, TypeVector(dim));
  for (int i = 0; i < agents; ++i)
    for (int a = 0; a < dim; ++a) values[i][a] = rng.uniform(0.0, 10.0);
  return make_profile(labels, values);
}

// Feasible-by-construction polytope: every row holds at `anchor` with slack.
inline Polytope verify_polytope(RngStream& rng, int dim, const TypeVector& anchor,
                                int max_rows) {
  Polytope poly;
  const int rows = static_cast<int>(rng.uniform_int(1, max_rows));
  for (int r = 0; r < rows; ++r) {
    LinearConstraint c;
    const int touched = static_cast<int>(rng.uniform_int(1, std::min(3, dim)));
    double biggest = 0.0;
    for (int t = 0; t < touched; ++t) {
      const int alloc = static_cast<int>(rng.uniform_int(0, dim - 1));
      c.coeffs[alloc] = rng.uniform(-2.0, 2.0);
      biggest = std::max(biggest, std::fabs(c.coeffs[alloc]));
    }
    if (biggest < 0.5) c.coeffs.begin()->second = 1.0;
    double at_anchor = 0.0;
    for (const auto& [alloc, coef] : c.coeffs) at_anchor += coef * anchor[alloc];
    const double slack = rng.uniform(0.1, 2.0);
    if (rng.uniform() < 0.5) {
      c.rel = Relation::GreaterEq;
      c.bound = at_anchor - slack;
    } else {
      c.rel = Relation::LessEq;
      c.bound = at_anchor + slack;
    }
    poly.constraints.push_back(std::move(c));
  }
  return poly;
}

// Independent oracle for the ceiling program: enumerate vertices of
// {(theta, gamma) : theta in poly, theta[a] + s_a <= gamma for all a} and take
// the smallest gamma.
inline double epigraph_vertex_welfare(const Polytope& poly, const TypeProfile& profile,
                                      int agent) {
  const int dim = profile.num_allocations();
  std::vector<LpConstraint> rows;
  for (int a = 0; a < dim; ++a) {
    LpConstraint row;
    row.a.assign(dim + 1, 0.0);
    row.a[a] = 1.0;
    row.a[dim] = -1.0;
    row.rel = Relation::LessEq;
    row.b = -surplus_others(profile, agent, a);
    rows.push_back(std::move(row));
  }
  for (const LinearConstraint& c : poly.constraints) {
    LpConstraint row;
    row.a.assign(dim + 1, 0.0);
    for (const auto& [alloc, coef] : c.coeffs) row.a[alloc] = coef;
    row.rel = c.rel;
    row.b = c.bound;
    rows.push_back(std::move(row));
  }
  double best = std::numeric_limits<double>::infinity();
  for_each_vertex(dim + 1, rows, [&](const std::vector<double>& v) {
    best = std::min(best, v[dim]);
  });
  return best;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// lp_oracle: the weakest-type LP against brute-force vertex enumeration, and
// the constraint-generation solver against the LP.
// ---------------------------------------------------------------------------

inline VerifySuiteResult verify_lp_oracle(std::uint64_t seed, int workers = 1) {
  VerifySuiteResult result{"lp_oracle", seed, workers, {}, true};
  RngStream rng(seed);
  const int rounds = 100;
  int lp_matches = 0, cg_matches = 0, budget_ok = 0;
  double worst_lp = 0.0, worst_cg = 0.0;
  int most_added = 0;
  for (int r = 0; r < rounds; ++r) {
    const int dim = static_cast<int>(rng.uniform_int(2, 6));
    const int agents = static_cast<int>(rng.uniform_int(2, 3));
    const TypeProfile profile = detail::verify_profile(rng, agents, dim);
    const Polytope poly = detail::verify_polytope(rng, dim, profile.agents[0], 4);

    const WeakestTypeResult lp = weakest_type_lp(poly, profile, 0);
    const double oracle = detail::epigraph_vertex_welfare(poly, profile, 0);
    const double lp_dev = std::fabs(lp.welfare - oracle);
    worst_lp = std::max(worst_lp, lp_dev);
    if (lp_dev <= 1e-6) ++lp_matches;

    CgStats stats;
    const WeakestTypeResult cg = weakest_type_cg(poly, profile, 0, {}, &stats);
    const double cg_dev = std::fabs(cg.welfare - lp.welfare);
    worst_cg = std::max(worst_cg, cg_dev);
    if (cg_dev <= 1e-6) ++cg_matches;
    if (stats.constraints_added <= dim) ++budget_ok;
    most_added = std::max(most_added, stats.constraints_added);
  }
  detail::push_check(result, detail::count_check("LP matches vertex-enumeration oracle (of 100)",
                                                 lp_matches, rounds));
  detail::push_check(result, detail::max_dev_check("max |LP - oracle| deviation", worst_lp, 1e-6));
  detail::push_check(
      result, detail::count_check("constraint generation matches LP (of 100)", cg_matches, rounds));
  detail::push_check(result, detail::max_dev_check("max |CG - LP| deviation", worst_cg, 1e-6));
  detail::push_check(result, detail::count_check("CG stays within the constraint budget (of 100)",
                                                 budget_ok, rounds));
  detail::push_check(
      result, detail::max_dev_check("most ceiling rows generated by CG",
                                    static_cast<double>(most_added), 6.0));
  return result;
}

// ---------------------------------------------------------------------------
// thm2: with conservative predictions, the weakest-type mechanism keeps the
// efficient welfare and extracts exactly the optimum minus the summed errors.
// ---------------------------------------------------------------------------

inline VerifySuiteResult verify_thm2(std::uint64_t seed, int workers = 1) {
  VerifySuiteResult result{"thm2", seed, workers, {}, true};
  RngStream rng(seed);
  const int rounds = 30;
  int welfare_exact = 0, everyone_in = 0;
  double worst_rev = 0.0;
  for (int r = 0; r < rounds; ++r) {
    const int agents = static_cast<int>(rng.uniform_int(2, 4));
    const int dim = static_cast<int>(rng.uniform_int(2, 5));
    const TypeProfile profile = detail::verify_profile(rng, agents, dim);
    std::vector<Polytope> predictions(agents);
    for (int i = 0; i < agents; ++i) {
      TypeVector lows(profile.agents[i]);
      for (double& v : lows) v *= rng.uniform(0.0, 1.0);
      predictions[i] = box_floor(lows);
    }
    const MechanismOutcome out = weakest_type_vcg(profile, predictions);
    const double opt = welfare(profile).value;
    double err_sum = 0.0;
    for (int i = 0; i < agents; ++i)
      err_sum += error_measures(predictions[i], profile, i).delta_err;
    if (out.welfare == opt) ++welfare_exact;
    if (static_cast<int>(out.participants.size()) == agents) ++everyone_in;
    worst_rev = std::max(worst_rev, std::fabs(out.revenue - (opt - err_sum)));
  }
  detail::push_check(result,
                     detail::count_check("welfare equals the optimum exactly (of 30)",
                                         welfare_exact, rounds));
  detail::push_check(result,
                     detail::count_check("no agent is excluded (of 30)", everyone_in, rounds));
  detail::push_check(result, detail::max_dev_check(
                                 "max |revenue - (OPT - sum of errors)|", worst_rev, 1e-6));
  return result;
}

// ---------------------------------------------------------------------------
// thm5: Monte Carlo agreement with the closed-form expected value and the
// exact rung-summed expected payment over a (zeta, lambda) grid.
// ---------------------------------------------------------------------------

inline VerifySuiteResult verify_thm5(std::uint64_t seed, int workers = 1,
                                     long trials = 100000) {
  VerifySuiteResult result{"thm5", seed, workers, {}, true};
  const std::vector<double> zetas = {0.0, 0.5, 1.0, 2.0, 2.5, 3.0, 4.0, 6.0};
  const std::vector<double> lambdas = {std::ldexp(1.0, -10), 0.5, 1.0, 2.0};
  const RngStream seeder(seed);
  int index = 0;
  for (double zeta : zetas) {
    for (double lambda : lambdas) {
      const RegimeParams params{15.0, zeta, lambda, 2.0, 10.0};
      const RealizedInstance inst = realize_regime(params);
      const std::uint64_t point_seed = seeder.substream(index++).key();
      const McSummary mc = monte_carlo(
          inst.profile,
          [&](RngStream& trial) {
            return mechanism_zeta_lambda(inst.profile, inst.predictions, inst.params, trial);
          },
          trials, point_seed, workers);
      const std::string tag =
          " @ zeta=" + detail::fmt_g(zeta) + " lambda=" + detail::fmt_g(lambda);
      detail::push_check(result, detail::mc_equal("expected value" + tag, mc.agent_value[0],
                                                  thm5_expected_value(params)));
      detail::push_check(result, detail::mc_equal("expected payment" + tag, mc.agent_payment[0],
                                                  exact_expected_payment(params)));
    }
  }
  const RegimeParams anchor{15.0, 0.0, 1.0, 2.0, 10.0};
  detail::push_check(result, detail::exact_equal("payment anchor @ zeta=0 lambda=1",
                                                 exact_expected_payment(anchor), 6.8));
  return result;
}

// ---------------------------------------------------------------------------
// thm6: the closed-form payment lower bound never exceeds the exact rung sum.
// ---------------------------------------------------------------------------

inline VerifySuiteResult verify_thm6(std::uint64_t seed, int workers = 1) {
  VerifySuiteResult result{"thm6", seed, workers, {}, true};
  const std::vector<double> zetas = {0.0, 0.5, 1.0, 2.0, 2.5, 3.0, 4.0, 6.0, 9.0, 12.0};
  const std::vector<double> lambdas = {std::ldexp(1.0, -10), std::ldexp(1.0, -4),
                                       0.5, 1.0, 2.0, 4.0};
  const std::vector<double> errs = {-2.0, 0.0, 2.0};
  int points = 0, bounded = 0;
  double worst_margin = std::numeric_limits<double>::infinity();
  for (double zeta : zetas) {
    for (double lambda : lambdas) {
      for (double err : errs) {
        const RegimeParams params{15.0, zeta, lambda, err, 10.0};
        const double exact = exact_expected_payment(params);
        const double bound = thm6_payment_lower_bound(params);
        ++points;
        if (exact >= bound - kCompareEps) ++bounded;
        worst_margin = std::min(worst_margin, exact - bound);
      }
    }
  }
  detail::push_check(result, detail::count_check("exact payment >= bound on the grid (of 180)",
                                                 bounded, points));
  detail::push_check(result, detail::exact_lower("smallest exact-minus-bound margin",
                                                 worst_margin, 0.0));
  const RegimeParams anchor{15.0, 0.0, 1.0, 2.0, 10.0};
  detail::push_check(result, detail::exact_equal("bound anchor @ zeta=0 lambda=1",
                                                 thm6_payment_lower_bound(anchor), 5.0));
  const RegimeParams fine{15.0, 0.0, std::ldexp(1.0, -10), 2.0, 10.0};
  detail::push_check(result,
                     detail::exact_equal("bound anchor @ zeta=0 lambda=2^-10",
                                         thm6_payment_lower_bound(fine), 13.0 - 40.0 / 15.0));

  const RngStream seeder(seed);
  int index = 0;
  for (double zeta : {0.0, 3.0}) {
    for (double lambda : {0.5, 1.0}) {
      const RegimeParams params{15.0, zeta, lambda, 2.0, 10.0};
      const RealizedInstance inst = realize_regime(params);
      const std::uint64_t point_seed = seeder.substream(index++).key();
      const McSummary mc = monte_carlo(
          inst.profile,
          [&](RngStream& trial) {
            return mechanism_zeta_lambda(inst.profile, inst.predictions, inst.params, trial);
          },
          20000, point_seed, workers);
      detail::push_check(
          result, detail::mc_meets("empirical payment meets the bound @ zeta=" +
                                       detail::fmt_g(zeta) + " lambda=" + detail::fmt_g(lambda),
                                   mc.agent_payment[0], thm6_payment_lower_bound(params)));
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// thm7: the default tuning zeta = lambda = 1.  Consistency (correct
// predictions): efficient welfare on every draw and a per-agent payment
// floor.  Robustness (arbitrary predictions): welfare and revenue stay
// competitive.  The payment-side checks use instances whose ladder span is an
// exact power of two, where every participating rung pays at least the
// vanilla VCG price; off that family the deepest rung can overshoot below it.
// ---------------------------------------------------------------------------

inline VerifySuiteResult verify_thm7(std::uint64_t seed, int workers = 1) {
  VerifySuiteResult result{"thm7", seed, workers, {}, true};
  RngStream rng(seed);
  const RngStream seeder(seed);
  int mc_index = 0;
  const auto point_seed = [&]() { return seeder.substream(mc_index++).key(); };

  // Consistency, welfare: correct box predictions make every rung
  // individually rational, so each of 300 draws hits the optimum.
  int deterministic_opt = 0;
  const int consistency_rounds = 10;
  for (int r = 0; r < consistency_rounds; ++r) {
    const int agents = static_cast<int>(rng.uniform_int(2, 3));
    const int dim = static_cast<int>(rng.uniform_int(2, 4));
    const TypeProfile profile = detail::verify_profile(rng, agents, dim);
    std::vector<Polytope> predictions(agents);
    for (int i = 0; i < agents; ++i) predictions[i] = box_floor(profile.agents[i]);
    const TuningParams params = uniform_tuning(agents, 1.0, 1.0);
    const double opt = welfare(profile).value;
    RngStream draws(rng.next());
    bool all_opt = true;
    for (int t = 0; t < 300; ++t) {
      RngStream trial = draws.substream(static_cast<std::uint64_t>(t));
      const MechanismOutcome out = mechanism_zeta_lambda(profile, predictions, params, trial);
      all_opt = all_opt && std::fabs(out.welfare - opt) <= kCompareEps &&
                static_cast<int>(out.participants.size()) == agents;
    }
    if (all_opt) ++deterministic_opt;
  }
  detail::push_check(result,
                     detail::count_check("consistency: efficient welfare on every draw (of 10)",
                                         deterministic_opt, consistency_rounds));

  // Consistency, payment: aligned spans 1 + delta_vcg = 2^j.  Dyadic
  // parameters keep the realized span exact in floating point.
  struct AlignedConsistency {
    double theta_star;
    int j;
  };
  const std::vector<AlignedConsistency> aligned_c = {{6.0, 0},  {7.5, 1},   {9.25, 2},
                                                     {12.0, 3}, {15.0, 2},  {18.5, 1},
                                                     {20.75, 0}, {16.0, 4}};
  for (const AlignedConsistency& a : aligned_c) {
    const double delta_vcg = std::ldexp(1.0, a.j) - 1.0;
    const RegimeParams params{a.theta_star, 1.0, 1.0, 0.0, delta_vcg};
    const double bound = a.theta_star / (1.0 + a.j);
    detail::push_check(
        result, detail::exact_lower("consistency payment @ theta*=" +
                                        detail::fmt_g(a.theta_star) + " K=" + std::to_string(a.j),
                                    exact_expected_payment(params), bound));
  }
  for (std::size_t pick : {std::size_t{2}, std::size_t{7}}) {
    const AlignedConsistency& a = aligned_c[pick];
    const double delta_vcg = std::ldexp(1.0, a.j) - 1.0;
    const RegimeParams params{a.theta_star, 1.0, 1.0, 0.0, delta_vcg};
    const RealizedInstance inst = realize_regime(params);
    const McSummary mc = monte_carlo(
        inst.profile,
        [&](RngStream& trial) {
          return mechanism_zeta_lambda(inst.profile, inst.predictions, inst.params, trial);
        },
        20000, point_seed(), workers);
    detail::push_check(result,
                       detail::mc_meets("consistency payment MC @ theta*=" +
                                            detail::fmt_g(a.theta_star) + " K=" + std::to_string(a.j),
                                        mc.agent_payment[0], a.theta_star / (1.0 + a.j)));
  }

  // Robustness, welfare: unrestricted aggressive floors.  The expected-value
  // factor is at least 1/(1+K) for every agent, so summed value stays
  // competitive with the optimum; checked exactly and by Monte Carlo.
  const int robust_rounds = 8;
  for (int r = 0; r < robust_rounds; ++r) {
    const int agents = static_cast<int>(rng.uniform_int(2, 3));
    const int dim = static_cast<int>(rng.uniform_int(2, 3));
    const TypeProfile profile = detail::verify_profile(rng, agents, dim);
    double top = 0.0;
    for (const TypeVector& type : profile.agents)
      for (double v : type) top = std::max(top, v);
    std::vector<Polytope> predictions(agents);
    for (int i = 0; i < agents; ++i) {
      const int alloc = static_cast<int>(rng.uniform_int(0, dim - 1));
      predictions[i].constraints.push_back(
          axis_constraint(alloc, Relation::GreaterEq, rng.uniform(1.5, 4.0) * top));
    }
    const int alpha = welfare(profile).allocation;
    double exact_welfare = 0.0, bound = 0.0;
    for (int i = 0; i < agents; ++i) {
      const ErrorMeasures m = error_measures(predictions[i], profile, i);
      const double star = profile.agents[i][alpha];
      const RegimeParams params{star, 1.0, 1.0, m.delta_err, m.delta_vcg};
      exact_welfare += thm5_expected_value(params);
      bound += star / (1.0 + ceil_log2_plus(1.0 + m.delta_vcg));
    }
    detail::push_check(result, detail::exact_lower("robust welfare exact @ instance " +
                                                       std::to_string(r),
                                                   exact_welfare, bound));
    if (r < 3) {
      const TuningParams params = uniform_tuning(agents, 1.0, 1.0);
      const McSummary mc = monte_carlo(
          profile,
          [&](RngStream& trial) {
            return mechanism_zeta_lambda(profile, predictions, params, trial);
          },
          20000, point_seed(), workers);
      detail::push_check(result, detail::mc_meets("robust welfare MC @ instance " +
                                                      std::to_string(r),
                                                  mc.welfare, bound));
    }
  }

  // Robustness, revenue: aggressive predictions on the aligned family, where
  // the deepest rung prices exactly at the vanilla VCG level.
  struct AlignedRobust {
    double theta_star;
    double delta_err;
    int j;
  };
  const std::vector<AlignedRobust> aligned_r = {
      {10.0, -0.5, 1}, {12.25, -2.0, 2}, {15.0, -1.5, 3},  {9.5, -3.0, 2},
      {14.0, -6.5, 3}, {20.0, -10.25, 4}, {8.75, -0.25, 1}, {11.0, -2.5, 2}};
  int mc_count = 0;
  for (const AlignedRobust& a : aligned_r) {
    const double delta_vcg = std::ldexp(1.0, a.j) - 1.0;
    const RegimeParams params{a.theta_star, 1.0, 1.0, a.delta_err, delta_vcg};
    const double p_vcg = a.theta_star - a.delta_err - delta_vcg;
    const double bound = p_vcg / (1.0 + a.j);
    detail::push_check(
        result, detail::exact_lower("robust revenue exact @ theta*=" +
                                        detail::fmt_g(a.theta_star) + " K=" + std::to_string(a.j),
                                    exact_expected_payment(params), bound));
    if (mc_count++ < 3) {
      const RealizedInstance inst = realize_regime(params);
      const McSummary mc = monte_carlo(
          inst.profile,
          [&](RngStream& trial) {
            return mechanism_zeta_lambda(inst.profile, inst.predictions, inst.params, trial);
          },
          20000, point_seed(), workers);
      // The rival's uninformative prediction prices it at its (zero) vanilla
      // payment on every draw, so the focal bound is the whole revenue bound.
      detail::push_check(result,
                         detail::mc_meets("robust revenue MC @ theta*=" +
                                              detail::fmt_g(a.theta_star) + " K=" +
                                              std::to_string(a.j),
                                          mc.revenue, bound));
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// thm9: the subspace halving mechanism on seeded on-subspace instances.
// ---------------------------------------------------------------------------

namespace detail {

struct SubspaceInstance {
  TypeProfile profile;
  SubspaceSpec spec;
};

// Two agents with k disjoint-support rays each; per-ray coefficients keep
// every supported component inside [1, H].
inline SubspaceInstance subspace_instance(RngStream& rng, int k, double H) {
  const int dim = 2 * k;
  SubspaceInstance inst;
  inst.spec.H = H;
  inst.spec.basis.resize(2);
  std::vector<std::string> labels;
  for (int a = 0; a < dim; ++a) labels.push_back("g" + std::to_string(a));
  std::vector<TypeVector> values;
  for (int i = 0; i < 2; ++i) {
    TypeVector theta(dim, 0.0);
    for (int j = 0; j < k; ++j) {
      TypeVector u(dim, 0.0);
      u[2 * j] = rng.uniform(0.5, 1.0);
      u[2 * j + 1] = rng.uniform(0.5, 1.0);
      double norm = 0.0;
      for (double x : u) norm += x * x;
      norm = std::sqrt(norm);
      for (double& x : u) x /= norm;
      double lo_entry = H, hi_entry = 0.0;
      for (double x : u)
        if (x > 0.0) {
          lo_entry = std::min(lo_entry, x);
          hi_entry = std::max(hi_entry, x);
        }
      const double coef = rng.uniform(1.0 / lo_entry, H / hi_entry);
      for (int c = 0; c < dim; ++c) theta[c] += coef * u[c];
      inst.spec.basis[i].push_back(std::move(u));
    }
    values.push_back(std::move(theta));
  }
  inst.profile = make_profile(labels, values);
  return inst;
}

}  // namespace detail

inline VerifySuiteResult verify_thm9(std::uint64_t seed, int workers = 1) {
  VerifySuiteResult result{"thm9", seed, workers, {}, true};
  RngStream rng(seed);
  const RngStream seeder(seed);
  int mc_index = 0;
  for (int k : {1, 2}) {
    for (double H : {4.0, 16.0}) {
      const double levels = std::log2(H);
      for (int r = 0; r < 5; ++r) {
        const detail::SubspaceInstance inst = detail::subspace_instance(rng, k, H);
        const double opt = welfare(inst.profile).value;
        const double welfare_bound = opt / levels;
        const double revenue_bound = opt / (2.0 * k * std::pow(levels, k));
        const std::string tag = " @ k=" + std::to_string(k) + " H=" + detail::fmt_g(H) +
                                " instance " + std::to_string(r);
        const SubspaceExpectation exact = subspace_expectation(inst.profile, inst.spec);
        detail::push_check(result, detail::exact_lower("exact welfare" + tag, exact.welfare,
                                                       welfare_bound));
        detail::push_check(result, detail::exact_lower("exact revenue" + tag, exact.revenue,
                                                       revenue_bound));
        const McSummary mc = monte_carlo(
            inst.profile,
            [&](RngStream& trial) { return subspace_mechanism(inst.profile, inst.spec, trial); },
            20000, seeder.substream(mc_index++).key(), workers);
        detail::push_check(result,
                           detail::mc_meets("empirical welfare" + tag, mc.welfare, welfare_bound));
        detail::push_check(result,
                           detail::mc_meets("empirical revenue" + tag, mc.revenue, revenue_bound));
      }
    }
  }

  // Single-agent, single-allocation anchor: H = 4 halves the value once or
  // twice, so the expected payment is exactly (2 + 1) / 2.
  TypeProfile anchor = make_profile({"a"}, {{4.0}});
  SubspaceSpec spec;
  spec.basis = {{{1.0}}};
  spec.H = 4.0;
  const SubspaceExpectation exact = subspace_expectation(anchor, spec);
  detail::push_check(result,
                     detail::exact_equal("anchor expected payment", exact.agent_payment[0], 1.5));
  const McSummary mc = monte_carlo(
      anchor, [&](RngStream& trial) { return subspace_mechanism(anchor, spec, trial); }, 20000,
      seeder.substream(mc_index++).key(), workers);
  detail::push_check(result, detail::mc_equal("anchor empirical payment", mc.agent_payment[0], 1.5));
  return result;
}

// ---------------------------------------------------------------------------
// myerson: the prior-based pivot on a uniform[0,1] iid two-bidder sale.
// ---------------------------------------------------------------------------

inline VerifySuiteResult verify_myerson(std::uint64_t seed, int workers = 1) {
  VerifySuiteResult result{"myerson", seed, workers, {}, true};
  const PriorModel prior = single_item_iid_prior(
      [](double v) { return std::clamp(v, 0.0, 1.0); }, [](double) { return 1.0; }, 0.0, 1.0);

  const double reserve = myerson_reserve(prior.single_item);
  detail::push_check(result, detail::tol_equal("monopoly reserve", reserve, 0.5, 1e-6));

  const double oracle = spa_revenue_two_bidders(prior.single_item, reserve);
  detail::push_check(result,
                     detail::tol_equal("numeric-integration optimum", oracle, 5.0 / 12.0, 1e-9));

  const TypeProfile shape = make_profile({"none", "b0", "b1"},
                                         {{0.0, 0.0, 0.0}, {0.0, 0.0, 0.0}});
  const std::vector<PriorModel> priors = {prior, prior};
  const auto trial_sale = [&](RngStream& trial) {
    const double v0 = trial.uniform();
    const double v1 = trial.uniform();
    const TypeProfile profile =
        make_profile({"none", "b0", "b1"}, {{0.0, v0, 0.0}, {0.0, 0.0, v1}});
    return prior_groves(profile, priors);
  };
  const McSummary mc = monte_carlo(shape, trial_sale, 200000, seed, workers);
  detail::push_check(result, detail::tol_equal("expected revenue within 1% of the optimum",
                                               mc.revenue.mean, oracle, 0.01 * oracle));

  // Spot rules: no sale below the reserve, and the winner pays the larger of
  // the reserve and the losing bid.
  RngStream spot(seed);
  RngStream draws = spot.substream(1);
  int consistent = 0;
  const int spot_rounds = 2000;
  for (int t = 0; t < spot_rounds; ++t) {
    RngStream trial = draws.substream(static_cast<std::uint64_t>(t));
    const double v0 = trial.uniform();
    const double v1 = trial.uniform();
    const TypeProfile profile =
        make_profile({"none", "b0", "b1"}, {{0.0, v0, 0.0}, {0.0, 0.0, v1}});
    const MechanismOutcome out = prior_groves(profile, priors);
    const double hi = std::max(v0, v1), lo = std::min(v0, v1);
    bool ok;
    if (hi < 0.5) {
      ok = out.revenue == 0.0;
    } else {
      ok = std::fabs(out.revenue - std::max(lo, 0.5)) <= 1e-9;
    }
    if (ok) ++consistent;
  }
  detail::push_check(result, detail::count_check(
                                 "draws follow the reserve-price second-price rules (of 2000)",
                                 consistent, spot_rounds));
  return result;
}

// ---------------------------------------------------------------------------
// Dispatch and rendering
// ---------------------------------------------------------------------------

inline std::vector<std::string> verify_suite_names() {
  return {"thm2", "thm5", "thm6", "thm7", "thm9", "myerson", "lp_oracle"};
}

inline VerifySuiteResult verify_suite(const std::string& name, std::uint64_t seed,
                                      int workers = 1, long trials = 0) {
  if (name == "lp_oracle") return verify_lp_oracle(seed, workers);
  if (name == "thm2") return verify_thm2(seed, workers);
  if (name == "thm5") return verify_thm5(seed, workers, trials > 0 ? trials : 100000);
  if (name == "thm6") return verify_thm6(seed, workers);
  if (name == "thm7") return verify_thm7(seed, workers);
  if (name == "thm9") return verify_thm9(seed, workers);
  if (name == "myerson") return verify_myerson(seed, workers);
  throw ConfigError("unknown verify suite: " + name);
}

inline std::string verify_text(const VerifySuiteResult& result) {
  std::ostringstream out;
  for (const BoundCheck& check : result.checks) {
    out << (check.verdict == "satisfied" ? "[ PASS ] " : "[ FAIL ] ") << check.label
        << " (observed=" << detail::fmt_g(check.observed)
        << ", bound=" << detail::fmt_g(check.bound);
    if (check.se > 0.0) out << ", se=" << detail::fmt_g(check.se);
    if (check.verdict != "satisfied") out << ", verdict=" << check.verdict;
    out << ")\n";
  }
  out << "suite " << result.suite << ": " << (result.passed ? "PASS" : "FAIL") << " ("
      << result.checks.size() << " checks, seed=" << result.seed << ")\n";
  return out.str();
}

}  // namespace mechlab

#endif  // MECHLAB_VERIFY_HPP
