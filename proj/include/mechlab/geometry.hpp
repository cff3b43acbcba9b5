#ifndef MECHLAB_GEOMETRY_HPP
#define MECHLAB_GEOMETRY_HPP

#include <cmath>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "mechlab/common.hpp"
#include "mechlab/env.hpp"
#include "mechlab/rng.hpp"
#include "mechlab/simplex.hpp"

namespace mechlab {

// ---------------------------------------------------------------------------
// Prediction polytopes
// ---------------------------------------------------------------------------

// Sparse halfspace/hyperplane over type space: sum_a coeffs[a] * theta[a] (rel) bound.
struct LinearConstraint {
  std::map<int, double> coeffs;
  Relation rel = Relation::GreaterEq;
  double bound = 0.0;

  double norm() const {
    double scale = std::fabs(bound);
    for (const auto& [alloc, coef] : coeffs) scale = std::max(scale, std::fabs(coef));
    return scale;
  }
};

// Candidate type set T_i: intersection of the constraints with the
// non-negative orthant (non-negativity is implicit everywhere).
struct Polytope {
  std::vector<LinearConstraint> constraints;

  bool contains(const TypeVector& point, double tol_base = kFeasEps) const {
    for (double v : point)
      if (v < -tol_base) return false;
    for (const LinearConstraint& c : constraints) {
      double lhs = 0.0;
      for (const auto& [alloc, coef] : c.coeffs) {
        if (alloc < 0 || alloc >= static_cast<int>(point.size()))
          throw std::invalid_argument("polytope: constraint references unknown allocation");
        lhs += coef * point[alloc];
      }
      const double tol = tol_base * std::max(1.0, c.norm());
      if (c.rel == Relation::LessEq && lhs > c.bound + tol) return false;
      if (c.rel == Relation::GreaterEq && lhs < c.bound - tol) return false;
      if (c.rel == Relation::Equal && std::fabs(lhs - c.bound) > tol) return false;
    }
    return true;
  }
};

// Convenience for the common single-coefficient case.
inline LinearConstraint axis_constraint(int alloc, Relation rel, double bound) {
  LinearConstraint c;
  c.coeffs[alloc] = 1.0;
  c.rel = rel;
  c.bound = bound;
  return c;
}

// Box with coordinatewise lower bounds.  Welfare is monotone in each
// coordinate, so the corner `lows` itself is the weakest type of this set.
inline Polytope box_floor(const TypeVector& lows) {
  Polytope poly;
  for (int a = 0; a < static_cast<int>(lows.size()); ++a)
    if (lows[a] > 0.0)
      poly.constraints.push_back(axis_constraint(a, Relation::GreaterEq, lows[a]));
  return poly;
}

// ---------------------------------------------------------------------------
// Weakest-type linear program
// ---------------------------------------------------------------------------

struct WeakestTypeResult {
  TypeVector weakest;   // argmin replacement type (zero outside the variable set)
  double welfare = 0.0; // min over T_i of the efficient welfare w(theta~, theta_{-i})
  int certificate = -1; // lowest-index allocation attaining the inner max
};

struct ErrorMeasures {
  double delta_err = 0.0;  // w(theta) - min-welfare; negative for aggressive predictions
  double delta_vcg = 0.0;  // min-welfare - w(0, theta_{-i}); always >= 0
};

namespace detail {

struct CeilingLpResult {
  TypeVector theta;   // full-dimensional, zeros on pinned coordinates
  double gamma = 0.0;
};

// Core LP shared by the weakest-type variants:
//   min gamma
//   s.t. own_weight * theta[a] + offsets[a] <= gamma   for a in level_allocs
//        theta in polytope (coordinates outside var_allocs pinned to 0)
//        theta >= 0, gamma >= 0.
// Pinning is only sound when every allocation carrying a polytope coefficient
// is a variable; callers guarantee that and we verify it.
inline CeilingLpResult minimize_ceiling(const Polytope& poly, int dim,
                                        const std::vector<double>& offsets, double own_weight,
                                        const std::vector<int>& var_allocs,
                                        const std::vector<int>& level_allocs) {
  std::vector<int> var_of(dim, -1);
  for (int v = 0; v < static_cast<int>(var_allocs.size()); ++v) var_of[var_allocs[v]] = v;
  const int gcol = static_cast<int>(var_allocs.size());
  const int nv = gcol + 1;

  std::vector<LpConstraint> rows;
  rows.reserve(level_allocs.size() + poly.constraints.size());
  for (int a : level_allocs) {
    LpConstraint row;
    row.a.assign(nv, 0.0);
    if (var_of[a] >= 0) row.a[var_of[a]] = own_weight;
    row.a[gcol] = -1.0;
    row.rel = Relation::LessEq;
    row.b = -offsets[a];
    rows.push_back(std::move(row));
  }
  for (const LinearConstraint& c : poly.constraints) {
    LpConstraint row;
    row.a.assign(nv, 0.0);
    for (const auto& [alloc, coef] : c.coeffs) {
      if (alloc < 0 || alloc >= dim)
        throw std::invalid_argument("polytope: constraint references unknown allocation");
      if (coef == 0.0) continue;
      if (var_of[alloc] < 0)
        throw std::logic_error("minimize_ceiling: constrained allocation outside variable set");
      row.a[var_of[alloc]] = coef;
    }
    row.rel = c.rel;
    row.b = c.bound;
    rows.push_back(std::move(row));
  }

  std::vector<double> cost(nv, 0.0);
  cost[gcol] = 1.0;
  LpResult lp = solve_lp_min(cost, rows);
  if (lp.status == LpResult::Status::Infeasible)
    throw InfeasiblePredictionError("prediction polytope admits no candidate type");
  if (lp.status != LpResult::Status::Optimal)
    throw std::runtime_error("weakest-type LP unbounded");  // gamma >= 0 forbids this

  CeilingLpResult out;
  out.theta.assign(dim, 0.0);
  for (int v = 0; v < static_cast<int>(var_allocs.size()); ++v)
    out.theta[var_allocs[v]] = std::max(0.0, lp.x[v]);
  out.gamma = lp.x[gcol];
  return out;
}

inline std::vector<int> all_allocations(int dim) {
  std::vector<int> all(dim);
  for (int a = 0; a < dim; ++a) all[a] = a;
  return all;
}

inline std::vector<double> other_surpluses(const TypeProfile& profile, int agent) {
  std::vector<double> s(profile.num_allocations());
  for (int a = 0; a < profile.num_allocations(); ++a) s[a] = surplus_others(profile, agent, a);
  return s;
}

}  // namespace detail

namespace detail {

// Among all types achieving the optimal ceiling, pick the one with minimal
// total mass.  This pins a canonical weakest type -- zero on every coordinate
// the prediction does not force upward -- instead of whichever optimal vertex
// the first solve happens to return.
inline TypeVector cheapest_at_ceiling(const Polytope& poly, int dim,
                                      const std::vector<double>& offsets, double ceiling,
                                      const TypeVector& fallback) {
  const double cap = ceiling + 1e-9 * std::max(1.0, std::fabs(ceiling));
  std::vector<LpConstraint> rows;
  rows.reserve(dim + poly.constraints.size());
  for (int a = 0; a < dim; ++a) {
    LpConstraint row;
    row.a.assign(dim, 0.0);
    row.a[a] = 1.0;
    row.rel = Relation::LessEq;
    row.b = cap - offsets[a];
    rows.push_back(std::move(row));
  }
  for (const LinearConstraint& c : poly.constraints) {
    LpConstraint row;
    row.a.assign(dim, 0.0);
    for (const auto& [alloc, coef] : c.coeffs) row.a[alloc] = coef;
    row.rel = c.rel;
    row.b = c.bound;
    rows.push_back(std::move(row));
  }
  const LpResult lp = solve_lp_min(std::vector<double>(dim, 1.0), rows);
  if (lp.status != LpResult::Status::Optimal) return fallback;
  TypeVector theta(dim);
  for (int a = 0; a < dim; ++a) theta[a] = std::max(0.0, lp.x[a]);
  return theta;
}

}  // namespace detail

// Exact weakest type of `prediction` against theta_{-agent}: minimizes the
// efficient welfare over the polytope by solving the epigraph LP over all
// allocation coordinates at once.
inline WeakestTypeResult weakest_type_lp(const Polytope& prediction, const TypeProfile& profile,
                                         int agent) {
  const int dim = profile.num_allocations();
  const std::vector<double> offsets = detail::other_surpluses(profile, agent);
  const std::vector<int> all = detail::all_allocations(dim);
  detail::CeilingLpResult lp = detail::minimize_ceiling(prediction, dim, offsets, 1.0, all, all);
  const TypeVector weakest =
      detail::cheapest_at_ceiling(prediction, dim, offsets, lp.gamma, lp.theta);
  const WelfareResult achieved = welfare_with_replacement(profile, agent, weakest);
  return {weakest, achieved.value, achieved.allocation};
}

struct CgStats {
  int oracle_calls = 0;
  int constraints_added = 0;
};

// Exact welfare of a replacement type against the fixed theta_{-agent},
// together with a maximizing allocation.
using WelfareOracle = std::function<WelfareResult(const TypeVector&)>;

// Weakest type by delayed constraint generation.  The restricted LP carries
// variables only for allocations named by the prediction's constraints and
// ceiling rows only for allocations the welfare oracle has returned; each
// round either proves the candidate optimal or adds the violated allocation.
// Unconstrained coordinates stay at zero -- raising them can only raise the
// ceiling -- so at most |allocations| rows are ever generated.
inline WeakestTypeResult weakest_type_cg(const Polytope& prediction, const TypeProfile& profile,
                                         int agent, const WelfareOracle& oracle = {},
                                         CgStats* stats = nullptr) {
  const int dim = profile.num_allocations();
  const std::vector<double> offsets = detail::other_surpluses(profile, agent);
  WelfareOracle probe = oracle;
  if (!probe)
    probe = [&profile, agent](const TypeVector& theta) {
      return welfare_with_replacement(profile, agent, theta);
    };

  std::vector<int> vars;
  std::vector<bool> is_var(dim, false), in_levels(dim, false);
  for (const LinearConstraint& c : prediction.constraints)
    for (const auto& [alloc, coef] : c.coeffs) {
      if (alloc < 0 || alloc >= dim)
        throw std::invalid_argument("polytope: constraint references unknown allocation");
      if (coef != 0.0 && !is_var[alloc]) {
        is_var[alloc] = true;
        vars.push_back(alloc);
      }
    }

  CgStats local;
  std::vector<int> levels;
  for (int round = 0; round <= dim; ++round) {
    detail::CeilingLpResult lp =
        detail::minimize_ceiling(prediction, dim, offsets, 1.0, vars, levels);
    ++local.oracle_calls;
    const WelfareResult truth = probe(lp.theta);
    if (truth.value <= lp.gamma + 1e-7 * std::max(1.0, std::fabs(truth.value))) {
      if (stats != nullptr) *stats = local;
      return {lp.theta, truth.value, truth.allocation};
    }
    if (in_levels[truth.allocation])
      throw std::runtime_error("constraint generation: oracle re-reported a generated row");
    in_levels[truth.allocation] = true;
    levels.push_back(truth.allocation);
    ++local.constraints_added;
  }
  throw std::runtime_error("constraint generation failed to converge");
}

// Prediction-error split of agent `agent`'s pivot:
//   delta_err = w(theta) - min-welfare   (overcharge risk; negative if aggressive)
//   delta_vcg = min-welfare - w(0, theta_{-i})   (revenue recovered vs. vanilla VCG)
inline ErrorMeasures error_measures(const Polytope& prediction, const TypeProfile& profile,
                                    int agent) {
  const double min_welfare = weakest_type_lp(prediction, profile, agent).welfare;
  return {welfare(profile).value - min_welfare,
          min_welfare - welfare_excluding(profile, agent).value};
}

// True when the polytope (with implicit non-negativity) has any point at all.
inline bool polytope_feasible(const Polytope& poly, int dim) {
  try {
    const std::vector<double> zeros(dim, 0.0);
    detail::minimize_ceiling(poly, dim, zeros, 1.0, detail::all_allocations(dim), {});
    return true;
  } catch (const InfeasiblePredictionError&) {
    return false;
  }
}

// ---------------------------------------------------------------------------
// Welfare level sets
// ---------------------------------------------------------------------------

// theta[allocation] >= threshold
struct AxisHalfspace {
  int allocation = -1;
  double threshold = 0.0;
};

// The level set { theta~ : w(theta~, theta_{-i}) >= min_welfare } is the union
// of one axis-parallel halfspace per allocation.
inline std::vector<AxisHalfspace> level_set_halfspaces(double min_welfare,
                                                       const TypeProfile& profile, int agent) {
  std::vector<AxisHalfspace> halves;
  halves.reserve(profile.num_allocations());
  for (int a = 0; a < profile.num_allocations(); ++a)
    halves.push_back({a, min_welfare - surplus_others(profile, agent, a)});
  return halves;
}

inline bool in_level_set(const std::vector<AxisHalfspace>& halves, const TypeVector& theta) {
  for (const AxisHalfspace& h : halves)
    if (theta[h.allocation] >= h.threshold - kCompareEps) return true;
  return false;
}

// ---------------------------------------------------------------------------
// Predictors
// ---------------------------------------------------------------------------

// Bounds of predictor constraints may reference aggregates of the *other*
// agents' reports; referencing the predicted agent's own report is rejected,
// since that would let her move her own candidate set.
struct BoundTerm {
  enum class Stat { AgentValue, OthersMax, OthersSum };
  Stat stat = Stat::AgentValue;
  double scale = 1.0;
  int agent = -1;       // AgentValue only
  int allocation = -1;
};

struct PredictorBound {
  double constant = 0.0;
  std::vector<BoundTerm> terms;
};

struct PredictorConstraint {
  std::map<int, double> coeffs;
  Relation rel = Relation::GreaterEq;
  PredictorBound bound;
};

struct Predictor {
  std::vector<PredictorConstraint> constraints;

  Polytope build(const TypeProfile& profile, int agent) const {
    Polytope poly;
    for (const PredictorConstraint& pc : constraints) {
      LinearConstraint c;
      c.coeffs = pc.coeffs;
      c.rel = pc.rel;
      double bound = pc.bound.constant;
      for (const BoundTerm& term : pc.bound.terms) {
        if (term.allocation < 0 || term.allocation >= profile.num_allocations())
          throw std::invalid_argument("predictor: bound references unknown allocation");
        double stat = 0.0;
        switch (term.stat) {
          case BoundTerm::Stat::AgentValue:
            if (term.agent == agent)
              throw std::invalid_argument("predictor: bound may not reference the predicted agent");
            if (term.agent < 0 || term.agent >= profile.num_agents())
              throw std::invalid_argument("predictor: bound references unknown agent");
            stat = profile.agents[term.agent][term.allocation];
            break;
          case BoundTerm::Stat::OthersMax:
            for (int j = 0; j < profile.num_agents(); ++j)
              if (j != agent) stat = std::max(stat, profile.agents[j][term.allocation]);
            break;
          case BoundTerm::Stat::OthersSum:
            stat = surplus_others(profile, agent, term.allocation);
            break;
        }
        bound += term.scale * stat;
      }
      c.bound = bound;
      poly.constraints.push_back(std::move(c));
    }
    return poly;
  }
};

// Constant predictor that always produces the given polytope.
inline Predictor constant_predictor(const Polytope& poly) {
  Predictor p;
  for (const LinearConstraint& c : poly.constraints) {
    PredictorConstraint pc;
    pc.coeffs = c.coeffs;
    pc.rel = c.rel;
    pc.bound.constant = c.bound;
    p.constraints.push_back(std::move(pc));
  }
  return p;
}

inline std::vector<Polytope> build_predictions(const std::vector<Predictor>& predictors,
                                               const TypeProfile& profile) {
  if (static_cast<int>(predictors.size()) != profile.num_agents())
    throw std::invalid_argument("predictors: need exactly one per agent");
  std::vector<Polytope> out;
  out.reserve(predictors.size());
  for (int i = 0; i < profile.num_agents(); ++i) out.push_back(predictors[i].build(profile, i));
  return out;
}

// ---------------------------------------------------------------------------
// Generalized (partition) predictors
// ---------------------------------------------------------------------------

// One cell of a partition prediction: a region, the probability the predictor
// assigns to it, and optionally a sampler for a density supported on the cell.
// Without a sampler the cell is represented by its weakest type.
struct PartitionCell {
  Polytope region;
  double probability = 0.0;
  std::function<TypeVector(RngStream&)> sample;
};

struct PartitionPredictor {
  std::vector<PartitionCell> cells;

  void validate() const {
    if (cells.empty()) throw std::invalid_argument("partition predictor: no cells");
    double total = 0.0;
    for (const PartitionCell& cell : cells) {
      if (cell.probability < 0.0) throw std::invalid_argument("partition predictor: negative probability");
      total += cell.probability;
    }
    if (std::fabs(total - 1.0) > 1e-9)
      throw std::invalid_argument("partition predictor: probabilities must sum to 1");
  }
};

// Draw a candidate weakest type from a partition prediction: pick a cell by
// its probability, then either its LP weakest type or a density draw.
inline WeakestTypeResult sample_weakest(const PartitionPredictor& predictor,
                                        const TypeProfile& profile, int agent, RngStream& rng) {
  predictor.validate();
  const double u = rng.uniform();
  double cumulative = 0.0;
  const PartitionCell* chosen = &predictor.cells.back();
  for (const PartitionCell& cell : predictor.cells) {
    cumulative += cell.probability;
    if (u < cumulative) {
      chosen = &cell;
      break;
    }
  }
  if (chosen->sample) {
    TypeVector theta = chosen->sample(rng);
    if (static_cast<int>(theta.size()) != profile.num_allocations())
      throw std::invalid_argument("partition predictor: sampler dimension mismatch");
    const WelfareResult w = welfare_with_replacement(profile, agent, theta);
    return {std::move(theta), w.value, w.allocation};
  }
  return weakest_type_lp(chosen->region, profile, agent);
}

}  // namespace mechlab

#endif  // MECHLAB_GEOMETRY_HPP
