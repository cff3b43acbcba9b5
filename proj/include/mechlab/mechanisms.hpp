#ifndef MECHLAB_MECHANISMS_HPP
#define MECHLAB_MECHANISMS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "mechlab/common.hpp"
#include "mechlab/env.hpp"
#include "mechlab/geometry.hpp"
#include "mechlab/rng.hpp"

namespace mechlab {

// ---------------------------------------------------------------------------
// Parameter bundles
// ---------------------------------------------------------------------------

// Per-agent tuning of the randomized level mechanism: zeta shifts the target
// level, lambda sets the discretization step of the doubling ladder.
struct TuningParams {
  std::vector<double> zeta;
  std::vector<double> lambda;
  std::uint64_t seed = 0;
};

inline TuningParams uniform_tuning(int agents, double zeta, double lambda,
                                   std::uint64_t seed = 0) {
  return {std::vector<double>(agents, zeta), std::vector<double>(agents, lambda), seed};
}

// Affine-maximizer parameters: positive per-agent weights and non-negative
// per-allocation boosts.
struct AMParams {
  std::vector<double> omega;
  std::vector<double> tau;
};

inline AMParams identity_am(int agents, int allocations) {
  return {std::vector<double>(agents, 1.0), std::vector<double>(allocations, 0.0)};
}

// Known per-agent type subspaces: an orthonormal non-negative basis per agent
// plus the value bound H (a power of two, so the halving ladder is exact).
struct SubspaceSpec {
  std::vector<std::vector<TypeVector>> basis;  // [agent][basis vector][allocation]
  double H = 2.0;
};

// Side information as a prior over an agent's type: either an explicit finite
// support or an iid single-item value distribution given by cdf/pdf.
struct DiscretePrior {
  std::vector<TypeVector> support;
  std::vector<double> probability;
};

struct SingleItemIidPrior {
  std::function<double(double)> cdf;
  std::function<double(double)> pdf;
  double lo = 0.0;
  double hi = 1.0;
};

struct PriorModel {
  enum class Kind { Discrete, SingleItemIid };
  Kind kind = Kind::Discrete;
  DiscretePrior discrete;
  SingleItemIidPrior single_item;
};

inline PriorModel discrete_prior(std::vector<TypeVector> support, std::vector<double> probability) {
  PriorModel prior;
  prior.kind = PriorModel::Kind::Discrete;
  prior.discrete = {std::move(support), std::move(probability)};
  return prior;
}

inline PriorModel single_item_iid_prior(std::function<double(double)> cdf,
                                        std::function<double(double)> pdf, double lo, double hi) {
  PriorModel prior;
  prior.kind = PriorModel::Kind::SingleItemIid;
  prior.single_item = {std::move(cdf), std::move(pdf), lo, hi};
  return prior;
}

// ---------------------------------------------------------------------------
// Shared internals
// ---------------------------------------------------------------------------

namespace detail {

inline void require_per_agent(std::size_t got, int agents, const char* what) {
  if (static_cast<int>(got) != agents)
    throw std::invalid_argument(std::string(what) + ": need exactly one entry per agent");
}

// One stateful draw salts the per-call stream, so repeated invocations on the
// same stream differ while per-agent substreams stay order-independent.
inline RngStream call_stream(RngStream& rng) { return rng.substream(rng.next()); }

// tau(alpha) + sum_{j != agent} omega_j * theta_j[alpha], for every alpha.
inline std::vector<double> am_offsets(const TypeProfile& profile, int agent, const AMParams& am) {
  std::vector<double> offsets(am.tau);
  for (int j = 0; j < profile.num_agents(); ++j) {
    if (j == agent) continue;
    for (int a = 0; a < profile.num_allocations(); ++a)
      offsets[a] += am.omega[j] * profile.agents[j][a];
  }
  return offsets;
}

// Lowest-index maximizer of the boosted weighted welfare.
inline WelfareResult affine_best(const TypeProfile& profile, const AMParams& am) {
  const int dim = profile.num_allocations();
  std::vector<double> score(am.tau);
  for (int i = 0; i < profile.num_agents(); ++i)
    for (int a = 0; a < dim; ++a) score[a] += am.omega[i] * profile.agents[i][a];
  double best = score[0];
  for (int a = 1; a < dim; ++a) best = std::max(best, score[a]);
  for (int a = 0; a < dim; ++a)
    if (score[a] >= best - kCompareEps) return {score[a], a};
  return {best, 0};  // unreachable
}

inline void validate_am(const TypeProfile& profile, const AMParams& am) {
  require_per_agent(am.omega.size(), profile.num_agents(), "affine weights");
  if (static_cast<int>(am.tau.size()) != profile.num_allocations())
    throw std::invalid_argument("allocation boosts: need exactly one entry per allocation");
  for (double w : am.omega)
    if (!(w > 0.0)) throw std::invalid_argument("affine weights must be strictly positive");
  for (double t : am.tau)
    if (t < 0.0) throw std::invalid_argument("allocation boosts must be non-negative");
}

// Weighted weakest-type value: min over the polytope of
// max_alpha (weight * theta[alpha] + offsets[alpha]).
inline double weighted_weakest_gamma(const Polytope& prediction, int dim,
                                     const std::vector<double>& offsets, double weight) {
  const std::vector<int> all = all_allocations(dim);
  return minimize_ceiling(prediction, dim, offsets, weight, all, all).gamma;
}

struct LevelDraw {
  int k = 0;
  int cap = 0;       // K: largest admissible exponent
  double level = 0.0;
};

// The randomized level: start from min_welfare + zeta and back off by a
// uniformly drawn power-of-two multiple of lambda.  `span` is the distance
// from the baseline w(0, theta_{-i}) that the ladder must be able to cover.
inline LevelDraw draw_level(double min_welfare, double baseline, double zeta, double lambda,
                            RngStream& agent_rng) {
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be strictly positive");
  const double span = (min_welfare - baseline) + zeta;
  if (!(span > 0.0))
    throw std::invalid_argument(
        "zeta must exceed the negated VCG gap: the level ladder is undefined");
  LevelDraw draw;
  draw.cap = ceil_log2_plus(span / lambda);
  draw.k = static_cast<int>(agent_rng.uniform_int(0, draw.cap));
  draw.level = min_welfare + zeta - std::ldexp(lambda, draw.k);
  return draw;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// VCG and weakest-type VCG / affine maximizers
// ---------------------------------------------------------------------------

// Vanilla VCG: efficient allocation, externality payments, no exclusions
// (payments never exceed the winner's value).
inline MechanismOutcome vcg(const TypeProfile& profile) {
  validate_profile(profile);
  const WelfareResult eff = welfare(profile);
  std::vector<double> payments(profile.num_agents());
  for (int i = 0; i < profile.num_agents(); ++i)
    payments[i] =
        welfare_excluding(profile, i).value - surplus_others(profile, i, eff.allocation);
  return finalize_outcome(profile, eff.allocation, payments,
                          std::vector<bool>(profile.num_agents(), true));
}

// Weakest-type affine maximizer: allocation maximizes the boosted weighted
// welfare; each agent pays her weighted weakest-type ceiling minus the others'
// boosted surplus at the chosen allocation, rescaled by her own weight.
inline MechanismOutcome weakest_type_am(const TypeProfile& profile,
                                        const std::vector<Polytope>& predictions,
                                        const AMParams& am) {
  validate_profile(profile);
  detail::validate_am(profile, am);
  detail::require_per_agent(predictions.size(), profile.num_agents(), "predictions");
  const int dim = profile.num_allocations();
  const WelfareResult best = detail::affine_best(profile, am);

  std::vector<double> payments(profile.num_agents());
  std::vector<bool> included(profile.num_agents());
  for (int i = 0; i < profile.num_agents(); ++i) {
    const std::vector<double> offsets = detail::am_offsets(profile, i, am);
    const double gamma = detail::weighted_weakest_gamma(predictions[i], dim, offsets, am.omega[i]);
    payments[i] = (gamma - offsets[best.allocation]) / am.omega[i];
    included[i] = profile.agents[i][best.allocation] - payments[i] >= -kCompareEps;
  }
  return finalize_outcome(profile, best.allocation, payments, included);
}

// Weakest-type VCG is the identity-parameter affine maximizer: p_i is the
// weakest-type welfare minus the others' surplus at the efficient allocation.
// Agents whose price exceeds their value are excluded (zero payment).
inline MechanismOutcome weakest_type_vcg(const TypeProfile& profile,
                                         const std::vector<Polytope>& predictions) {
  return weakest_type_am(profile, predictions,
                         identity_am(profile.num_agents(), profile.num_allocations()));
}

// ---------------------------------------------------------------------------
// Tuned level mechanisms
// ---------------------------------------------------------------------------

// Deterministic level mechanism: price at min-welfare + zeta_i.  zeta = 0
// reduces to weakest-type VCG; zeta_i equal to agent i's prediction error
// extracts her full value.
inline MechanismOutcome mechanism_zeta_zero(const TypeProfile& profile,
                                            const std::vector<Polytope>& predictions,
                                            const std::vector<double>& zeta) {
  validate_profile(profile);
  detail::require_per_agent(predictions.size(), profile.num_agents(), "predictions");
  detail::require_per_agent(zeta.size(), profile.num_agents(), "zeta");
  const int dim = profile.num_allocations();
  const WelfareResult eff = welfare(profile);

  std::vector<double> payments(profile.num_agents());
  std::vector<bool> included(profile.num_agents());
  for (int i = 0; i < profile.num_agents(); ++i) {
    const std::vector<double> offsets = detail::other_surpluses(profile, i);
    const double gamma = detail::weighted_weakest_gamma(predictions[i], dim, offsets, 1.0);
    payments[i] = (gamma + zeta[i]) - offsets[eff.allocation];
    included[i] = profile.agents[i][eff.allocation] - payments[i] >= -kCompareEps;
  }
  return finalize_outcome(profile, eff.allocation, payments, included);
}

// Randomized level mechanism: for each agent draw k_i uniformly from
// {0..K_i}, K_i = ceil(log2((Delta_vcg + zeta_i)/lambda_i)) clamped at 0, and
// price at min-welfare + zeta_i - 2^{k_i} lambda_i.  Requires
// Delta_vcg + zeta_i > 0, else the ladder has nothing to cover.
inline MechanismOutcome mechanism_zeta_lambda(const TypeProfile& profile,
                                              const std::vector<Polytope>& predictions,
                                              const TuningParams& params, RngStream& rng) {
  validate_profile(profile);
  detail::require_per_agent(predictions.size(), profile.num_agents(), "predictions");
  detail::require_per_agent(params.zeta.size(), profile.num_agents(), "zeta");
  detail::require_per_agent(params.lambda.size(), profile.num_agents(), "lambda");
  const int dim = profile.num_allocations();
  const WelfareResult eff = welfare(profile);
  RngStream call = detail::call_stream(rng);

  std::vector<double> payments(profile.num_agents());
  std::vector<bool> included(profile.num_agents());
  MechanismDraws draws;
  draws.k.assign(profile.num_agents(), 0);
  for (int i = 0; i < profile.num_agents(); ++i) {
    const std::vector<double> offsets = detail::other_surpluses(profile, i);
    const double gamma = detail::weighted_weakest_gamma(predictions[i], dim, offsets, 1.0);
    const double baseline = welfare_excluding(profile, i).value;
    RngStream agent_rng = call.substream(static_cast<std::uint64_t>(i));
    const detail::LevelDraw draw =
        detail::draw_level(gamma, baseline, params.zeta[i], params.lambda[i], agent_rng);
    payments[i] = draw.level - offsets[eff.allocation];
    included[i] = profile.agents[i][eff.allocation] - payments[i] >= -kCompareEps;
    draws.k[i] = draw.k;
  }
  return finalize_outcome(profile, eff.allocation, payments, included, draws);
}

inline MechanismOutcome mechanism_zeta_lambda(const TypeProfile& profile,
                                              const std::vector<Polytope>& predictions,
                                              const TuningParams& params) {
  RngStream rng(params.seed);
  return mechanism_zeta_lambda(profile, predictions, params, rng);
}

// Level mechanism under partition predictions: the weakest type is sampled
// from the partition (cell by probability, then LP weakest or density draw),
// its welfare replaces the LP min-welfare, and the ladder proceeds as above.
inline MechanismOutcome mechanism_generalized(const TypeProfile& profile,
                                              const std::vector<PartitionPredictor>& predictions,
                                              const TuningParams& params, RngStream& rng) {
  validate_profile(profile);
  detail::require_per_agent(predictions.size(), profile.num_agents(), "partition predictions");
  detail::require_per_agent(params.zeta.size(), profile.num_agents(), "zeta");
  detail::require_per_agent(params.lambda.size(), profile.num_agents(), "lambda");
  const WelfareResult eff = welfare(profile);
  RngStream call = detail::call_stream(rng);

  std::vector<double> payments(profile.num_agents());
  std::vector<bool> included(profile.num_agents());
  MechanismDraws draws;
  draws.k.assign(profile.num_agents(), 0);
  for (int i = 0; i < profile.num_agents(); ++i) {
    RngStream agent_rng = call.substream(static_cast<std::uint64_t>(i));
    const WeakestTypeResult sampled = sample_weakest(predictions[i], profile, i, agent_rng);
    const double baseline = welfare_excluding(profile, i).value;
    const detail::LevelDraw draw =
        detail::draw_level(sampled.welfare, baseline, params.zeta[i], params.lambda[i], agent_rng);
    payments[i] = draw.level - surplus_others(profile, i, eff.allocation);
    included[i] = profile.agents[i][eff.allocation] - payments[i] >= -kCompareEps;
    draws.k[i] = draw.k;
  }
  return finalize_outcome(profile, eff.allocation, payments, included, draws);
}

// ---------------------------------------------------------------------------
// Subspace mechanism
// ---------------------------------------------------------------------------

// Number of halving levels: log2 H for H a power of two, at least 2.
inline int subspace_levels(double H) {
  if (!(H >= 2.0) || !std::isfinite(H))
    throw std::invalid_argument("H must be a power of two, at least 2");
  const int levels = static_cast<int>(std::lround(std::log2(H)));
  if (std::ldexp(1.0, levels) != H)
    throw std::invalid_argument("H must be a power of two, at least 2");
  return levels;
}

inline void validate_subspace(const SubspaceSpec& spec, const TypeProfile& profile) {
  subspace_levels(spec.H);
  detail::require_per_agent(spec.basis.size(), profile.num_agents(), "subspace bases");
  const int dim = profile.num_allocations();
  for (int i = 0; i < profile.num_agents(); ++i) {
    const std::vector<TypeVector>& basis = spec.basis[i];
    if (basis.empty()) throw std::invalid_argument("subspace basis: at least one vector per agent");
    for (const TypeVector& u : basis) {
      if (static_cast<int>(u.size()) != dim)
        throw std::invalid_argument("subspace basis: dimension mismatch");
      double norm2 = 0.0;
      for (double x : u) {
        if (x < -1e-12) throw std::invalid_argument("subspace basis: entries must be non-negative");
        norm2 += x * x;
      }
      if (std::fabs(norm2 - 1.0) > 2e-9)
        throw std::invalid_argument("subspace basis: vectors must have unit norm");
    }
    for (std::size_t a = 0; a < basis.size(); ++a)
      for (std::size_t b = a + 1; b < basis.size(); ++b) {
        double dot = 0.0;
        for (int c = 0; c < dim; ++c) dot += basis[a][c] * basis[b][c];
        if (std::fabs(dot) > 1e-9)
          throw std::invalid_argument("subspace basis: vectors must be orthogonal");
      }

    const TypeVector& theta = profile.agents[i];
    TypeVector residual = theta;
    for (const TypeVector& u : basis) {
      double coef = 0.0;
      for (int c = 0; c < dim; ++c) coef += theta[c] * u[c];
      for (int c = 0; c < dim; ++c) residual[c] -= coef * u[c];
    }
    for (int c = 0; c < dim; ++c) {
      if (theta[c] < 1.0 - kCompareEps || theta[c] > spec.H + kCompareEps)
        throw std::invalid_argument("subspace mechanism: values must lie in [1, H]");
      if (std::fabs(residual[c]) > 1e-6)
        throw std::invalid_argument("subspace mechanism: type is not on the declared subspace");
    }
  }
}

// Random-halving subspace mechanism: each agent's candidate weakest type is a
// sum of basis rays scaled to sup-norm H and halved a random number of times;
// the per-coordinate halving depths are uniform over tuples with a prescribed
// minimum.  Payment is the candidate's welfare minus the others' surplus.
inline MechanismOutcome subspace_mechanism(const TypeProfile& profile, const SubspaceSpec& spec,
                                           RngStream& rng) {
  validate_subspace(spec, profile);
  const int levels = subspace_levels(spec.H);
  const int dim = profile.num_allocations();
  const WelfareResult eff = welfare(profile);
  RngStream call = detail::call_stream(rng);

  std::vector<double> payments(profile.num_agents());
  std::vector<bool> included(profile.num_agents());
  MechanismDraws draws;
  draws.k.assign(profile.num_agents(), 0);
  draws.levels.assign(profile.num_agents(), {});
  for (int i = 0; i < profile.num_agents(); ++i) {
    const std::vector<TypeVector>& basis = spec.basis[i];
    RngStream agent_rng = call.substream(static_cast<std::uint64_t>(i));
    const int floor_level = static_cast<int>(agent_rng.uniform_int(1, levels));

    // Uniform over tuples in {floor..levels}^k whose minimum is exactly
    // floor: draw coordinates independently and reject until the floor binds.
    std::vector<int> tuple(basis.size());
    bool accepted = false;
    for (int attempt = 0; attempt < 100000 && !accepted; ++attempt) {
      int low = levels;
      for (std::size_t j = 0; j < basis.size(); ++j) {
        tuple[j] = static_cast<int>(agent_rng.uniform_int(floor_level, levels));
        low = std::min(low, tuple[j]);
      }
      accepted = (low == floor_level);
    }
    if (!accepted) throw std::runtime_error("subspace mechanism: tuple sampling stalled");

    TypeVector candidate(dim, 0.0);
    for (std::size_t j = 0; j < basis.size(); ++j) {
      double top = 0.0;
      for (double x : basis[j]) top = std::max(top, x);
      const double scale = std::ldexp(spec.H / top, -tuple[j]);
      for (int c = 0; c < dim; ++c) candidate[c] += scale * basis[j][c];
    }

    const WelfareResult replaced = welfare_with_replacement(profile, i, candidate);
    payments[i] = replaced.value - surplus_others(profile, i, eff.allocation);
    included[i] = profile.agents[i][eff.allocation] - payments[i] >= -kCompareEps;
    draws.k[i] = floor_level;
    draws.levels[i] = tuple;
  }
  return finalize_outcome(profile, eff.allocation, payments, included, draws);
}

// ---------------------------------------------------------------------------
// Prior-based Groves pivots
// ---------------------------------------------------------------------------

// Monopoly reserve of a regular distribution: the zero of the virtual value
// phi(v) = v - (1 - F(v)) / f(v), found by bisection.  Regularity (phi
// nondecreasing) is checked on a grid and violations are rejected.
inline double myerson_reserve(const SingleItemIidPrior& prior) {
  if (!prior.cdf || !prior.pdf) throw std::invalid_argument("single-item prior: cdf/pdf required");
  if (!(prior.hi > prior.lo)) throw std::invalid_argument("single-item prior: empty support");
  const auto phi = [&](double v) {
    const double density = prior.pdf(v);
    if (!(density > 0.0))
      throw std::invalid_argument("single-item prior: pdf must be positive on the support");
    return v - (1.0 - prior.cdf(v)) / density;
  };

  const int kGrid = 1024;
  double previous = phi(prior.lo);
  for (int t = 1; t <= kGrid; ++t) {
    const double v = prior.lo + (prior.hi - prior.lo) * t / kGrid;
    const double current = phi(v);
    if (current < previous - 1e-7)
      throw std::invalid_argument("single-item prior: virtual value is not monotone (irregular)");
    previous = current;
  }

  double lo = prior.lo, hi = prior.hi;
  if (phi(lo) >= 0.0) return lo;
  if (phi(hi) <= 0.0) return hi;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (phi(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Revenue-maximizing Groves pivot for one agent.  Discrete priors: the
// expected payment as a function of the pivot is piecewise linear with
// breakpoints at the support welfares, so scanning those candidates is exact;
// ties resolve to the smallest pivot.  Single-item iid priors: the larger of
// the best competing value and the monopoly reserve.
inline double groves_optimal_pivot(const PriorModel& prior, const TypeProfile& profile,
                                   int agent) {
  validate_profile(profile);
  if (prior.kind == PriorModel::Kind::SingleItemIid) {
    const double reserve = myerson_reserve(prior.single_item);
    return std::max(welfare_excluding(profile, agent).value, reserve);
  }

  const DiscretePrior& d = prior.discrete;
  if (d.support.empty()) throw std::invalid_argument("discrete prior: empty support");
  if (d.support.size() != d.probability.size())
    throw std::invalid_argument("discrete prior: support/probability size mismatch");
  double total = 0.0;
  for (double q : d.probability) {
    if (q < 0.0) throw std::invalid_argument("discrete prior: negative probability");
    total += q;
  }
  if (std::fabs(total - 1.0) > 1e-9)
    throw std::invalid_argument("discrete prior: probabilities must sum to 1");

  const std::size_t m = d.support.size();
  std::vector<double> hypothetical(m), others_surplus(m);
  for (std::size_t t = 0; t < m; ++t) {
    const WelfareResult wt = welfare_with_replacement(profile, agent, d.support[t]);
    hypothetical[t] = wt.value;
    others_surplus[t] = wt.value - d.support[t][wt.allocation];
  }

  std::vector<double> candidates = hypothetical;
  std::sort(candidates.begin(), candidates.end());
  double best_pivot = candidates.front(), best_value = -std::numeric_limits<double>::infinity();
  for (double w : candidates) {
    double expected = 0.0;
    for (std::size_t t = 0; t < m; ++t)
      if (w <= hypothetical[t] + kCompareEps) expected += d.probability[t] * (w - others_surplus[t]);
    if (expected > best_value) {  // strict: ties keep the smallest pivot
      best_value = expected;
      best_pivot = w;
    }
  }
  return best_pivot;
}

// Groves mechanism priced by the optimal pivots: p_i = h_i(theta_{-i}) minus
// the others' surplus at the efficient allocation, standard exclusion rule.
inline MechanismOutcome prior_groves(const TypeProfile& profile,
                                     const std::vector<PriorModel>& priors) {
  validate_profile(profile);
  detail::require_per_agent(priors.size(), profile.num_agents(), "priors");
  const WelfareResult eff = welfare(profile);
  std::vector<double> payments(profile.num_agents());
  std::vector<bool> included(profile.num_agents());
  for (int i = 0; i < profile.num_agents(); ++i) {
    const double pivot = groves_optimal_pivot(priors[i], profile, i);
    payments[i] = pivot - surplus_others(profile, i, eff.allocation);
    included[i] = profile.agents[i][eff.allocation] - payments[i] >= -kCompareEps;
  }
  return finalize_outcome(profile, eff.allocation, payments, included);
}

}  // namespace mechlab

#endif  // MECHLAB_MECHANISMS_HPP
