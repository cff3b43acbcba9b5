#ifndef MECHLAB_ENV_HPP
#define MECHLAB_ENV_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "mechlab/common.hpp"
#include "mechlab/rng.hpp"

namespace mechlab {

// A type assigns a non-negative value to every allocation index.
using TypeVector = std::vector<double>;

// Finite allocation space; index order is the tie-break order everywhere.
struct AllocationSpace {
  std::vector<std::string> labels;
  int size() const { return static_cast<int>(labels.size()); }
};

struct TypeProfile {
  AllocationSpace space;
  std::vector<TypeVector> agents;  // agents[i][a] = agent i's value for allocation a

  int num_agents() const { return static_cast<int>(agents.size()); }
  int num_allocations() const { return space.size(); }
};

inline void validate_profile(const TypeProfile& profile) {
  if (profile.space.size() == 0) throw std::invalid_argument("profile: empty allocation space");
  if (profile.agents.empty()) throw std::invalid_argument("profile: no agents");
  for (const TypeVector& type : profile.agents) {
    if (static_cast<int>(type.size()) != profile.space.size())
      throw std::invalid_argument("profile: type dimension does not match allocation space");
    for (double v : type) {
      if (!std::isfinite(v) || v < 0.0)
        throw std::invalid_argument("profile: values must be finite and non-negative");
    }
  }
}

// ---------------------------------------------------------------------------
// Efficient welfare
// ---------------------------------------------------------------------------

struct WelfareResult {
  double value = 0.0;
  int allocation = -1;
};

// Sum of everyone's value for allocation `alloc`, skipping `skip_agent` (-1: nobody),
// optionally with `replacement` standing in for the skipped agent.
inline double allocation_value(const TypeProfile& profile, int alloc, int skip_agent = -1,
                               const TypeVector* replacement = nullptr) {
  double total = 0.0;
  for (int i = 0; i < profile.num_agents(); ++i) {
    if (i == skip_agent) continue;
    total += profile.agents[i][alloc];
  }
  if (replacement != nullptr) total += (*replacement)[alloc];
  return total;
}

namespace detail {
inline WelfareResult best_allocation(const std::vector<double>& sums) {
  const double best = *std::max_element(sums.begin(), sums.end());
  for (int a = 0; a < static_cast<int>(sums.size()); ++a) {
    if (sums[a] >= best - kCompareEps) return {sums[a], a};
  }
  return {best, 0};  // unreachable
}
}  // namespace detail

// Efficient welfare max_a sum_i theta_i[a]; ties go to the lowest allocation index.
inline WelfareResult welfare(const TypeProfile& profile) {
  std::vector<double> sums(profile.num_allocations());
  for (int a = 0; a < profile.num_allocations(); ++a) sums[a] = allocation_value(profile, a);
  return detail::best_allocation(sums);
}

// Efficient welfare with agent `agent`'s report replaced by `replacement`.
inline WelfareResult welfare_with_replacement(const TypeProfile& profile, int agent,
                                              const TypeVector& replacement) {
  if (agent < 0 || agent >= profile.num_agents())
    throw std::invalid_argument("welfare_with_replacement: agent out of range");
  if (static_cast<int>(replacement.size()) != profile.num_allocations())
    throw std::invalid_argument("welfare_with_replacement: replacement dimension mismatch");
  std::vector<double> sums(profile.num_allocations());
  for (int a = 0; a < profile.num_allocations(); ++a)
    sums[a] = allocation_value(profile, a, agent, &replacement);
  return detail::best_allocation(sums);
}

// w(0, theta_{-i}): welfare of the residual market without agent `agent`.
inline WelfareResult welfare_excluding(const TypeProfile& profile, int agent) {
  const TypeVector zeros(profile.num_allocations(), 0.0);
  return welfare_with_replacement(profile, agent, zeros);
}

// sum_{j != agent} theta_j[alloc]
inline double surplus_others(const TypeProfile& profile, int agent, int alloc) {
  return allocation_value(profile, alloc, agent);
}

// ---------------------------------------------------------------------------
// Mechanism outcomes
// ---------------------------------------------------------------------------

// Random draws a mechanism made, kept so a run can be replayed or audited.
struct MechanismDraws {
  std::vector<int> k;                     // per-agent discount exponent draws
  std::vector<std::vector<int>> levels;   // per-agent subspace level tuples
  bool empty() const { return k.empty() && levels.empty(); }
};

struct MechanismOutcome {
  int allocation = -1;
  std::vector<double> payments;    // exactly 0 for excluded agents
  std::vector<int> participants;   // ascending agent indices
  double welfare = 0.0;            // sum of participants' values at `allocation`
  double revenue = 0.0;            // sum of participants' payments
  MechanismDraws draws;

  bool participates(int agent) const {
    return std::binary_search(participants.begin(), participants.end(), agent);
  }
};

// Assemble an outcome from per-agent payments and participation flags,
// computing welfare/revenue in ascending agent order so results are
// reproducible bit for bit.
inline MechanismOutcome finalize_outcome(const TypeProfile& profile, int allocation,
                                         std::vector<double> payments,
                                         const std::vector<bool>& included,
                                         MechanismDraws draws = {}) {
  MechanismOutcome out;
  out.allocation = allocation;
  out.draws = std::move(draws);
  out.payments.assign(profile.num_agents(), 0.0);
  for (int i = 0; i < profile.num_agents(); ++i) {
    if (!included[i]) continue;
    out.participants.push_back(i);
    out.payments[i] = payments[i];
    out.welfare += profile.agents[i][allocation];
    out.revenue += payments[i];
  }
  return out;
}

// True when the stored welfare/revenue equal a recomputation from
// allocation + participants + payments (bit-for-bit).
inline bool outcome_consistent(const MechanismOutcome& out, const TypeProfile& profile) {
  double welfare = 0.0, revenue = 0.0;
  for (int i : out.participants) {
    welfare += profile.agents[i][out.allocation];
    revenue += out.payments[i];
  }
  for (int i = 0; i < profile.num_agents(); ++i) {
    if (!out.participates(i) && out.payments[i] != 0.0) return false;
  }
  return welfare == out.welfare && revenue == out.revenue;
}

// ---------------------------------------------------------------------------
// Instance generators
// ---------------------------------------------------------------------------

struct GeneratorOptions {
  double value_min = 0.0;
  double value_max = 100.0;
  int max_allocations = 20000;  // guard against combinatorial blow-up
};

struct EnvSpec {
  enum class Kind { CombinatorialAuction, Matching, SharedOutcome };
  Kind kind = Kind::SharedOutcome;
  int agents = 0;
  int resources = 0;  // items (auction, matching) or outcomes (shared)
};

namespace detail {

// Assignments of each item to the seller ('s') or one of n agents: (n+1)^m allocations.
inline AllocationSpace auction_allocations(int n, int m, int cap) {
  double count = std::pow(n + 1.0, m);
  if (count > cap) throw std::invalid_argument("combinatorial_auction: allocation count exceeds cap");
  AllocationSpace space;
  std::vector<int> owner(m, -1);  // -1 = seller keeps the item
  while (true) {
    std::string label;
    for (int t = 0; t < m; ++t) {
      if (t > 0) label += '|';
      label += owner[t] < 0 ? std::string("s") : std::to_string(owner[t]);
    }
    space.labels.push_back(label);
    int t = m - 1;
    while (t >= 0 && owner[t] == n - 1) owner[t--] = -1;
    if (t < 0) break;
    ++owner[t];
  }
  return space;
}

inline void enumerate_matchings(int agent, int n, int m, std::vector<int>& match,
                                std::vector<bool>& used, std::vector<std::vector<int>>& out) {
  if (agent == n) {
    out.push_back(match);
    return;
  }
  match[agent] = -1;  // unmatched comes first so the empty matching is index 0
  enumerate_matchings(agent + 1, n, m, match, used, out);
  for (int item = 0; item < m; ++item) {
    if (used[item]) continue;
    used[item] = true;
    match[agent] = item;
    enumerate_matchings(agent + 1, n, m, match, used, out);
    match[agent] = -1;
    used[item] = false;
  }
}

}  // namespace detail

// Deterministic seeded environments.  Values are i.i.d. uniform over
// [value_min, value_max] (defaults [0, 100]); agent i's draws come from
// substream i of the master seed, so adding agents never reshuffles others.
inline TypeProfile make_environment(const EnvSpec& spec, std::uint64_t seed,
                                    const GeneratorOptions& opts = {}) {
  if (spec.agents < 1 || spec.resources < 1)
    throw std::invalid_argument("make_environment: counts must be positive");
  const int n = spec.agents, m = spec.resources;
  RngStream master(seed);
  TypeProfile profile;

  switch (spec.kind) {
    case EnvSpec::Kind::CombinatorialAuction: {
      // Additive valuations: theta_i[a] = sum of i's item values under assignment a.
      profile.space = detail::auction_allocations(n, m, opts.max_allocations);
      std::vector<std::vector<double>> item_value(n, std::vector<double>(m));
      for (int i = 0; i < n; ++i) {
        RngStream agent_rng = master.substream(i);
        for (int t = 0; t < m; ++t) item_value[i][t] = agent_rng.uniform(opts.value_min, opts.value_max);
      }
      for (int i = 0; i < n; ++i) {
        TypeVector type(profile.space.size(), 0.0);
        for (int a = 0; a < profile.space.size(); ++a) {
          int owner = -1, item = 0;
          for (char c : profile.space.labels[a]) {
            if (c == '|') {
              if (owner == i) type[a] += item_value[i][item];
              owner = -1;
              ++item;
            } else if (c == 's') {
              owner = -2;
            } else {
              owner = (owner < 0 ? 0 : owner * 10) + (c - '0');
            }
          }
          if (owner == i) type[a] += item_value[i][item];
        }
        profile.agents.push_back(std::move(type));
      }
      break;
    }
    case EnvSpec::Kind::Matching: {
      // All matchings of agents to items, partial ones included.
      std::vector<std::vector<int>> matchings;
      std::vector<int> match(n, -1);
      std::vector<bool> used(m, false);
      detail::enumerate_matchings(0, n, m, match, used, matchings);
      if (static_cast<int>(matchings.size()) > opts.max_allocations)
        throw std::invalid_argument("matching: allocation count exceeds cap");
      for (const std::vector<int>& mt : matchings) {
        std::string label;
        for (int i = 0; i < n; ++i) {
          if (i > 0) label += '|';
          label += mt[i] < 0 ? std::string("-") : std::to_string(mt[i]);
        }
        profile.space.labels.push_back(label);
      }
      std::vector<std::vector<double>> item_value(n, std::vector<double>(m));
      for (int i = 0; i < n; ++i) {
        RngStream agent_rng = master.substream(i);
        for (int t = 0; t < m; ++t) item_value[i][t] = agent_rng.uniform(opts.value_min, opts.value_max);
      }
      for (int i = 0; i < n; ++i) {
        TypeVector type(profile.space.size(), 0.0);
        for (size_t a = 0; a < matchings.size(); ++a)
          if (matchings[a][i] >= 0) type[a] = item_value[i][matchings[a][i]];
        profile.agents.push_back(std::move(type));
      }
      break;
    }
    case EnvSpec::Kind::SharedOutcome: {
      // One of m shared outcomes is chosen; every agent values each outcome.
      if (m > opts.max_allocations)
        throw std::invalid_argument("shared_outcome: allocation count exceeds cap");
      for (int a = 0; a < m; ++a) profile.space.labels.push_back("o" + std::to_string(a));
      for (int i = 0; i < n; ++i) {
        RngStream agent_rng = master.substream(i);
        TypeVector type(m);
        for (int a = 0; a < m; ++a) type[a] = agent_rng.uniform(opts.value_min, opts.value_max);
        profile.agents.push_back(std::move(type));
      }
      break;
    }
  }
  validate_profile(profile);
  return profile;
}

// Convenience constructor for hand-built instances.
inline TypeProfile make_profile(std::vector<std::string> labels,
                                std::vector<TypeVector> agents) {
  TypeProfile profile{AllocationSpace{std::move(labels)}, std::move(agents)};
  validate_profile(profile);
  return profile;
}

}  // namespace mechlab

#endif  // MECHLAB_ENV_HPP
