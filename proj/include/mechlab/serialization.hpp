#ifndef MECHLAB_SERIALIZATION_HPP
#define MECHLAB_SERIALIZATION_HPP

#include <string>

#include <json.hpp>

#include "mechlab/analysis.hpp"
#include "mechlab/env.hpp"
#include "mechlab/geometry.hpp"

namespace mechlab {

// Insertion-ordered JSON keeps key order deterministic, so serialized reports
// are byte-stable across runs and worker counts.
using Json = nlohmann::ordered_json;

inline std::string relation_name(Relation rel) {
  switch (rel) {
    case Relation::LessEq: return "<=";
    case Relation::GreaterEq: return ">=";
    case Relation::Equal: return "==";
  }
  return "?";
}

inline Json json_of(const LinearConstraint& c) {
  Json coeffs = Json::object();
  for (const auto& [alloc, coef] : c.coeffs) coeffs[std::to_string(alloc)] = coef;
  return Json{{"coeffs", std::move(coeffs)}, {"rel", relation_name(c.rel)}, {"bound", c.bound}};
}

inline Json json_of(const Polytope& poly) {
  Json rows = Json::array();
  for (const LinearConstraint& c : poly.constraints) rows.push_back(json_of(c));
  return Json{{"constraints", std::move(rows)}};
}

inline Json json_of(const TypeProfile& profile) {
  Json json;
  json["allocations"] = profile.space.labels;
  json["agents"] = profile.agents;
  return json;
}

inline Json json_of(const MechanismOutcome& outcome, const TypeProfile& profile) {
  Json json;
  json["allocation"] = outcome.allocation;
  if (outcome.allocation >= 0 && outcome.allocation < profile.num_allocations())
    json["allocation_label"] = profile.space.labels[outcome.allocation];
  json["payments"] = outcome.payments;
  json["participants"] = outcome.participants;
  json["welfare"] = outcome.welfare;
  json["revenue"] = outcome.revenue;
  if (!outcome.draws.empty()) {
    Json draws;
    if (!outcome.draws.k.empty()) draws["k"] = outcome.draws.k;
    if (!outcome.draws.levels.empty()) draws["levels"] = outcome.draws.levels;
    json["draws"] = std::move(draws);
  }
  return json;
}

inline Json json_of(const McStat& stat) { return Json{{"mean", stat.mean}, {"se", stat.se}}; }

inline Json json_of(const McSummary& summary) {
  Json json;
  json["trials"] = summary.trials;
  json["welfare"] = json_of(summary.welfare);
  json["revenue"] = json_of(summary.revenue);
  Json values = Json::array(), payments = Json::array();
  for (const McStat& s : summary.agent_value) values.push_back(json_of(s));
  for (const McStat& s : summary.agent_payment) payments.push_back(json_of(s));
  json["agent_value"] = std::move(values);
  json["agent_payment"] = std::move(payments);
  json["participation"] = summary.participation;
  return json;
}

inline Json json_of(const BoundCheck& check) {
  return Json{{"label", check.label},
              {"bound", check.bound},
              {"observed", check.observed},
              {"se", check.se},
              {"verdict", check.verdict}};
}

inline Json json_of(const RegimeParams& p) {
  return Json{{"theta_star", p.theta_star},
              {"zeta", p.zeta},
              {"lambda", p.lambda},
              {"delta_err", p.delta_err},
              {"delta_vcg", p.delta_vcg}};
}

inline Json json_of(const AgentGuarantee& agent) {
  Json json;
  json["regime"] = json_of(agent.regime);
  json["closed_form_value"] = agent.closed_form_value;
  json["exact_expected_payment"] = agent.exact_expected_payment;
  json["payment_lower_bound"] = agent.payment_lower_bound;
  json["value"] = json_of(agent.value);
  json["payment"] = json_of(agent.payment);
  return json;
}

inline Json json_of(const GuaranteeReport& report) {
  Json json;
  json["trials"] = report.trials;
  json["seed"] = report.seed;
  Json agents = Json::array();
  for (const AgentGuarantee& a : report.agents) agents.push_back(json_of(a));
  json["agents"] = std::move(agents);
  json["welfare"] = json_of(report.welfare);
  json["revenue"] = json_of(report.revenue);
  json["welfare_closed_form"] = report.welfare_closed_form;
  json["revenue_lower_bound"] = report.revenue_lower_bound;
  Json checks = Json::array();
  for (const BoundCheck& c : report.checks) checks.push_back(json_of(c));
  json["checks"] = std::move(checks);
  json["all_satisfied"] = report.all_satisfied;
  return json;
}

}  // namespace mechlab

#endif  // MECHLAB_SERIALIZATION_HPP
