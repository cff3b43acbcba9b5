#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>
#include <vector>

#include "instances.hpp"
#include "mechlab/mechanisms.hpp"

using namespace mechlab;

namespace {

// Conservative-leaning side information: the agent's payment-relevant regime
// (theta_i[alpha*] = 15, prediction error 2, VCG gap 10) used by the tuned
// level mechanism tests.
TypeProfile ladder_instance() {
  return make_profile({"a0", "a1"}, {{15.0, 0.0}, {2.0, 5.0}});
}

Polytope floor_at(int alloc, double bound) {
  Polytope poly;
  poly.constraints.push_back(axis_constraint(alloc, Relation::GreaterEq, bound));
  return poly;
}

// Single-item auction with three outcomes: keep, sell to agent 0, sell to 1.
TypeProfile single_item(double v0, double v1) {
  return make_profile({"s", "0", "1"}, {{0.0, v0, 0.0}, {0.0, 0.0, v1}});
}

double realized_utility(const MechanismOutcome& out, const TypeProfile& truth, int agent) {
  if (!out.participates(agent)) return 0.0;
  return truth.agents[agent][out.allocation] - out.payments[agent];
}

}  // namespace

TEST_CASE("vcg charges externalities and never violates IR") {
  const TypeProfile remark = testinst::unit_demand_instance();
  const MechanismOutcome out = vcg(remark);
  CHECK(out.allocation == 7);
  CHECK(out.payments[0] == Catch::Approx(0.0).margin(1e-12));
  CHECK(out.payments[1] == Catch::Approx(0.0).margin(1e-12));
  CHECK(out.welfare == Catch::Approx(15.0));
  CHECK(out.revenue == Catch::Approx(0.0).margin(1e-12));
  CHECK(out.participants.size() == 2);

  const TypeProfile lonely = make_profile({"a", "b"}, {{7.0, 3.0}});
  const MechanismOutcome solo = vcg(lonely);
  CHECK(solo.payments[0] == Catch::Approx(0.0).margin(1e-12));
  CHECK(solo.welfare == Catch::Approx(7.0));

  RngStream rng(311);
  for (int t = 0; t < 30; ++t) {
    RngStream sub = rng.substream(t);
    const TypeProfile profile =
        testinst::random_profile(sub, 2 + static_cast<int>(sub.uniform_int(0, 1)),
                                 2 + static_cast<int>(sub.uniform_int(0, 3)));
    const MechanismOutcome o = vcg(profile);
    CHECK(outcome_consistent(o, profile));
    for (int i = 0; i < profile.num_agents(); ++i) {
      CHECK(o.payments[i] >= -1e-9);
      CHECK(profile.agents[i][o.allocation] - o.payments[i] >= -1e-9);
    }
  }
}

TEST_CASE("weakest-type VCG prices against the prediction floor") {
  const TypeProfile remark = testinst::unit_demand_instance();
  std::vector<Polytope> predictions(2);
  for (int a : testinst::unit_demand_x_allocations())
    predictions[0].constraints.push_back(axis_constraint(a, Relation::GreaterEq, 7.0));

  const MechanismOutcome out = weakest_type_vcg(remark, predictions);
  CHECK(out.allocation == 7);
  CHECK(out.payments[0] == Catch::Approx(6.0).margin(1e-9));
  CHECK(out.payments[1] == Catch::Approx(0.0).margin(1e-9));
  CHECK(out.revenue == Catch::Approx(6.0).margin(1e-9));
  CHECK(out.welfare == Catch::Approx(15.0));
  CHECK(out.participants.size() == 2);

  // Zero-containing predictions are useless: identical to vanilla VCG.
  std::vector<Polytope> useless(2);
  useless[0].constraints.push_back(axis_constraint(7, Relation::LessEq, 3.0));
  const MechanismOutcome lazy = weakest_type_vcg(remark, useless);
  const MechanismOutcome vanilla = vcg(remark);
  for (int i = 0; i < 2; ++i)
    CHECK(lazy.payments[i] == Catch::Approx(vanilla.payments[i]).margin(1e-9));
  CHECK(lazy.allocation == vanilla.allocation);
}

TEST_CASE("conservative predictions for everyone: revenue is OPT minus total error") {
  const TypeProfile profile = testinst::two_alloc_instance();
  std::vector<Polytope> predictions = {floor_at(1, 1.0), floor_at(1, 2.0)};
  // Weakest welfares: agent 0 -> 4 (error 1), agent 1 -> 4 (error 1).
  const MechanismOutcome out = weakest_type_vcg(profile, predictions);
  CHECK(out.payments[0] == Catch::Approx(1.0).margin(1e-9));
  CHECK(out.payments[1] == Catch::Approx(2.0).margin(1e-9));
  CHECK(out.welfare == Catch::Approx(5.0));
  CHECK(out.revenue == Catch::Approx(5.0 - 2.0).margin(1e-9));
  CHECK(out.participants.size() == 2);

  // An aggressive prediction prices its agent out entirely.
  std::vector<Polytope> aggressive = {floor_at(1, 10.0), Polytope{}};
  const MechanismOutcome burned = weakest_type_vcg(profile, aggressive);
  CHECK_FALSE(burned.participates(0));
  CHECK(burned.payments[0] == 0.0);
  CHECK(burned.welfare == Catch::Approx(3.0));
  CHECK(burned.revenue == Catch::Approx(0.0).margin(1e-9));
}

TEST_CASE("weakest-type VCG dominates vanilla VCG by exactly the recovered gap") {
  RngStream rng(8213);
  for (int t = 0; t < 40; ++t) {
    RngStream sub = rng.substream(t);
    const int dim = 2 + static_cast<int>(sub.uniform_int(0, 3));
    const int agents = 2 + static_cast<int>(sub.uniform_int(0, 1));
    const TypeProfile profile = testinst::random_profile(sub, agents, dim);

    std::vector<Polytope> predictions(agents);
    for (int i = 0; i < agents; ++i) {
      TypeVector anchor = profile.agents[i];
      const double shrink = sub.uniform(0.0, 1.0);
      for (double& v : anchor) v *= shrink;
      predictions[i] = testinst::random_polytope(sub, dim, anchor, 3);
    }

    const MechanismOutcome wt = weakest_type_vcg(profile, predictions);
    const MechanismOutcome vanilla = vcg(profile);
    CHECK(outcome_consistent(wt, profile));
    for (int i = 0; i < agents; ++i) {
      const WeakestTypeResult weakest = weakest_type_lp(predictions[i], profile, i);
      const double gap = weakest.welfare - welfare_excluding(profile, i).value;
      CAPTURE(t, i);
      if (wt.participates(i)) {
        CHECK(wt.payments[i] >= vanilla.payments[i] - 1e-9);
        CHECK(wt.payments[i] - vanilla.payments[i] == Catch::Approx(gap).margin(1e-6));
        // The weakest type could always afford the price.
        CHECK(wt.payments[i] >= weakest.weakest[wt.allocation] - 1e-6);
        CHECK(profile.agents[i][wt.allocation] - wt.payments[i] >= -1e-9);
      } else {
        CHECK(wt.payments[i] == 0.0);
      }
    }
  }
}

TEST_CASE("deterministic level mechanism hits OPT at the exact error and overshoots past it") {
  const TypeProfile profile = testinst::two_alloc_instance();
  std::vector<Polytope> predictions = {floor_at(1, 1.0), floor_at(1, 2.0)};

  // zeta = 0 reduces to weakest-type VCG, bit for bit.
  const MechanismOutcome base = mechanism_zeta_zero(profile, predictions, {0.0, 0.0});
  const MechanismOutcome wt = weakest_type_vcg(profile, predictions);
  CHECK(base.allocation == wt.allocation);
  for (int i = 0; i < 2; ++i) {
    CHECK(base.payments[i] == wt.payments[i]);
    CHECK(base.participates(i) == wt.participates(i));
  }

  // zeta_i = Delta_err extracts every agent's full value: welfare = revenue = OPT.
  const MechanismOutcome full = mechanism_zeta_zero(profile, predictions, {1.0, 1.0});
  CHECK(full.payments[0] == Catch::Approx(2.0).margin(1e-9));
  CHECK(full.payments[1] == Catch::Approx(3.0).margin(1e-9));
  CHECK(full.welfare == Catch::Approx(5.0));
  CHECK(full.revenue == Catch::Approx(5.0).margin(1e-9));
  CHECK(full.participants.size() == 2);

  // A hair past the exact error and the agent walks away.
  const MechanismOutcome over = mechanism_zeta_zero(profile, predictions, {1.01, 0.0});
  CHECK_FALSE(over.participates(0));
  CHECK(over.payments[0] == 0.0);
  CHECK(over.welfare == Catch::Approx(3.0));
  CHECK(over.revenue == Catch::Approx(2.0).margin(1e-9));

  CHECK_THROWS_AS(mechanism_zeta_zero(profile, predictions, {0.0}), std::invalid_argument);
}

TEST_CASE("randomized ladder draws levels from the doubling set") {
  const TypeProfile profile = ladder_instance();
  const std::vector<Polytope> predictions = {floor_at(0, 13.0), Polytope{}};
  TuningParams params;
  params.zeta = {0.0, 1.0};
  params.lambda = {1.0, 1.0};
  params.seed = 7;

  // Same seed, same outcome.
  const MechanismOutcome first = mechanism_zeta_lambda(profile, predictions, params);
  const MechanismOutcome second = mechanism_zeta_lambda(profile, predictions, params);
  CHECK(first.payments == second.payments);
  CHECK(first.draws.k == second.draws.k);

  const std::vector<double> support = {12.0, 11.0, 9.0, 5.0, -3.0};
  std::map<int, int> k_counts;
  double sum = 0.0;
  const int trials = 3000;
  RngStream master(2024);
  for (int t = 0; t < trials; ++t) {
    RngStream trial = master.substream(t);
    const MechanismOutcome out = mechanism_zeta_lambda(profile, predictions, params, trial);
    REQUIRE(out.draws.k.size() == 2);
    const int k = out.draws.k[0];
    REQUIRE((k >= 0 && k <= 4));
    // Realized payment must sit on the ladder: 13 - 2^k.
    CHECK(out.payments[0] == Catch::Approx(support[k]).margin(1e-9));
    CHECK(out.draws.k[1] == 0);
    CHECK(out.payments[1] == Catch::Approx(0.0).margin(1e-9));
    CHECK(out.participants.size() == 2);  // theta*[a0]=15 covers every rung
    ++k_counts[k];
    sum += out.payments[0];
  }
  // E[p] = 15 - 2 - (1+2+4+8+16)/5 = 6.8; empirical mean within 4 sigma.
  CHECK(std::fabs(sum / trials - 6.8) < 0.31);
  for (int k = 0; k <= 4; ++k)
    CHECK(std::fabs(k_counts[k] / static_cast<double>(trials) - 0.2) < 0.03);
}

TEST_CASE("ladder parameter validation") {
  const TypeProfile profile = ladder_instance();
  const std::vector<Polytope> predictions = {floor_at(0, 13.0), Polytope{}};
  RngStream rng(1);

  TuningParams zero_span = uniform_tuning(2, 0.0, 1.0);
  // Agent 1's prediction contains zero, so Delta_vcg + zeta = 0: rejected.
  CHECK_THROWS_AS(mechanism_zeta_lambda(profile, predictions, zero_span, rng),
                  std::invalid_argument);

  TuningParams bad_lambda;
  bad_lambda.zeta = {0.0, 1.0};
  bad_lambda.lambda = {0.0, 1.0};
  CHECK_THROWS_AS(mechanism_zeta_lambda(profile, predictions, bad_lambda, rng),
                  std::invalid_argument);

  TuningParams short_zeta;
  short_zeta.zeta = {0.0};
  short_zeta.lambda = {1.0, 1.0};
  CHECK_THROWS_AS(mechanism_zeta_lambda(profile, predictions, short_zeta, rng),
                  std::invalid_argument);
}

TEST_CASE("tiny lambda keeps everyone aboard at the deepest rung") {
  const TypeProfile profile = ladder_instance();
  const std::vector<Polytope> predictions = {floor_at(0, 13.0), Polytope{}};
  TuningParams params;
  params.zeta = {0.0, 1.0};
  params.lambda = {std::ldexp(1.0, -10), std::ldexp(1.0, -10)};

  RngStream master(99);
  for (int t = 0; t < 500; ++t) {
    RngStream trial = master.substream(t);
    const MechanismOutcome out = mechanism_zeta_lambda(profile, predictions, params, trial);
    // K = ceil(log2(10 * 2^10)) = 14; every rung is individually rational.
    CHECK(out.draws.k[0] <= 14);
    CHECK(out.participants.size() == 2);
    CHECK(out.payments[0] ==
          Catch::Approx(13.0 - std::ldexp(params.lambda[0], out.draws.k[0])).margin(1e-9));
  }
}

TEST_CASE("truthful reporting is a dominant strategy under fixed predictions") {
  RngStream rng(4242);
  for (int t = 0; t < 25; ++t) {
    RngStream sub = rng.substream(t);
    const int dim = 2 + static_cast<int>(sub.uniform_int(0, 2));
    const TypeProfile truth = testinst::random_profile(sub, 3, dim);
    std::vector<Polytope> predictions(3);
    for (int i = 0; i < 3; ++i) {
      TypeVector anchor = truth.agents[i];
      const double shrink = sub.uniform(0.2, 1.0);
      for (double& v : anchor) v *= shrink;
      predictions[i] = testinst::random_polytope(sub, dim, anchor, 3);
    }
    TuningParams params = uniform_tuning(3, 0.5, 0.7, 0);

    for (int agent = 0; agent < 3; ++agent) {
      TypeProfile lie = truth;
      for (int a = 0; a < dim; ++a) lie.agents[agent][a] = sub.uniform(0.0, 12.0);

      // Deterministic mechanism.
      const MechanismOutcome t_wt = weakest_type_vcg(truth, predictions);
      const MechanismOutcome l_wt = weakest_type_vcg(lie, predictions);
      const double u_true = realized_utility(t_wt, truth, agent);
      double u_lie = l_wt.participates(agent)
                         ? truth.agents[agent][l_wt.allocation] - l_wt.payments[agent]
                         : 0.0;
      CAPTURE(t, agent);
      CHECK(u_true >= u_lie - 1e-9);
      CHECK(u_true >= -1e-9);

      // Randomized ladder with identical seed (coupled draws).
      const std::uint64_t seed = 1000 + t;
      RngStream r1(seed), r2(seed);
      const MechanismOutcome t_ml = mechanism_zeta_lambda(truth, predictions, params, r1);
      const MechanismOutcome l_ml = mechanism_zeta_lambda(lie, predictions, params, r2);
      const double mu_true = realized_utility(t_ml, truth, agent);
      const double mu_lie = l_ml.participates(agent)
                                ? truth.agents[agent][l_ml.allocation] - l_ml.payments[agent]
                                : 0.0;
      CHECK(mu_true >= mu_lie - 1e-9);
      CHECK(mu_true >= -1e-9);
    }
  }
}

TEST_CASE("partition predictions feed the ladder through sampled weakest types") {
  const TypeProfile profile = testinst::two_alloc_instance();

  // Two cells with weakest welfares 4 and 3 at probability 1/2 each; the
  // rival gets the uninformative single cell.
  PartitionPredictor focal;
  focal.cells.push_back({floor_at(0, 3.0), 0.5, {}});
  focal.cells.push_back({floor_at(0, 2.0), 0.5, {}});
  PartitionPredictor rival;
  rival.cells.push_back({Polytope{}, 1.0, {}});

  TuningParams params = uniform_tuning(2, 3.0, 1.0);
  const int trials = 20000;
  RngStream master(1212);
  double value_sum = 0.0;
  for (int t = 0; t < trials; ++t) {
    RngStream trial = master.substream(t);
    const MechanismOutcome out =
        mechanism_generalized(profile, {focal, rival}, params, trial);
    value_sum += out.participates(0) ? profile.agents[0][out.allocation] : 0.0;
    CHECK(out.participates(1));  // rival's rungs never exceed the true welfare
    CHECK(outcome_consistent(out, profile));
  }
  // Mixture of the two cells' closed forms: 1/2 * (2/3)*2 + 1/2 * 1*2 = 5/3.
  CHECK(std::fabs(value_sum / trials - 5.0 / 3.0) < 0.03);

  // Point-mass densities at the true types: value is OPT in every draw.
  PartitionPredictor exact0, exact1;
  exact0.cells.push_back(
      {Polytope{}, 1.0, [&](RngStream&) { return profile.agents[0]; }});
  exact1.cells.push_back(
      {Polytope{}, 1.0, [&](RngStream&) { return profile.agents[1]; }});
  TuningParams ones = uniform_tuning(2, 1.0, 1.0);
  for (int t = 0; t < 200; ++t) {
    RngStream trial = master.substream(100000 + t);
    const MechanismOutcome out =
        mechanism_generalized(profile, {exact0, exact1}, ones, trial);
    CHECK(out.participants.size() == 2);
    CHECK(out.welfare == Catch::Approx(5.0));
  }

  // Uninformative cell with zeta = 0 leaves the ladder undefined.
  TuningParams bad = uniform_tuning(2, 0.0, 1.0);
  RngStream trial(5);
  CHECK_THROWS_AS(mechanism_generalized(profile, {focal, rival}, bad, trial),
                  std::invalid_argument);
}

TEST_CASE("single-cell partitions reproduce the plain ladder distribution") {
  const TypeProfile profile = ladder_instance();
  PartitionPredictor focal;
  focal.cells.push_back({floor_at(0, 13.0), 1.0, {}});
  PartitionPredictor rival;
  rival.cells.push_back({Polytope{}, 1.0, {}});
  TuningParams params;
  params.zeta = {0.0, 1.0};
  params.lambda = {1.0, 1.0};

  const std::vector<double> support = {12.0, 11.0, 9.0, 5.0, -3.0};
  RngStream master(77);
  double sum = 0.0;
  const int trials = 3000;
  for (int t = 0; t < trials; ++t) {
    RngStream trial = master.substream(t);
    const MechanismOutcome out =
        mechanism_generalized(profile, {focal, rival}, params, trial);
    CHECK(out.payments[0] == Catch::Approx(support[out.draws.k[0]]).margin(1e-9));
    sum += out.payments[0];
  }
  CHECK(std::fabs(sum / trials - 6.8) < 0.31);
}

TEST_CASE("subspace mechanism: one ray, exact halving ladder") {
  const TypeProfile profile = make_profile({"a"}, {{4.0}});
  SubspaceSpec spec;
  spec.basis = {{{1.0}}};
  spec.H = 4.0;

  RngStream master(31337);
  double pay_sum = 0.0;
  const int trials = 2000;
  for (int t = 0; t < trials; ++t) {
    RngStream trial = master.substream(t);
    const MechanismOutcome out = subspace_mechanism(profile, spec, trial);
    REQUIRE(out.participants.size() == 1);  // 4 >= p for both candidate rungs
    CHECK(out.welfare == Catch::Approx(4.0));
    const double p = out.payments[0];
    CHECK((std::fabs(p - 2.0) < 1e-9 || std::fabs(p - 1.0) < 1e-9));
    CHECK(out.draws.k[0] == (std::fabs(p - 2.0) < 1e-9 ? 1 : 2));
    REQUIRE(out.draws.levels[0].size() == 1);
    CHECK(out.draws.levels[0][0] == out.draws.k[0]);
    pay_sum += p;
  }
  CHECK(std::fabs(pay_sum / trials - 1.5) < 0.05);
}

TEST_CASE("subspace validation rejects malformed specs") {
  const TypeProfile profile = make_profile({"a", "b"}, {{2.0, 2.0}});
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  SubspaceSpec ok;
  ok.basis = {{{inv_sqrt2, inv_sqrt2}}};
  ok.H = 4.0;
  CHECK_NOTHROW(validate_subspace(ok, profile));

  SubspaceSpec bad_h = ok;
  bad_h.H = 3.0;
  CHECK_THROWS_AS(validate_subspace(bad_h, profile), std::invalid_argument);
  bad_h.H = 1.0;
  CHECK_THROWS_AS(validate_subspace(bad_h, profile), std::invalid_argument);

  SubspaceSpec off = ok;
  CHECK_THROWS_AS(
      validate_subspace(off, make_profile({"a", "b"}, {{2.0, 1.0}})),
      std::invalid_argument);  // not on the ray

  CHECK_THROWS_AS(
      validate_subspace(ok, make_profile({"a", "b"}, {{8.0, 8.0}})),
      std::invalid_argument);  // above H

  CHECK_THROWS_AS(
      validate_subspace(ok, make_profile({"a", "b"}, {{0.5, 0.5}})),
      std::invalid_argument);  // below 1

  SubspaceSpec negative = ok;
  negative.basis = {{{0.8, -0.6}}};
  CHECK_THROWS_AS(validate_subspace(negative, profile), std::invalid_argument);

  SubspaceSpec non_unit = ok;
  non_unit.basis = {{{0.5, 0.5}}};
  CHECK_THROWS_AS(validate_subspace(non_unit, profile), std::invalid_argument);

  SubspaceSpec oblique;
  oblique.basis = {{{0.6, 0.8}, {0.8, 0.6}}};
  oblique.H = 4.0;
  CHECK_THROWS_AS(validate_subspace(oblique, profile), std::invalid_argument);
}

TEST_CASE("subspace mechanism: two rays per agent, bounds and domination") {
  const int dim = 4;
  const double H = 16.0;
  const int levels = 4;
  RngStream setup(5150);

  // Disjoint-support orthonormal rays with entries in [1/2, 1] pre-normalization.
  auto make_agent = [&](RngStream& r, std::vector<TypeVector>& basis_out) {
    std::vector<TypeVector> raw = {{r.uniform(0.5, 1.0), r.uniform(0.5, 1.0), 0.0, 0.0},
                                   {0.0, 0.0, r.uniform(0.5, 1.0), r.uniform(0.5, 1.0)}};
    TypeVector theta(dim, 0.0);
    for (TypeVector& u : raw) {
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
      const double coef = r.uniform(1.0 / lo_entry, H / hi_entry);
      for (int c = 0; c < dim; ++c) theta[c] += coef * u[c];
      basis_out.push_back(u);
    }
    return theta;
  };

  SubspaceSpec spec;
  spec.H = H;
  spec.basis.resize(2);
  RngStream r0 = setup.substream(0), r1 = setup.substream(1);
  const TypeVector t0 = make_agent(r0, spec.basis[0]);
  const TypeVector t1 = make_agent(r1, spec.basis[1]);
  const TypeProfile profile = make_profile({"w", "x", "y", "z"}, {t0, t1});
  REQUIRE_NOTHROW(validate_subspace(spec, profile));

  // Key structural fact: some halving tuple is sandwiched between theta/2 and
  // theta, hence always participates.
  for (int i = 0; i < 2; ++i) {
    const TypeVector& theta = profile.agents[i];
    bool sandwiched = false;
    for (int ta = 1; ta <= levels && !sandwiched; ++ta)
      for (int tb = 1; tb <= levels && !sandwiched; ++tb) {
        TypeVector cand(dim, 0.0);
        const std::vector<int> tuple = {ta, tb};
        for (int j = 0; j < 2; ++j) {
          double top = 0.0;
          for (double x : spec.basis[i][j]) top = std::max(top, x);
          const double scale = std::ldexp(H / top, -tuple[j]);
          for (int c = 0; c < dim; ++c) cand[c] += scale * spec.basis[i][j][c];
        }
        bool above_half = true, below_full = true;
        for (int c = 0; c < dim; ++c) {
          above_half = above_half && cand[c] >= 0.5 * theta[c] - 1e-9;
          below_full = below_full && cand[c] <= theta[c] + 1e-9;
        }
        sandwiched = above_half && below_full;
      }
    CHECK(sandwiched);
  }

  const double opt = welfare(profile).value;
  RngStream master(6021);
  const int trials = 3000;
  double welfare_sum = 0.0, revenue_sum = 0.0, welfare_sq = 0.0, revenue_sq = 0.0;
  for (int t = 0; t < trials; ++t) {
    RngStream trial = master.substream(t);
    const MechanismOutcome out = subspace_mechanism(profile, spec, trial);
    CHECK(outcome_consistent(out, profile));
    for (int i = 0; i < 2; ++i) {
      CHECK(out.draws.levels[i].size() == 2);
      int low = levels;
      for (int v : out.draws.levels[i]) {
        CHECK(v >= out.draws.k[i]);
        CHECK(v <= levels);
        low = std::min(low, v);
      }
      CHECK(low == out.draws.k[i]);
      if (out.participates(i))
        CHECK(profile.agents[i][out.allocation] - out.payments[i] >= -1e-9);
      else
        CHECK(out.payments[i] == 0.0);
    }
    welfare_sum += out.welfare;
    revenue_sum += out.revenue;
    welfare_sq += out.welfare * out.welfare;
    revenue_sq += out.revenue * out.revenue;
  }
  const double mean_welfare = welfare_sum / trials;
  const double mean_revenue = revenue_sum / trials;
  const double se_welfare =
      std::sqrt(std::max(0.0, welfare_sq / trials - mean_welfare * mean_welfare) / trials);
  const double se_revenue =
      std::sqrt(std::max(0.0, revenue_sq / trials - mean_revenue * mean_revenue) / trials);
  // Guarantees: E[welfare] >= OPT/log2(H), E[revenue] >= OPT/(2 k (log2 H)^k).
  CHECK(mean_welfare >= opt / 4.0 - 4.0 * se_welfare);
  CHECK(mean_revenue >= opt / 64.0 - 4.0 * se_revenue);
}

TEST_CASE("prior-based pivots: point masses, uniform reserve, and ties") {
  // Point-mass prior extracts the hypothetical welfare exactly.
  const TypeProfile auction = single_item(3.0, 0.3);
  PriorModel point = discrete_prior({{0.0, 3.0, 0.0}}, {1.0});
  CHECK(groves_optimal_pivot(point, auction, 0) == Catch::Approx(3.0).margin(1e-12));
  const MechanismOutcome full = prior_groves(auction, {point, discrete_prior({{0.0, 0.0, 0.3}}, {1.0})});
  CHECK(full.payments[0] == Catch::Approx(3.0).margin(1e-9));  // full surplus
  CHECK(full.participates(0));

  // Uniform[0,1]: virtual value 2v-1, reserve 1/2.
  SingleItemIidPrior uniform;
  uniform.cdf = [](double v) { return v; };
  uniform.pdf = [](double) { return 1.0; };
  uniform.lo = 0.0;
  uniform.hi = 1.0;
  CHECK(myerson_reserve(uniform) == Catch::Approx(0.5).margin(1e-12));

  PriorModel u01 = single_item_iid_prior(uniform.cdf, uniform.pdf, 0.0, 1.0);
  const TypeProfile bids = single_item(0.9, 0.3);
  CHECK(groves_optimal_pivot(u01, bids, 0) == Catch::Approx(0.5).margin(1e-9));
  const MechanismOutcome sold = prior_groves(bids, {u01, u01});
  CHECK(sold.allocation == 1);
  CHECK(sold.payments[0] == Catch::Approx(0.5).margin(1e-9));
  CHECK(sold.participates(0));
  CHECK(sold.revenue == Catch::Approx(0.5).margin(1e-9));

  // Below the reserve the would-be winner is priced out.
  const TypeProfile low = single_item(0.4, 0.3);
  const MechanismOutcome kept = prior_groves(low, {u01, u01});
  CHECK_FALSE(kept.participates(0));
  CHECK(kept.revenue == Catch::Approx(0.0).margin(1e-9));

  // Tie between two candidate pivots resolves to the smaller one.
  const TypeProfile solo = make_profile({"a"}, {{3.0}, {0.0}});
  PriorModel tied = discrete_prior({{2.0}, {4.0}}, {0.5, 0.5});
  CHECK(groves_optimal_pivot(tied, solo, 0) == Catch::Approx(2.0).margin(1e-12));
}

TEST_CASE("discrete pivot search matches a grid oracle") {
  const TypeProfile auction = single_item(2.0, 1.2);
  PriorModel prior =
      discrete_prior({{0.0, 1.0, 0.0}, {0.0, 2.0, 0.0}, {0.0, 4.0, 0.0}}, {0.3, 0.4, 0.3});
  const double pivot = groves_optimal_pivot(prior, auction, 0);
  CHECK(pivot == Catch::Approx(2.0).margin(1e-12));

  // Exhaustive scan of the expected payment over a fine pivot grid.
  auto expected_payment = [&](double w) {
    const std::vector<double> hypos = {1.2, 2.0, 4.0};
    const std::vector<double> surpl = {1.2, 0.0, 0.0};
    const std::vector<double> probs = {0.3, 0.4, 0.3};
    double total = 0.0;
    for (int t = 0; t < 3; ++t)
      if (w <= hypos[t]) total += probs[t] * (w - surpl[t]);
    return total;
  };
  double grid_best = -1.0;
  for (double w = 0.0; w <= 4.8; w += 1e-3) grid_best = std::max(grid_best, expected_payment(w));
  CHECK(expected_payment(pivot) >= grid_best - 1e-9);
}

TEST_CASE("prior validation failures") {
  const TypeProfile auction = single_item(1.0, 0.5);

  CHECK_THROWS_AS(groves_optimal_pivot(discrete_prior({}, {}), auction, 0),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      groves_optimal_pivot(discrete_prior({{0.0, 1.0, 0.0}}, {0.6, 0.4}), auction, 0),
      std::invalid_argument);
  CHECK_THROWS_AS(
      groves_optimal_pivot(discrete_prior({{0.0, 1.0, 0.0}, {0.0, 2.0, 0.0}}, {0.6, 0.6}),
                           auction, 0),
      std::invalid_argument);

  // Bimodal density with a thin valley: virtual value dips, not regular.
  SingleItemIidPrior bimodal;
  bimodal.cdf = [](double v) {
    if (v <= 1.0) return 0.49 * v;
    if (v <= 2.0) return 0.49 + 0.02 * (v - 1.0);
    return 0.51 + 0.49 * (v - 2.0);
  };
  bimodal.pdf = [](double v) {
    if (v <= 1.0) return 0.49;
    if (v <= 2.0) return 0.02;
    return 0.49;
  };
  bimodal.lo = 0.0;
  bimodal.hi = 3.0;
  CHECK_THROWS_AS(myerson_reserve(bimodal), std::invalid_argument);

  SingleItemIidPrior hollow;
  hollow.lo = 1.0;
  hollow.hi = 0.0;
  CHECK_THROWS_AS(myerson_reserve(hollow), std::invalid_argument);
}

TEST_CASE("affine maximizer generalizes weakest-type VCG") {
  const TypeProfile remark = testinst::unit_demand_instance();
  std::vector<Polytope> predictions(2);
  for (int a : testinst::unit_demand_x_allocations())
    predictions[0].constraints.push_back(axis_constraint(a, Relation::GreaterEq, 7.0));

  // Identity parameters: the same arithmetic path, bitwise-equal payments.
  const MechanismOutcome am = weakest_type_am(remark, predictions, identity_am(2, 9));
  const MechanismOutcome wt = weakest_type_vcg(remark, predictions);
  CHECK(am.allocation == wt.allocation);
  CHECK(am.payments == wt.payments);
  CHECK(am.participants == wt.participants);
}

TEST_CASE("allocation boosts can keep the goods unsold") {
  const TypeProfile auction = single_item(6.0, 4.0);
  AMParams am = identity_am(2, 3);
  am.tau = {100.0, 0.0, 0.0};
  const MechanismOutcome out = weakest_type_am(auction, {Polytope{}, Polytope{}}, am);
  CHECK(out.allocation == 0);  // the boosted no-sale outcome wins
  CHECK(out.payments[0] == Catch::Approx(0.0).margin(1e-9));
  CHECK(out.payments[1] == Catch::Approx(0.0).margin(1e-9));
  CHECK(out.participants.size() == 2);
  CHECK(out.welfare == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("weighted affine maximizer with floors, plus binding weakest-type IR") {
  const TypeProfile profile = testinst::two_alloc_instance();
  const std::vector<Polytope> predictions = {floor_at(0, 1.0), floor_at(1, 2.0)};
  AMParams am;
  am.omega = {2.0, 1.0};
  am.tau = {0.0, 0.0};

  const MechanismOutcome out = weakest_type_am(profile, predictions, am);
  CHECK(out.allocation == 1);  // boosted scores (5, 7)
  CHECK(out.payments[0] == Catch::Approx(0.0).margin(1e-9));
  CHECK(out.payments[1] == Catch::Approx(2.0).margin(1e-9));
  CHECK(out.participants.size() == 2);
  CHECK(out.revenue == Catch::Approx(2.0).margin(1e-9));

  // Replace agent 1 by her weighted weakest type: her utility pins to zero.
  const std::vector<double> offsets = detail::am_offsets(profile, 1, am);
  const std::vector<int> all = detail::all_allocations(2);
  const detail::CeilingLpResult weighted =
      detail::minimize_ceiling(predictions[1], 2, offsets, am.omega[1], all, all);
  TypeProfile replaced = profile;
  replaced.agents[1] = weighted.theta;
  const MechanismOutcome pinch = weakest_type_am(replaced, predictions, am);
  CHECK(weighted.theta[pinch.allocation] - pinch.payments[1] ==
        Catch::Approx(0.0).margin(1e-6));
}

TEST_CASE("affine maximizer parameter validation") {
  const TypeProfile profile = testinst::two_alloc_instance();
  const std::vector<Polytope> predictions(2);

  AMParams zero_weight;
  zero_weight.omega = {0.0, 1.0};
  zero_weight.tau = {0.0, 0.0};
  CHECK_THROWS_AS(weakest_type_am(profile, predictions, zero_weight), std::invalid_argument);

  AMParams negative_boost;
  negative_boost.omega = {1.0, 1.0};
  negative_boost.tau = {-0.5, 0.0};
  CHECK_THROWS_AS(weakest_type_am(profile, predictions, negative_boost), std::invalid_argument);

  AMParams short_tau;
  short_tau.omega = {1.0, 1.0};
  short_tau.tau = {0.0};
  CHECK_THROWS_AS(weakest_type_am(profile, predictions, short_tau), std::invalid_argument);

  CHECK_THROWS_AS(weakest_type_vcg(profile, std::vector<Polytope>(1)), std::invalid_argument);
}
