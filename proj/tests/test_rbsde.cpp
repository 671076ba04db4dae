#include <doctest.h>

#include "instances.hpp"
#include "oracles.hpp"
#include "riskswitch/rbsde.hpp"

using namespace riskswitch;
using rstest::Rng;

namespace {

SwitchingProblem deterministic_instance() {
  const std::size_t n = 1;
  auto space = FilteredSpace::make(OutcomeSpace::build({1.0}),
                                   Filtration::build({Partition::trivial(n), Partition::trivial(n)}));
  const RandomVariable one(n, 1.0);
  const RandomVariable zero(n, 0.0);
  const RandomVariable c(n, 0.6);
  return SwitchingProblem::make(space, RiskSpec::linear(), {{one, one}, {zero, zero}},
                                {{{zero, zero}, {c, c}}, {{c, c}, {zero, zero}}});
}

bool failed(const VerificationReport& r, const char* name) {
  const CheckResult* c = r.find(name);
  REQUIRE(c != nullptr);
  return !c->passed;
}

}  // namespace

TEST_CASE("deterministic instance satisfies the system") {
  const SwitchingProblem p = deterministic_instance();
  const RbsdeTriple tr = construct_solution(p, solve_finite(p));
  const VerificationReport rep = verify_solution(p, tr);
  CHECK(rep.passed());
  CHECK(tr.Y[0][0][0] == doctest::Approx(0.6));
  // the reflection is active at t = 0 for mode 0: A increases on the first step
  CHECK(tr.A[0][1][0] > 0.0);
}

TEST_CASE("constructed triples verify on random instances") {
  Rng rng(31);
  for (int trial = 0; trial < 120; ++trial) {
    const RiskSpec r = rstest::risk_by_index(trial, rng);
    const SwitchingProblem p = rstest::random_switching(rng, r);
    const ValueField vf = solve_finite(p);
    const RbsdeTriple tr = construct_solution(p, vf);
    CAPTURE(r.name());
    const VerificationReport rep = verify_solution(p, tr);
    for (const CheckResult& c : rep.checks) {
      CAPTURE(c.name);
      CAPTURE(c.where);
      CHECK(c.passed);
    }
    const auto [m, a] = reconstruct_MA(p, tr.Y);
    CHECK(m == tr.M);
    CHECK(a == tr.A);

    // increments against the blockwise oracle
    for (int i = 0; i < p.m; ++i) {
      const auto ii = static_cast<std::size_t>(i);
      for (int t = 0; t < p.horizon(); ++t) {
        const auto tt = static_cast<std::size_t>(t);
        const RandomVariable dm = tr.Y[ii][tt + 1] - rstest::oracle_rho(r, *p.space, t, tr.Y[ii][tt + 1]);
        CHECK(max_abs_diff(tr.M[ii][tt + 1] - tr.M[ii][tt], dm) < 1e-10);
        const RandomVariable da =
            rstest::oracle_rho(r, *p.space, t, p.g[ii][tt] + tr.Y[ii][tt + 1]) - tr.Y[ii][tt];
        CHECK(max_abs_diff(tr.A[ii][tt + 1] - tr.A[ii][tt], da) < 1e-10);
      }
    }
  }
}

TEST_CASE("perturbing A at a slack obstacle point breaks the Skorokhod condition") {
  Rng rng(32);
  int perturbed = 0;
  for (int trial = 0; trial < 200 && perturbed < 60; ++trial) {
    const SwitchingProblem p = rstest::random_switching(rng, rstest::risk_by_index(trial, rng));
    const RbsdeTriple tr = construct_solution(p, solve_finite(p));
    const ConditionalRisk rho = p.riskmap();
    for (int i = 0; i < p.m; ++i) {
      const auto ii = static_cast<std::size_t>(i);
      const ComponentData d = component_data(p, rho, tr.Y, i);
      for (int t = 0; t < p.horizon(); ++t) {
        const auto tt = static_cast<std::size_t>(t);
        if (!d.obstacle[tt]) continue;
        for (std::size_t k = 0; k < p.size(); ++k) {
          if ((*d.obstacle[tt])[k] - tr.Y[ii][tt][k] < 1e-6) continue;
          RbsdeTriple bad = tr;
          bad.A[ii][tt + 1][k] += 0.5;
          CHECK(failed(verify_solution(p, bad), "skorokhod"));
          ++perturbed;
        }
      }
    }
  }
  CHECK(perturbed >= 20);
}

TEST_CASE("each check detects its own violation") {
  Rng rng(33);
  SwitchingProblem p = rstest::random_switching(rng, RiskSpec::entropic(1.0));
  while (p.horizon() < 2 || p.space->at(0).block_count() == p.size()) {
    p = rstest::random_switching(rng, RiskSpec::entropic(1.0));
  }
  const RbsdeTriple tr = construct_solution(p, solve_finite(p));
  RbsdeTriple bad = tr;
  bad.Y[0][0] += 0.01;
  CHECK(failed(verify_solution(p, bad), "backward_equation"));

  bad = tr;
  bad.M[0][1] += 0.01;  // rho_0(dM_1) = 0.01
  CHECK(failed(verify_solution(p, bad), "martingale"));

  bad = tr;
  bad.M[0][0] += 0.01;
  CHECK(failed(verify_solution(p, bad), "initial_zero"));

  bad = tr;
  for (std::size_t t = 1; t < bad.A[0].size(); ++t) bad.A[0][t] -= static_cast<double>(t);
  CHECK(failed(verify_solution(p, bad), "nondecreasing"));

  // A_1 must be G_0-measurable; split it on a G_0 block with at least two outcomes
  for (const auto& b : p.space->at(0).blocks()) {
    if (b.size() < 2) continue;
    bad = tr;
    bad.A[0][1][b.front()] += 0.01;
    CHECK(failed(verify_solution(p, bad), "predictable"));
    break;
  }

  bad = tr;
  bad.Y[0].pop_back();
  CHECK_FALSE(verify_solution(p, bad).passed());

  // Y above the obstacle
  if (p.m > 1) {
    const ConditionalRisk rho = p.riskmap();
    bad = tr;
    const ComponentData d = component_data(p, rho, tr.Y, 0);
    if (d.obstacle[0]) {
      bad.Y[0][0] = *d.obstacle[0] + 1.0;
      CHECK(failed(verify_solution(p, bad), "obstacle"));
    }
  }
}

TEST_CASE("optimality conditions: extracted strategies pass, non-optimal perturbations fail") {
  Rng rng(34);
  int nonoptimal = 0;
  for (int trial = 0; trial < 80; ++trial) {
    const RiskSpec r = trial % 2 == 0 ? RiskSpec::linear() : RiskSpec::entropic(rstest::uniform(rng, 0.3, 3.0));
    const SwitchingProblem p = rstest::random_switching(rng, r);
    const ValueField vf = solve_finite(p);
    const RbsdeTriple tr = construct_solution(p, vf);
    for (int i = 0; i < p.m; ++i) {
      const Strategy best = extract_strategy(vf, p, 0, i);
      CHECK(check_optimality_conditions(p, tr, best));
      for (int k = 0; k < 20; ++k) {
        const Strategy xi = rstest::perturb_strategy(rng, p, best);
        const RandomVariable v = evaluate_strategy(p, xi, 0);
        const bool optimal = max_abs_diff(v, vf.V[static_cast<std::size_t>(i)][0]) <= 1e-9;
        if (!optimal) {
          ++nonoptimal;
          CHECK_FALSE(check_optimality_conditions(p, tr, xi));
        }
      }
    }
  }
  CHECK(nonoptimal > 200);
}

TEST_CASE("optimality conditions hold for extracted strategies under every risk kind") {
  Rng rng(35);
  for (int trial = 0; trial < 80; ++trial) {
    const SwitchingProblem p = rstest::random_switching(rng, rstest::risk_by_index(trial, rng));
    const ValueField vf = solve_finite(p);
    const RbsdeTriple tr = construct_solution(p, vf);
    for (int t = 0; t <= p.horizon(); ++t) {
      for (int i = 0; i < p.m; ++i) CHECK(check_optimality_conditions(p, tr, extract_strategy(vf, p, t, i)));
    }
  }
}
