#include <doctest.h>

#include "instances.hpp"
#include "oracles.hpp"
#include "riskswitch/parallel.hpp"
#include "riskswitch/switching.hpp"

using namespace riskswitch;
using rstest::Rng;

namespace {

// m = 2, one outcome, T = 1, g_0 = 1, g_1 = 0, switching costs 0.6 both ways.
SwitchingProblem deterministic_instance(RiskSpec risk = RiskSpec::linear()) {
  const std::size_t n = 1;
  auto space = FilteredSpace::make(OutcomeSpace::build({1.0}),
                                   Filtration::build({Partition::trivial(n), Partition::trivial(n)}));
  const RandomVariable one(n, 1.0);
  const RandomVariable zero(n, 0.0);
  const RandomVariable c(n, 0.6);
  Table g{{one, one}, {zero, zero}};
  std::vector<Table> cc{{{zero, zero}, {c, c}}, {{c, c}, {zero, zero}}};
  return SwitchingProblem::make(space, risk, g, cc);
}

}  // namespace

TEST_CASE("deterministic two-mode instance") {
  const SwitchingProblem p = deterministic_instance();
  const ValueField vf = solve_finite(p);
  CHECK(vf.V[0][0][0] == doctest::Approx(0.6).epsilon(1e-14));
  CHECK(vf.V[1][0][0] == doctest::Approx(0.0));
  CHECK(vf.selection[0][0][0] == 1);  // switch at t = 0
  CHECK(count_strategies(p, 0, 0, 0) == 4.0);
  CHECK(brute_force_value(p, 0, 0)[0] == doctest::Approx(0.6).epsilon(1e-14));
  const Strategy xi = extract_strategy(vf, p, 0, 0);
  CHECK(xi.modes[0][0] == 1);
  CHECK(xi.modes[1][0] == 1);
  // every risk kind agrees on deterministic costs
  for (const RiskSpec& r : {RiskSpec::entropic(2.0), RiskSpec::worst_case(), RiskSpec::cvar(0.3)}) {
    CHECK(solve_finite(deterministic_instance(r)).V[0][0][0] == doctest::Approx(0.6).epsilon(1e-14));
  }
}

TEST_CASE("ties prefer staying, then the lowest index") {
  const std::size_t n = 1;
  auto space = FilteredSpace::make(OutcomeSpace::build({1.0}), Filtration::build({Partition::trivial(n)}));
  const RandomVariable z(n, 0.0);
  Table g{{z}, {z}, {z}};
  std::vector<Table> c(3, Table(3, std::vector<RandomVariable>{z}));
  const SwitchingProblem p = SwitchingProblem::make(space, RiskSpec::linear(), g, c);
  const ValueField vf = solve_finite(p);
  for (int i = 0; i < 3; ++i) CHECK(vf.selection[static_cast<std::size_t>(i)][0][0] == i);

  Table g2{{RandomVariable(n, 1.0)}, {z}, {z}};
  const ValueField vf2 = solve_finite(SwitchingProblem::make(space, RiskSpec::linear(), g2, c));
  CHECK(vf2.selection[0][0][0] == 1);
  CHECK(vf2.selection[2][0][0] == 2);
}

TEST_CASE("diagonal switching costs are folded into the running cost") {
  Rng rng(21);
  for (int trial = 0; trial < 40; ++trial) {
    SwitchingProblem p = rstest::random_switching(rng, rstest::risk_by_index(trial, rng));
    SwitchingProblem q = p;
    for (std::size_t i = 0; i < q.c.size(); ++i) {
      for (auto& x : q.c[i][i]) x = rstest::random_rv(rng, q.size(), -0.5, 0.5);
    }
    const SwitchingProblem folded = SwitchingProblem::make(q.space, q.risk, q.g, q.c, q.allowed);
    for (int i = 0; i < q.m; ++i) {
      for (int j = 0; j < q.m; ++j) {
        for (int t = 0; t <= q.horizon(); ++t) {
          const auto ii = static_cast<std::size_t>(i);
          const auto jj = static_cast<std::size_t>(j);
          const auto tt = static_cast<std::size_t>(t);
          CHECK(max_abs_diff(combined_cost(folded, i, j, t), q.g[jj][tt] + q.c[ii][jj][tt]) < 1e-15);
          if (i == j) CHECK(max_abs_diff(folded.c[ii][ii][tt], RandomVariable(q.size(), 0.0)) == 0.0);
        }
      }
    }
  }
}

TEST_CASE("recursion equals strategy enumeration on small random instances") {
  Rng rng(22);
  rstest::InstanceOptions opt;
  opt.max_strategies = 800;
  for (int trial = 0; trial < 80; ++trial) {
    const RiskSpec r = rstest::risk_by_index(trial, rng);
    const SwitchingProblem p = rstest::random_switching(rng, r, opt);
    const ValueField vf = solve_finite(p);
    CAPTURE(r.name());
    for (int i = 0; i < p.m; ++i) {
      for (int t = 0; t <= p.horizon(); ++t) {
        const RandomVariable& v = vf.V[static_cast<std::size_t>(i)][static_cast<std::size_t>(t)];
        CHECK(is_measurable(v, p.space->at(t)));
        CHECK(max_abs_diff(v, rstest::oracle_switching_value(p, t, i)) < 1e-9);
        CHECK(max_abs_diff(v, brute_force_value(p, t, i)) < 1e-9);
      }
    }
  }
}

TEST_CASE("two outcomes, two modes, T = 2") {
  Rng rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    auto space = rstest::random_space(rng, 2, 2);
    Table g(2);
    std::vector<Table> c(2, Table(2));
    for (std::size_t i = 0; i < 2; ++i) {
      for (int t = 0; t <= 2; ++t) g[i].push_back(rstest::random_rv(rng, 2, -1.0, 1.0));
      for (std::size_t j = 0; j < 2; ++j) {
        for (int t = 0; t <= 2; ++t) c[i][j].push_back(i == j ? RandomVariable(2, 0.0) : rstest::random_rv(rng, 2, 0.0, 1.0));
      }
    }
    const SwitchingProblem p = SwitchingProblem::make(space, rstest::risk_by_index(trial, rng), g, c);
    const ValueField vf = solve_finite(p);
    for (int i = 0; i < 2; ++i) {
      for (int t = 0; t <= 2; ++t) {
        CHECK(max_abs_diff(vf.V[static_cast<std::size_t>(i)][static_cast<std::size_t>(t)], brute_force_value(p, t, i)) <
              1e-9);
      }
    }
  }
}

TEST_CASE("extracted strategies are adapted and attain the value") {
  Rng rng(24);
  for (int trial = 0; trial < 60; ++trial) {
    const SwitchingProblem p = rstest::random_switching(rng, rstest::risk_by_index(trial, rng));
    const ValueField vf = solve_finite(p);
    for (int i = 0; i < p.m; ++i) {
      for (int t = 0; t <= p.horizon(); ++t) {
        const Strategy xi = extract_strategy(vf, p, t, i);
        CHECK(check_adapted(xi, p.space->filtration(), p.m));
        CHECK(max_abs_diff(evaluate_strategy(p, xi, t), vf.V[static_cast<std::size_t>(i)][static_cast<std::size_t>(t)]) <
              1e-9);
        CHECK(max_abs_diff(evaluate_strategy(p, xi, t), rstest::oracle_strategy_cost(p, xi)) < 1e-9);
      }
    }
  }
}

TEST_CASE("forbidden switches") {
  Rng rng(25);
  SwitchingProblem p = rstest::random_switching(rng, RiskSpec::entropic(1.0));
  while (p.m < 2) p = rstest::random_switching(rng, RiskSpec::entropic(1.0));
  p.allowed.assign(static_cast<std::size_t>(p.m), std::vector<bool>(static_cast<std::size_t>(p.m), false));
  for (int i = 0; i < p.m; ++i) p.allowed[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = true;
  const ValueField vf = solve_finite(p);
  const ConditionalRisk rho = p.riskmap();
  for (int i = 0; i < p.m; ++i) {
    const auto ii = static_cast<std::size_t>(i);
    CHECK(max_abs_diff(vf.V[ii][0], rho.aggregate(0, p.horizon(), p.g[ii])) < 1e-12);
  }
  Strategy xi = Strategy::constant(p.size(), 0, p.horizon(), 0);
  xi.modes[0].assign(p.size(), 1);
  CHECK_THROWS_AS((void)evaluate_strategy(p, xi, 0), Error);
}

TEST_CASE("anticipating strategies are rejected") {
  const std::size_t n = 2;
  auto space = FilteredSpace::make(OutcomeSpace::build({0.5, 0.5}),
                                   Filtration::build({Partition::trivial(n), Partition::trivial(n)}));
  const RandomVariable z(n, 0.0);
  const SwitchingProblem p =
      SwitchingProblem::make(space, RiskSpec::linear(), {{z, z}, {z, z}}, std::vector<Table>(2, Table(2, {z, z})));
  Strategy xi = Strategy::constant(n, 0, 1, 0);
  xi.modes[1] = {0, 1};
  try {
    (void)evaluate_strategy(p, xi, 0);
    FAIL("expected NotAdapted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotAdapted);
  }
}

TEST_CASE("brute force guard") {
  Rng rng(26);
  rstest::InstanceOptions opt;
  opt.max_strategies = 1e12;
  SwitchingProblem p = rstest::random_switching(rng, RiskSpec::linear(), opt);
  while (count_strategies(p, 0, 0, 0) < 100) p = rstest::random_switching(rng, RiskSpec::linear(), opt);
  try {
    (void)brute_force_value(p, 0, 0, 10);
    FAIL("expected TooLarge");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::TooLarge);
  }
}

TEST_CASE("jump representation") {
  const std::size_t n = 2;
  const Strategy constant = Strategy::constant(n, 0, 3, 1);
  const auto jumps = jump_representation(constant, 0, 1, 3);
  REQUIRE(jumps.size() == 1);
  CHECK(jumps[0].tau == StoppingTime{3, 3});
  CHECK(jumps[0].beta == std::vector<Mode>{1, 1});

  Strategy xi = Strategy::constant(n, 0, 3, 0);
  xi.modes[1] = {1, 0};
  xi.modes[2] = {1, 0};
  xi.modes[3] = {0, 0};
  const auto js = jump_representation(xi, 0, 0, 3);
  REQUIRE(js.size() == 2);
  CHECK(js[0].tau == StoppingTime{1, 3});
  CHECK(js[0].beta == std::vector<Mode>{1, 0});
  CHECK(js[1].tau == StoppingTime{3, 3});
  CHECK(js[1].beta == std::vector<Mode>{0, 0});
}

TEST_CASE("results do not depend on the worker count") {
  Rng rng(27);
  for (int trial = 0; trial < 20; ++trial) {
    const SwitchingProblem p = rstest::random_switching(rng, rstest::risk_by_index(trial, rng));
    set_thread_count(1);
    const ValueField a = solve_finite(p);
    set_thread_count(3);
    const ValueField b = solve_finite(p);
    set_thread_count(0);
    for (std::size_t i = 0; i < a.V.size(); ++i) {
      for (std::size_t t = 0; t < a.V[i].size(); ++t) CHECK(a.V[i][t] == b.V[i][t]);
    }
    CHECK(a.selection == b.selection);
  }
}
