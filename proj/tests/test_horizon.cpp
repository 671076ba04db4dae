#include <doctest.h>

#include <cmath>

#include "instances.hpp"
#include "riskswitch/horizon.hpp"

using namespace riskswitch;
using rstest::Rng;

namespace {

DiscountedMarkovParams single_mode_half() {
  DiscountedMarkovParams p;
  p.alpha = 0.5;
  p.transition = {{1.0}};
  p.g_hat = {{1.0}};
  p.risk = RiskSpec::linear();
  return p;
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("bound sequences") {
  const BoundSequence g = BoundSequence::geometric(1.0, 0.5);
  CHECK(g.at(3) == 0.125);
  CHECK(g.tail(0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(g.tail(10) == doctest::Approx(std::pow(0.5, 10)).epsilon(1e-15));

  const BoundSequence f = BoundSequence::finite({1.0, 2.0, 3.0});
  CHECK(f.tail(0) == 5.0);
  CHECK(f.tail(2) == 0.0);
  CHECK(f.at(7) == 0.0);

  const BoundSequence s = BoundSequence::general([](int t) { return std::pow(0.5, t); });
  CHECK(s.tail(-1) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(s.tail(3) == doctest::Approx(0.125).epsilon(1e-14));
  // summable but too slow to certify numerically
  CHECK(code_of([] { (void)BoundSequence::general([](int t) { return 1.0 / ((t + 1.0) * (t + 2.0)); }).tail(0); }) ==
        ErrorCode::DivergentBound);

  CHECK(code_of([] { (void)BoundSequence::geometric(1.0, 1.0); }) == ErrorCode::DivergentBound);
  CHECK(code_of([] { (void)BoundSequence::general([](int) { return 1.0; }).tail(0); }) == ErrorCode::DivergentBound);
  CHECK(code_of([] { (void)choose_horizon(BoundSequence::geometric(1.0, 0.5), 0.0); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([] { (void)choose_horizon(BoundSequence::geometric(1.0, 0.999), 1e-12, 50); }) ==
        ErrorCode::DivergentBound);
}

TEST_CASE("single-mode discounted instance") {
  const DiscountedMarkovGenerator gen(single_mode_half());
  const int r = choose_horizon(gen.bound(), 1e-3);
  CHECK(r == 11);
  CHECK(2.0 * std::pow(0.5, r) <= 1e-3);
  CHECK(2.0 * std::pow(0.5, r - 1) > 1e-3);
  const TruncatedValue tv = truncated_solve(gen, 1e-3);
  CHECK(tv.horizon == 11);
  CHECK(tv.error_bound == doctest::Approx(2.0 * std::pow(0.5, 11)).epsilon(1e-14));
  REQUIRE(tv.v0.size() == 1);
  CHECK(std::abs(tv.v0[0][0] - 2.0) <= tv.error_bound);
  for (int k = 0; k < 8; ++k) {
    const TruncatedValue at = truncated_solve_at(gen, k);
    CHECK(std::abs(at.v0[0][0] - 2.0) <= at.error_bound);
  }
}

TEST_CASE("truncated values are nonincreasing in the horizon") {
  Rng rng(51);
  for (int trial = 0; trial < 20; ++trial) {
    const RiskSpec r = rstest::risk_by_index(trial, rng);
    const DiscountedMarkovGenerator gen(rstest::random_discounted(rng, r, 2, rstest::uniform_int(rng, 1, 3)));
    const TruncatedValue deep = truncated_solve_at(gen, 10);
    std::vector<std::vector<double>> prev;
    for (int h = 0; h <= 5; ++h) {
      const TruncatedValue tv = truncated_solve_at(gen, h);
      for (std::size_t i = 0; i < tv.v0_blocks.size(); ++i) {
        const double v = tv.v0_blocks[i][0];
        if (!prev.empty()) CHECK(v <= prev[i][0] + 1e-12);
        // the deep value is itself above the limit, so the gap is covered by the bound
        CHECK(v - deep.v0_blocks[i][0] >= -1e-12);
        CHECK(v - deep.v0_blocks[i][0] <= tv.error_bound + 1e-12);
      }
      prev = tv.v0_blocks;
    }
  }
}

TEST_CASE("window system verifies on truncated problems") {
  Rng rng(52);
  for (int trial = 0; trial < 12; ++trial) {
    const DiscountedMarkovGenerator gen(
        rstest::random_discounted(rng, rstest::risk_by_index(trial, rng), rstest::uniform_int(rng, 1, 3), 2));
    const WindowSolution w = infinite_rbsde_window(gen, 4);
    for (const CheckResult& c : w.report.checks) {
      CAPTURE(c.name);
      CAPTURE(c.where);
      CHECK(c.passed);
    }
    RbsdeTriple bad = w.triple;
    bad.Y[0][1] += 0.05;
    CHECK_FALSE(verify_solution(w.value.problem, bad, w.value.field.terminal, {1e-9, false}).passed());
  }
}

TEST_CASE("markov path tree") {
  const std::vector<std::vector<double>> tr{{0.5, 0.5, 0.0}, {0.0, 0.2, 0.8}, {1.0, 0.0, 0.0}};
  CHECK(markov_path_count(tr, 0, 0) == 1.0);
  CHECK(markov_path_count(tr, 0, 2) == 4.0);
  const MarkovTree t = markov_tree(tr, 0, 2);
  REQUIRE(t.space->size() == 4);
  CHECK(t.space->at(0).block_count() == 1);
  CHECK(t.space->at(1).block_count() == 2);
  CHECK(t.space->at(2).block_count() == 4);
  double total = 0.0;
  for (std::size_t k = 0; k < t.space->size(); ++k) {
    double p = 1.0;
    for (int s = 0; s < 2; ++s) {
      p *= tr[static_cast<std::size_t>(t.state[static_cast<std::size_t>(s)][k])]
             [static_cast<std::size_t>(t.state[static_cast<std::size_t>(s) + 1][k])];
    }
    CHECK(t.space->space().prob(k) == doctest::Approx(p).epsilon(1e-15));
    total += t.space->space().prob(k);
  }
  CHECK(total == doctest::Approx(1.0));
  CHECK(code_of([&] { (void)markov_tree({{0.5, 0.6}, {0.5, 0.5}}, 0, 1); }) == ErrorCode::NonNormalized);
}

TEST_CASE("truncation guard") {
  Rng rng(53);
  const DiscountedMarkovGenerator gen(rstest::random_discounted(rng, RiskSpec::linear(), 3, 2));
  CHECK(code_of([&] { (void)truncated_solve_at(gen, 8, 1000); }) == ErrorCode::TooLarge);
}

TEST_CASE("infinite-horizon stopping") {
  DiscountedStoppingParams p;
  p.alpha = 0.5;
  p.transition = {{1.0}};
  p.f_hat = {1.0};
  p.h_hat = {3.0};
  p.risk = RiskSpec::linear();
  // stopping at t costs 2 + 0.5^t, never stopping costs 2
  const TruncatedValue never = infinite_stopping(DiscountedMarkovStopping(p), 1e-6);
  CHECK(never.v0[0][0] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(never.v0[1][0] == 0.0);

  p.h_hat = {0.5};
  const TruncatedValue now = infinite_stopping_at(DiscountedMarkovStopping(p), 6);
  CHECK(now.v0[0][0] == doctest::Approx(0.5).epsilon(1e-12));

  Rng rng(54);
  for (int trial = 0; trial < 10; ++trial) {
    DiscountedStoppingParams q;
    q.alpha = rstest::uniform(rng, 0.3, 0.7);
    q.transition = {rstest::random_probs(rng, 2), rstest::random_probs(rng, 2)};
    q.f_hat = {rstest::uniform(rng, -1.0, 1.0), rstest::uniform(rng, -1.0, 1.0)};
    q.h_hat = {rstest::uniform(rng, -1.0, 2.0), rstest::uniform(rng, -1.0, 2.0)};
    q.risk = rstest::risk_by_index(trial, rng);
    const DiscountedMarkovStopping gen(q);
    const double deep = infinite_stopping_at(gen, 10).v0[0][0];
    double prev = 0.0;
    for (int h = 0; h <= 5; ++h) {
      const TruncatedValue tv = infinite_stopping_at(gen, h);
      const double v = tv.v0[0][0];
      if (h > 0) CHECK(v <= prev + 1e-12);
      CHECK(v - deep >= -1e-12);
      CHECK(v - deep <= tv.error_bound + 1e-12);
      prev = v;
    }
  }
}
