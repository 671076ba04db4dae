#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "riskswitch/hydro.hpp"
#include "riskswitch/parallel.hpp"

using namespace riskswitch;

namespace {

HydroConfig small_config() {
  HydroConfig cfg = HydroConfig::defaults();
  cfg.T = 3;
  cfg.grid_points = 11;
  return cfg;
}

// Plain backward induction over (bid, state) written without the cost shift of the solver:
// V_t^i(x) = max_j CE_theta[reward(i -> j) + V_{t+1}^j(x')].
std::vector<std::vector<std::vector<double>>> reference_dp(const HydroConfig& cfg) {
  const std::size_t states = hydro_state_count(cfg);
  const std::size_t nb = cfg.bids.size();
  std::vector<std::vector<std::vector<double>>> v(static_cast<std::size_t>(cfg.T + 2),
                                                  std::vector<std::vector<double>>(nb, std::vector<double>(states, 0.0)));
  for (int t = cfg.T; t >= 0; --t) {
    const auto tt = static_cast<std::size_t>(t);
    for (std::size_t s = 0; s < states; ++s) {
      const HydroState x = hydro_state(cfg, s);
      const auto noise = day_noise(cfg, x);
      for (std::size_t i = 0; i < nb; ++i) {
        double best = -INFINITY;
        for (std::size_t j = 0; j < nb; ++j) {
          double acc = 0.0;
          for (const DayNoise& w : noise) {
            const DayResult r = day_step(cfg, t, x, static_cast<int>(i), static_cast<int>(j), w);
            const double y = r.reward + v[tt + 1][j][hydro_state_index(cfg, r.next)];
            acc += cfg.theta == 0.0 ? w.prob * y : w.prob * std::exp(-cfg.theta * y);
          }
          const double q = cfg.theta == 0.0 ? acc : -std::log(acc) / cfg.theta;
          best = std::max(best, q);
        }
        v[tt][i][s] = best;
      }
    }
  }
  v.pop_back();
  return v;
}

int find_bid(const HydroConfig& cfg, double energy, double price) {
  for (std::size_t b = 0; b < cfg.bids.size(); ++b) {
    bool match = true;
    for (const BidLeg& leg : cfg.bids[b]) match = match && leg.energy == energy && leg.price == price;
    if (match) return static_cast<int>(b);
  }
  FAIL("bid not found");
  return -1;
}

double max_diff(const std::vector<std::vector<std::vector<double>>>& a,
                const std::vector<std::vector<std::vector<double>>>& b) {
  double d = 0.0;
  for (std::size_t t = 0; t < a.size(); ++t) {
    for (std::size_t i = 0; i < a[t].size(); ++i) {
      for (std::size_t s = 0; s < a[t][i].size(); ++s) d = std::max(d, std::abs(a[t][i][s] - b[t][i][s]));
    }
  }
  return d;
}

}  // namespace

TEST_CASE("default configuration") {
  const HydroConfig cfg = HydroConfig::defaults();
  CHECK_NOTHROW(cfg.validate());
  CHECK(cfg.T == 9);
  CHECK(cfg.L == 2);
  CHECK(cfg.grid_points == 41);
  CHECK(cfg.bids.size() == 25);
  CHECK(cfg.grid_step() == doctest::Approx(1.0));
  CHECK(hydro_state_count(cfg) == 41u * 3u * 9u);
  const auto w = cfg.inflow_weights();
  double s = 0.0;
  for (double x : w) s += x;
  CHECK(s == doctest::Approx(1.0).epsilon(1e-14));
  for (const auto& row : cfg.rain_transition()) {
    double r = 0.0;
    for (double x : row) {
      CHECK(x >= 0.0);
      r += x;
    }
    CHECK(r == doctest::Approx(1.0).epsilon(1e-14));
  }
  CHECK(cfg.switching_cost(3, 3) == 0.0);
  CHECK(cfg.switching_cost(0, find_bid(cfg, 12.0, 0.0)) == doctest::Approx(0.1 * 24.0));
}

TEST_CASE("state indexing round trip") {
  const HydroConfig cfg = small_config();
  for (std::size_t s = 0; s < hydro_state_count(cfg); ++s) CHECK(hydro_state_index(cfg, hydro_state(cfg, s)) == s);
  const HydroState x0 = hydro_initial_state(cfg);
  CHECK(cfg.level(x0.level) == doctest::Approx(30.0));
  CHECK(x0.price == 1);
}

TEST_CASE("day noise is a probability law") {
  const HydroConfig cfg = small_config();
  for (std::size_t s = 0; s < hydro_state_count(cfg); s += 7) {
    const auto noise = day_noise(cfg, hydro_state(cfg, s));
    CHECK(noise.size() == 27u);
    double total = 0.0;
    for (const DayNoise& w : noise) {
      CHECK(w.prob >= 0.0);
      CHECK(w.rain.size() == static_cast<std::size_t>(cfg.L));
      total += w.prob;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-13));
  }
}

TEST_CASE("reservoir step") {
  const HydroConfig cfg = HydroConfig::defaults();
  // 6 MWh at level 30 needs flow 6 / (0.1 * 30) = 2
  const ReservoirStep a = reservoir_step(cfg, 30.0, {6.0, 0.0}, 2.0, 0.0);
  CHECK(a.accepted);
  CHECK(a.flow == doctest::Approx(2.0));
  CHECK(a.energy == doctest::Approx(6.0));
  CHECK(a.next_level == doctest::Approx(28.0));
  // rejected bid: price below the limit
  const ReservoirStep b = reservoir_step(cfg, 30.0, {6.0, 2.0}, 1.5, 0.0);
  CHECK_FALSE(b.accepted);
  CHECK(b.flow == 0.0);
  CHECK(b.next_level == doctest::Approx(30.0));
  // near the minimum the flow is capped and production falls short
  const ReservoirStep c = reservoir_step(cfg, 11.0, {12.0, 0.0}, 2.0, 0.0);
  CHECK(c.flow == doctest::Approx(1.0));
  CHECK(c.energy < 12.0);
  CHECK(c.next_level == doctest::Approx(10.0));
  // spill at the top
  const ReservoirStep d = reservoir_step(cfg, 50.0, {0.0, 0.0}, 2.0, 5.0);
  CHECK(d.next_level == doctest::Approx(50.0));
}

TEST_CASE("expectation solver matches the reference recursion") {
  const HydroConfig cfg = small_config();
  const HydroSolution sol = solve_hydro(cfg);
  CHECK(max_diff(sol.value, reference_dp(cfg)) < 1e-10);
}

TEST_CASE("entropic solver matches the reference recursion") {
  HydroConfig cfg = small_config();
  cfg.T = 2;
  cfg.theta = 0.05;
  const HydroSolution sol = solve_hydro(cfg);
  CHECK(max_diff(sol.value, reference_dp(cfg)) < 1e-9);
}

TEST_CASE("values are nonincreasing in the risk aversion") {
  HydroConfig cfg = small_config();
  std::vector<HydroSolution> sols;
  for (double theta : {0.0, 0.01, 0.02, 0.1}) {
    cfg.theta = theta;
    sols.push_back(solve_hydro(cfg));
  }
  for (std::size_t k = 1; k < sols.size(); ++k) {
    const auto& a = sols[k - 1].value;
    const auto& b = sols[k].value;
    for (std::size_t t = 0; t < a.size(); ++t) {
      for (std::size_t i = 0; i < a[t].size(); ++i) {
        for (std::size_t s = 0; s < a[t][i].size(); ++s) CHECK(b[t][i][s] <= a[t][i][s] + 1e-9);
      }
    }
  }
}

TEST_CASE("simulated reservoir levels stay within bounds") {
  HydroConfig cfg = small_config();
  cfg.theta = 0.02;
  const HydroSolution sol = solve_hydro(cfg);
  const HydroStats st = simulate_policy(sol, 7, 2000);
  REQUIRE(st.min_level.size() == static_cast<std::size_t>(cfg.T + 2));
  REQUIRE(st.mean_production.size() == static_cast<std::size_t>(cfg.T + 1));
  for (std::size_t t = 0; t < st.min_level.size(); ++t) {
    CHECK(st.min_level[t] >= cfg.m_min);
    CHECK(st.max_level[t] <= cfg.m_max);
    CHECK(st.p05_level[t] >= st.min_level[t]);
    CHECK(st.mean_level[t] <= st.max_level[t]);
  }
  CHECK(st.mean_level[0] == doctest::Approx(30.0));
}

TEST_CASE("no inflow and no bid keeps the reservoir constant") {
  HydroConfig cfg = small_config();
  cfg.rain_values = {0.0, 0.0, 0.0};
  const HydroStats st = simulate_policy(cfg, [](int, int, const HydroState&) { return 0; }, 3, 200);
  for (std::size_t t = 0; t < st.min_level.size(); ++t) {
    CHECK(st.min_level[t] == doctest::Approx(30.0));
    CHECK(st.max_level[t] == doctest::Approx(30.0));
  }
  for (double p : st.mean_production) CHECK(p == 0.0);
}

TEST_CASE("always bidding the maximum drains the reservoir") {
  HydroConfig cfg = small_config();
  cfg.T = 6;
  cfg.rain_values = {0.0, 0.0, 0.0};
  const int full = find_bid(cfg, 12.0, 0.0);
  const HydroStats st = simulate_policy(cfg, [full](int, int, const HydroState&) { return full; }, 5, 100);
  for (std::size_t t = 1; t < st.max_level.size(); ++t) {
    CHECK(st.max_level[t] <= st.max_level[t - 1]);
    if (st.max_level[t - 1] > cfg.m_min) CHECK(st.max_level[t] < st.max_level[t - 1]);
  }
  CHECK(st.max_level.back() == doctest::Approx(cfg.m_min));
}

TEST_CASE("simulation is reproducible and independent of the worker count") {
  const HydroConfig cfg = small_config();
  set_thread_count(1);
  const HydroSolution a = solve_hydro(cfg);
  const HydroStats sa = simulate_policy(a, 11, 500);
  set_thread_count(3);
  const HydroSolution b = solve_hydro(cfg);
  const HydroStats sb = simulate_policy(b, 11, 500);
  set_thread_count(0);
  CHECK(a.value == b.value);
  CHECK(a.policy == b.policy);
  CHECK(sa.mean_level == sb.mean_level);
  CHECK(sa.p05_level == sb.p05_level);
  CHECK(sa.mean_production == sb.mean_production);
  const HydroStats sc = simulate_policy(a, 12, 500);
  CHECK(sc.mean_level != sa.mean_level);
}

TEST_CASE("configuration errors") {
  HydroConfig cfg = small_config();
  cfg.grid_points = 1;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = small_config();
  cfg.price_transition[0] = {0.5, 0.5, 0.5};
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = small_config();
  cfg.bids[1].pop_back();
  CHECK_THROWS_AS(cfg.validate(), Error);
  try {
    (void)solve_hydro(small_config(), 100.0);
    FAIL("expected TooLarge");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::TooLarge);
  }
}
