#pragma once

// Toy hydropower bidding problem solved by exact dynamic programming over a finite state space.
// Rewards: the solver maximises rho_t(reward + continuation) with the entropic certainty
// equivalent -(1/theta) log E[exp(-theta X)] (theta = 0 gives the expectation).
//
// Timing: at the decision epoch of day t the producer holds state (reservoir level, price state,
// recent rain states) and submits a bid for the L delivery periods of day t+1. Then the price
// state of day t+1 is drawn, rain evolves once per period, and the reservoir moves period by period.

#include <cstdint>
#include <functional>
#include <vector>

#include "riskswitch/riskmap.hpp"

namespace riskswitch {

struct BidLeg {
  double energy = 0.0;  // MWh offered in the period
  double price = 0.0;   // lowest acceptable price
};
using Bid = std::vector<BidLeg>;  // one leg per delivery period

struct HydroConfig {
  int T = 9;
  int L = 2;
  std::vector<Bid> bids;
  double m_min = 10.0;
  double m_max = 50.0;
  int grid_points = 41;
  double eta0 = 0.1;                                  // energy = eta0 * level * flow
  std::vector<std::vector<double>> price_levels;      // [price state][period], before the cap
  std::vector<std::vector<double>> price_transition;  // daily
  double price_cap = 4.0;
  std::vector<double> rain_values;                    // H per rain state
  std::vector<std::vector<double>> rain_intensity;    // generator matrix, per day
  int rain_lag = 2;                                   // periods of rain history driving inflow
  double inflow_scale = 3.0;
  double shortfall_price = 10.0;                      // balancing price for undelivered energy
  double water_value = 4.0;                           // per unit of water left after the last day
  double switch_cost = 0.1;                           // per MWh change of offered energy
  double theta = 0.0;
  double initial_level = 30.0;
  int initial_price_state = 1;
  int initial_bid = 0;

  // T = 9, L = 2, 25 bids (per period: no bid, 6 or 12 MWh at price 0 or 2), 41-point grid.
  static HydroConfig defaults();
  // Throws InvalidArgument.
  void validate() const;

  double grid_step() const { return (m_max - m_min) / (grid_points - 1); }
  double level(int idx) const { return m_min + idx * grid_step(); }
  int snap(double m) const;
  // exp(Q / L): rain transition over one delivery period.
  std::vector<std::vector<double>> rain_transition() const;
  // Inflow weights for lags 1..rain_lag, a discrete stand-in for the sine kernel over the lag window.
  std::vector<double> inflow_weights() const;
  double switching_cost(int from, int to) const;
};

struct HydroState {
  int level = 0;           // reservoir grid index
  int price = 0;           // price state of the current day
  std::vector<int> rain;   // last rain_lag rain states, oldest first
};

struct ReservoirStep {
  double next_level;  // on the grid
  double flow;
  double energy;      // produced
  bool accepted;
};

// One period: flow = min(accepted * E / (eta0 m), m - m_min), energy = eta0 m flow,
// next = snap(min(m - flow + inflow, m_max)).
ReservoirStep reservoir_step(const HydroConfig& cfg, double m, const BidLeg& leg, double price, double inflow);

struct DayNoise {
  double prob;
  int price;              // price state of the delivery day
  std::vector<int> rain;  // rain state in each delivery period
};

// Joint law of tomorrow's price state and the rain path, given today's state.
std::vector<DayNoise> day_noise(const HydroConfig& cfg, const HydroState& x);

struct DayResult {
  double reward;       // income - shortfall penalty - switching cost (+ water value on the last day)
  HydroState next;
  double production;
  double shortfall;
};

DayResult day_step(const HydroConfig& cfg, int t, const HydroState& x, int prev_bid, int bid, const DayNoise& w);

std::size_t hydro_state_count(const HydroConfig& cfg);
std::size_t hydro_state_index(const HydroConfig& cfg, const HydroState& x);
HydroState hydro_state(const HydroConfig& cfg, std::size_t index);
HydroState hydro_initial_state(const HydroConfig& cfg);

struct HydroSolution {
  HydroConfig config;
  std::vector<std::vector<std::vector<double>>> value;  // [t][previous bid][state]
  std::vector<std::vector<std::vector<int>>> policy;    // [t][previous bid][state]

  double initial_value() const;
};

// Exact backward recursion V_t^i(x) = max_j rho_t(reward_ij + V_{t+1}^j(x')), V_{T+1} = 0.
// Ties go to the lowest bid index. Throws TooLarge above `state_limit` states per time.
HydroSolution solve_hydro(const HydroConfig& cfg, double state_limit = 1e6);

using HydroPolicy = std::function<int(int t, int prev_bid, const HydroState& x)>;

struct HydroStats {
  std::size_t paths = 0;
  // Per decision epoch t = 0..T+1 (the last entry is after the final delivery day).
  std::vector<double> mean_level;
  std::vector<double> p05_level;
  std::vector<double> min_level;
  std::vector<double> max_level;
  // Per delivery day t = 0..T.
  std::vector<double> mean_production;
};

// Paths from the initial state; deterministic for a given seed and independent of thread count.
HydroStats simulate_policy(const HydroConfig& cfg, const HydroPolicy& policy, std::uint64_t seed, std::size_t paths);
HydroStats simulate_policy(const HydroSolution& sol, std::uint64_t seed, std::size_t paths);

}  // namespace riskswitch
