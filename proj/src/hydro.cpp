#include "riskswitch/hydro.hpp"

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "riskswitch/error.hpp"
#include "riskswitch/parallel.hpp"

namespace riskswitch {

HydroConfig HydroConfig::defaults() {
  HydroConfig cfg;
  const std::vector<BidLeg> legs{{0, 0}, {6, 0}, {6, 2}, {12, 0}, {12, 2}};
  for (const BidLeg& a : legs) {
    for (const BidLeg& b : legs) cfg.bids.push_back({a, b});
  }
  // Two periods of a day at the low and high end of the daily price profile.
  cfg.price_levels = {{1.0, 1.5}, {2.0, 3.0}, {3.0, 4.0}};
  cfg.price_transition = {{0.6, 0.3, 0.1}, {0.2, 0.6, 0.2}, {0.1, 0.3, 0.6}};
  cfg.rain_values = {0.0, 0.5, 1.0};
  cfg.rain_intensity = {{-1.0, 0.5, 0.5}, {1.0, -2.0, 1.0}, {2.0, 0.5, -2.5}};
  return cfg;
}

namespace {

void require_stochastic(const std::vector<std::vector<double>>& p, std::size_t n, const char* what) {
  RISKSWITCH_REQUIRE(p.size() == n, ErrorCode::InvalidArgument, std::string(what) + " has the wrong size");
  for (const auto& row : p) {
    RISKSWITCH_REQUIRE(row.size() == n, ErrorCode::InvalidArgument, std::string(what) + " is not square");
    double s = 0.0;
    for (double v : row) {
      RISKSWITCH_REQUIRE(v >= 0.0, ErrorCode::InvalidArgument, std::string(what) + " has a negative entry");
      s += v;
    }
    RISKSWITCH_REQUIRE(std::abs(s - 1.0) <= 1e-12, ErrorCode::NonNormalized,
                       std::string(what) + " row does not sum to 1");
  }
}

}  // namespace

void HydroConfig::validate() const {
  RISKSWITCH_REQUIRE(T >= 0 && L >= 1, ErrorCode::InvalidArgument, "need T >= 0 and L >= 1");
  RISKSWITCH_REQUIRE(!bids.empty(), ErrorCode::InvalidArgument, "no bids");
  for (const Bid& b : bids) {
    RISKSWITCH_REQUIRE(b.size() == static_cast<std::size_t>(L), ErrorCode::InvalidArgument,
                       "every bid needs one leg per period");
    for (const BidLeg& leg : b) {
      RISKSWITCH_REQUIRE(leg.energy >= 0.0, ErrorCode::InvalidArgument, "negative bid energy");
    }
  }
  RISKSWITCH_REQUIRE(m_min > 0.0 && m_max > m_min && grid_points >= 2, ErrorCode::InvalidArgument,
                     "need 0 < m_min < m_max and at least two grid points");
  RISKSWITCH_REQUIRE(eta0 > 0.0, ErrorCode::InvalidArgument, "eta0 must be positive");
  RISKSWITCH_REQUIRE(!price_levels.empty(), ErrorCode::InvalidArgument, "no price states");
  for (const auto& row : price_levels) {
    RISKSWITCH_REQUIRE(row.size() == static_cast<std::size_t>(L), ErrorCode::InvalidArgument,
                       "price levels need one entry per period");
  }
  require_stochastic(price_transition, price_levels.size(), "price transition");
  RISKSWITCH_REQUIRE(!rain_values.empty(), ErrorCode::InvalidArgument, "no rain states");
  RISKSWITCH_REQUIRE(rain_intensity.size() == rain_values.size(), ErrorCode::InvalidArgument,
                     "rain intensity has the wrong size");
  for (std::size_t a = 0; a < rain_intensity.size(); ++a) {
    RISKSWITCH_REQUIRE(rain_intensity[a].size() == rain_values.size(), ErrorCode::InvalidArgument,
                       "rain intensity is not square");
    double s = 0.0;
    for (std::size_t b = 0; b < rain_values.size(); ++b) {
      if (a != b) {
        RISKSWITCH_REQUIRE(rain_intensity[a][b] >= 0.0, ErrorCode::InvalidArgument,
                           "negative off-diagonal rain intensity");
      }
      s += rain_intensity[a][b];
    }
    RISKSWITCH_REQUIRE(std::abs(s) <= 1e-12, ErrorCode::InvalidArgument, "rain intensity rows must sum to 0");
  }
  RISKSWITCH_REQUIRE(rain_lag >= 1, ErrorCode::InvalidArgument, "rain lag must be at least 1");
  RISKSWITCH_REQUIRE(inflow_scale >= 0.0 && shortfall_price >= 0.0 && switch_cost >= 0.0 && water_value >= 0.0,
                     ErrorCode::InvalidArgument, "negative price parameter");
  RISKSWITCH_REQUIRE(std::isfinite(theta) && theta >= 0.0, ErrorCode::InvalidArgument, "theta must be >= 0");
  RISKSWITCH_REQUIRE(initial_level >= m_min && initial_level <= m_max, ErrorCode::InvalidArgument,
                     "initial level outside the grid");
  RISKSWITCH_REQUIRE(initial_price_state >= 0 && initial_price_state < static_cast<int>(price_levels.size()),
                     ErrorCode::InvalidArgument, "initial price state out of range");
  RISKSWITCH_REQUIRE(initial_bid >= 0 && initial_bid < static_cast<int>(bids.size()), ErrorCode::InvalidArgument,
                     "initial bid out of range");
}

int HydroConfig::snap(double m) const {
  const double pos = std::round((m - m_min) / grid_step());
  return static_cast<int>(std::clamp(pos, 0.0, static_cast<double>(grid_points - 1)));
}

std::vector<std::vector<double>> HydroConfig::rain_transition() const {
  const auto n = static_cast<Eigen::Index>(rain_values.size());
  Eigen::MatrixXd q(n, n);
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = 0; b < n; ++b) {
      q(a, b) = rain_intensity[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] / L;
    }
  }
  const Eigen::MatrixXd p = q.exp();
  std::vector<std::vector<double>> out(static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(n)));
  for (Eigen::Index a = 0; a < n; ++a) {
    double s = 0.0;
    for (Eigen::Index b = 0; b < n; ++b) s += std::max(p(a, b), 0.0);
    for (Eigen::Index b = 0; b < n; ++b) {
      out[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = std::max(p(a, b), 0.0) / s;
    }
  }
  return out;
}

std::vector<double> HydroConfig::inflow_weights() const {
  // Midpoint values of sin(pi s / lag) on the lag window, normalised to sum to 1.
  std::vector<double> w(static_cast<std::size_t>(rain_lag));
  double s = 0.0;
  for (int a = 0; a < rain_lag; ++a) {
    w[static_cast<std::size_t>(a)] = std::sin(std::numbers::pi * (a + 0.5) / rain_lag);
    s += w[static_cast<std::size_t>(a)];
  }
  for (double& v : w) v /= s;
  return w;
}

double HydroConfig::switching_cost(int from, int to) const {
  const Bid& a = bids[static_cast<std::size_t>(from)];
  const Bid& b = bids[static_cast<std::size_t>(to)];
  double d = 0.0;
  for (std::size_t l = 0; l < a.size(); ++l) d += std::abs(a[l].energy - b[l].energy);
  return switch_cost * d;
}

ReservoirStep reservoir_step(const HydroConfig& cfg, double m, const BidLeg& leg, double price, double inflow) {
  ReservoirStep out{};
  out.accepted = leg.energy > 0.0 && price >= leg.price;
  const double wanted = out.accepted ? leg.energy / (cfg.eta0 * m) : 0.0;
  out.flow = std::min(wanted, std::max(m - cfg.m_min, 0.0));
  out.energy = cfg.eta0 * m * out.flow;
  out.next_level = cfg.level(cfg.snap(std::min(m - out.flow + inflow, cfg.m_max)));
  return out;
}

std::vector<DayNoise> day_noise(const HydroConfig& cfg, const HydroState& x) {
  const auto rain = cfg.rain_transition();
  const std::size_t nr = cfg.rain_values.size();
  std::vector<std::pair<double, std::vector<int>>> paths{{1.0, {}}};
  for (int l = 0; l < cfg.L; ++l) {
    std::vector<std::pair<double, std::vector<int>>> next;
    for (const auto& [pr, path] : paths) {
      const int last = path.empty() ? x.rain.back() : path.back();
      for (std::size_t b = 0; b < nr; ++b) {
        const double q = rain[static_cast<std::size_t>(last)][b];
        if (q <= 0.0) continue;
        auto ext = path;
        ext.push_back(static_cast<int>(b));
        next.emplace_back(pr * q, std::move(ext));
      }
    }
    paths = std::move(next);
  }
  std::vector<DayNoise> out;
  const auto& prow = cfg.price_transition[static_cast<std::size_t>(x.price)];
  for (std::size_t p = 0; p < prow.size(); ++p) {
    if (prow[p] <= 0.0) continue;
    for (const auto& [pr, path] : paths) out.push_back({prow[p] * pr, static_cast<int>(p), path});
  }
  return out;
}

DayResult day_step(const HydroConfig& cfg, int t, const HydroState& x, int prev_bid, int bid, const DayNoise& w) {
  const Bid& b = cfg.bids[static_cast<std::size_t>(bid)];
  const auto weights = cfg.inflow_weights();
  // history = stored window followed by the rain of the delivery day
  std::vector<int> history = x.rain;
  history.insert(history.end(), w.rain.begin(), w.rain.end());
  const std::size_t lag = weights.size();

  DayResult out{};
  out.reward = -cfg.switching_cost(prev_bid, bid);
  double m = cfg.level(x.level);
  for (int l = 0; l < cfg.L; ++l) {
    const auto ll = static_cast<std::size_t>(l);
    double h = 0.0;
    for (std::size_t a = 1; a <= lag; ++a) {
      h += weights[a - 1] * cfg.rain_values[static_cast<std::size_t>(history[lag + ll - a])];
    }
    const double price = std::min(cfg.price_levels[static_cast<std::size_t>(w.price)][ll], cfg.price_cap);
    const ReservoirStep st = reservoir_step(cfg, m, b[ll], price, cfg.inflow_scale * h);
    if (st.accepted) {
      const double missing = b[ll].energy - st.energy;
      out.reward += price * b[ll].energy - cfg.shortfall_price * missing;
      out.shortfall += missing;
    }
    out.production += st.energy;
    m = st.next_level;
  }
  out.next.level = cfg.snap(m);
  out.next.price = w.price;
  out.next.rain.assign(history.end() - static_cast<std::ptrdiff_t>(lag), history.end());
  if (t == cfg.T) out.reward += cfg.water_value * m;
  return out;
}

std::size_t hydro_state_count(const HydroConfig& cfg) {
  std::size_t n = static_cast<std::size_t>(cfg.grid_points) * cfg.price_levels.size();
  for (int a = 0; a < cfg.rain_lag; ++a) n *= cfg.rain_values.size();
  return n;
}

std::size_t hydro_state_index(const HydroConfig& cfg, const HydroState& x) {
  std::size_t code = 0;
  for (int r : x.rain) code = code * cfg.rain_values.size() + static_cast<std::size_t>(r);
  std::size_t rain_states = 1;
  for (int a = 0; a < cfg.rain_lag; ++a) rain_states *= cfg.rain_values.size();
  return (static_cast<std::size_t>(x.level) * cfg.price_levels.size() + static_cast<std::size_t>(x.price)) *
             rain_states +
         code;
}

HydroState hydro_state(const HydroConfig& cfg, std::size_t index) {
  HydroState x;
  const std::size_t nr = cfg.rain_values.size();
  x.rain.assign(static_cast<std::size_t>(cfg.rain_lag), 0);
  for (int a = cfg.rain_lag; a-- > 0;) {
    x.rain[static_cast<std::size_t>(a)] = static_cast<int>(index % nr);
    index /= nr;
  }
  x.price = static_cast<int>(index % cfg.price_levels.size());
  x.level = static_cast<int>(index / cfg.price_levels.size());
  return x;
}

HydroState hydro_initial_state(const HydroConfig& cfg) {
  HydroState x;
  x.level = cfg.snap(cfg.initial_level);
  x.price = cfg.initial_price_state;
  x.rain.assign(static_cast<std::size_t>(cfg.rain_lag), 0);
  return x;
}

double HydroSolution::initial_value() const {
  return value.front()[static_cast<std::size_t>(config.initial_bid)]
              [hydro_state_index(config, hydro_initial_state(config))];
}

HydroSolution solve_hydro(const HydroConfig& cfg, double state_limit) {
  cfg.validate();
  const std::size_t states = hydro_state_count(cfg);
  const std::size_t nb = cfg.bids.size();
  RISKSWITCH_REQUIRE(static_cast<double>(states) * static_cast<double>(nb) <= state_limit, ErrorCode::TooLarge,
                     "hydro state space has " + std::to_string(states) + " states times " + std::to_string(nb) +
                         " bids");
  const RiskSpec risk = cfg.theta == 0.0 ? RiskSpec::linear() : RiskSpec::entropic(cfg.theta);
  const auto steps = static_cast<std::size_t>(cfg.T + 1);

  HydroSolution sol;
  sol.config = cfg;
  sol.value.assign(steps, std::vector<std::vector<double>>(nb, std::vector<double>(states, 0.0)));
  sol.policy.assign(steps, std::vector<std::vector<int>>(nb, std::vector<int>(states, 0)));

  // Switching costs are deterministic, so rho(reward_ij + V) = rho(reward_jj + V) - c_ij.
  std::vector<std::vector<double>> cost(nb, std::vector<double>(nb));
  for (std::size_t i = 0; i < nb; ++i) {
    for (std::size_t j = 0; j < nb; ++j) cost[i][j] = cfg.switching_cost(static_cast<int>(i), static_cast<int>(j));
  }

  for (int t = cfg.T; t >= 0; --t) {
    const auto tt = static_cast<std::size_t>(t);
    const std::vector<std::vector<double>>* next = t < cfg.T ? &sol.value[tt + 1] : nullptr;
    parallel_for(states, [&](std::size_t s) {
      const HydroState x = hydro_state(cfg, s);
      const auto noise = day_noise(cfg, x);
      std::vector<double> weights;
      weights.reserve(noise.size());
      for (const DayNoise& w : noise) weights.push_back(w.prob);
      std::vector<double> q(nb);
      std::vector<double> outcome(noise.size());
      for (std::size_t j = 0; j < nb; ++j) {
        for (std::size_t k = 0; k < noise.size(); ++k) {
          const DayResult r = day_step(cfg, t, x, static_cast<int>(j), static_cast<int>(j), noise[k]);
          outcome[k] = r.reward + (next ? (*next)[j][hydro_state_index(cfg, r.next)] : 0.0);
        }
        q[j] = evaluate_static(risk, outcome, weights);
      }
      for (std::size_t i = 0; i < nb; ++i) {
        std::size_t best = 0;
        double best_v = q[0] - cost[i][0];
        for (std::size_t j = 1; j < nb; ++j) {
          const double v = q[j] - cost[i][j];
          if (v > best_v) {
            best_v = v;
            best = j;
          }
        }
        sol.value[tt][i][s] = best_v;
        sol.policy[tt][i][s] = static_cast<int>(best);
      }
    });
  }
  return sol;
}

namespace {

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

int draw(std::mt19937_64& rng, const std::vector<double>& probs) {
  const double u = uniform01(rng);
  double acc = 0.0;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    acc += probs[k];
    if (u < acc) return static_cast<int>(k);
  }
  for (std::size_t k = probs.size(); k-- > 0;) {
    if (probs[k] > 0.0) return static_cast<int>(k);
  }
  return 0;
}

double quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const auto idx = static_cast<std::size_t>(std::ceil(q * static_cast<double>(v.size())));
  return v[std::min(v.size() - 1, idx == 0 ? 0 : idx - 1)];
}

}  // namespace

HydroStats simulate_policy(const HydroConfig& cfg, const HydroPolicy& policy, std::uint64_t seed,
                           std::size_t paths) {
  cfg.validate();
  RISKSWITCH_REQUIRE(paths > 0, ErrorCode::InvalidArgument, "need at least one path");
  const auto rain = cfg.rain_transition();
  const auto days = static_cast<std::size_t>(cfg.T + 1);
  std::vector<std::vector<double>> level(paths, std::vector<double>(days + 1));
  std::vector<std::vector<double>> prod(paths, std::vector<double>(days));

  parallel_for(paths, [&](std::size_t n) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(n), static_cast<std::uint32_t>(n >> 32)};
    std::mt19937_64 rng(seq);
    HydroState x = hydro_initial_state(cfg);
    int prev = cfg.initial_bid;
    for (int t = 0; t <= cfg.T; ++t) {
      const auto tt = static_cast<std::size_t>(t);
      level[n][tt] = cfg.level(x.level);
      const int bid = policy(t, prev, x);
      RISKSWITCH_REQUIRE(bid >= 0 && bid < static_cast<int>(cfg.bids.size()), ErrorCode::InvalidArgument,
                         "policy returned an unknown bid");
      DayNoise w{1.0, draw(rng, cfg.price_transition[static_cast<std::size_t>(x.price)]), {}};
      int last = x.rain.back();
      for (int l = 0; l < cfg.L; ++l) {
        last = draw(rng, rain[static_cast<std::size_t>(last)]);
        w.rain.push_back(last);
      }
      const DayResult r = day_step(cfg, t, x, prev, bid, w);
      prod[n][tt] = r.production;
      x = r.next;
      prev = bid;
    }
    level[n][days] = cfg.level(x.level);
  });

  HydroStats out;
  out.paths = paths;
  for (std::size_t t = 0; t <= days; ++t) {
    std::vector<double> col(paths);
    double s = 0.0;
    for (std::size_t n = 0; n < paths; ++n) {
      col[n] = level[n][t];
      s += col[n];
    }
    out.mean_level.push_back(s / static_cast<double>(paths));
    out.p05_level.push_back(quantile(col, 0.05));
    out.min_level.push_back(*std::min_element(col.begin(), col.end()));
    out.max_level.push_back(*std::max_element(col.begin(), col.end()));
  }
  for (std::size_t t = 0; t < days; ++t) {
    double s = 0.0;
    for (std::size_t n = 0; n < paths; ++n) s += prod[n][t];
    out.mean_production.push_back(s / static_cast<double>(paths));
  }
  return out;
}

HydroStats simulate_policy(const HydroSolution& sol, std::uint64_t seed, std::size_t paths) {
  const HydroConfig& cfg = sol.config;
  return simulate_policy(
      cfg,
      [&](int t, int prev, const HydroState& x) {
        return sol.policy[static_cast<std::size_t>(t)][static_cast<std::size_t>(prev)][hydro_state_index(cfg, x)];
      },
      seed, paths);
}

}  // namespace riskswitch
