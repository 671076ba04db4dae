#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

namespace rstest {

double oracle_static(const RiskSpec& r, const std::vector<double>& x, const std::vector<double>& w) {
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  switch (r.kind) {
    case RiskKind::Linear: {
      double s = 0.0;
      for (std::size_t k = 0; k < x.size(); ++k) s += w[k] * x[k];
      return s / total;
    }
    case RiskKind::Entropic: {
      double s = 0.0;
      for (std::size_t k = 0; k < x.size(); ++k) s += w[k] / total * std::exp(-r.theta * x[k]);
      return -std::log(s) / r.theta;
    }
    case RiskKind::WorstCase: return *std::max_element(x.begin(), x.end());
    case RiskKind::CVaR: {
      std::vector<std::size_t> idx(x.size());
      std::iota(idx.begin(), idx.end(), std::size_t{0});
      std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return x[a] > x[b]; });
      double mass = r.alpha * total;
      double acc = 0.0;
      for (std::size_t k : idx) {
        const double take = std::min(w[k], mass);
        acc += take * x[k];
        mass -= take;
        if (mass <= 0.0) break;
      }
      return acc / (r.alpha * total);
    }
  }
  return 0.0;
}

RandomVariable oracle_rho(const RiskSpec& r, const FilteredSpace& space, int t, const RandomVariable& x) {
  RandomVariable out(x.size(), 0.0);
  for (const auto& b : space.at(t).blocks()) {
    std::vector<double> xs;
    std::vector<double> ws;
    for (std::size_t k : b) {
      xs.push_back(x[k]);
      ws.push_back(space.space().prob(k));
    }
    const double v = oracle_static(r, xs, ws);
    for (std::size_t k : b) out[k] = v;
  }
  return out;
}

RandomVariable oracle_nested(const RiskSpec& r, const FilteredSpace& space, int s, int t,
                             const std::vector<RandomVariable>& w) {
  RandomVariable acc = oracle_rho(r, space, t, w[static_cast<std::size_t>(t - s)]);
  for (int u = t - 1; u >= s; --u) acc = oracle_rho(r, space, u, w[static_cast<std::size_t>(u - s)] + acc);
  return acc;
}

RandomVariable oracle_stopped(const RiskSpec& r, const FilteredSpace& space, const StoppingTime& from,
                              const StoppingTime& to, const std::vector<RandomVariable>& f,
                              const std::vector<RandomVariable>& w) {
  const std::size_t n = space.size();
  const int T = space.horizon();
  // rho_tau(W_tau), held constant after tau.
  RandomVariable stopped(n, 0.0);
  for (int t = 0; t <= T; ++t) {
    const RandomVariable r_t = oracle_rho(r, space, t, w[static_cast<std::size_t>(t)]);
    for (std::size_t k = 0; k < n; ++k) {
      if (to[k] == t) stopped[k] = r_t[k];
    }
  }
  std::vector<RandomVariable> z(static_cast<std::size_t>(T + 1));
  z[static_cast<std::size_t>(T)] = stopped;
  for (int t = T - 1; t >= 0; --t) {
    const RandomVariable cont = oracle_rho(r, space, t, f[static_cast<std::size_t>(t)] + z[static_cast<std::size_t>(t + 1)]);
    RandomVariable zt(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) zt[k] = to[k] <= t ? stopped[k] : cont[k];
    z[static_cast<std::size_t>(t)] = zt;
  }
  RandomVariable out(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    if (from[k] <= to[k]) out[k] = z[static_cast<std::size_t>(from[k])][k];
  }
  return out;
}

std::vector<StoppingTime> enumerate_stopping_times(const Filtration& g, int lo) {
  const int T = g.horizon();
  std::vector<StoppingTime> out;
  StoppingTime tau(g.outcome_count(), -1);
  // Walk the (t, block) pairs in order; an unstopped block either stops now or waits.
  std::vector<std::pair<int, std::size_t>> slots;
  for (int t = lo; t <= T; ++t) {
    for (std::size_t b = 0; b < g.at(t).block_count(); ++b) slots.emplace_back(t, b);
  }
  std::function<void(std::size_t)> rec = [&](std::size_t idx) {
    if (idx == slots.size()) {
      out.push_back(tau);
      return;
    }
    const auto [t, b] = slots[idx];
    const auto& block = g.at(t).block(b);
    if (tau[block.front()] >= 0) {
      rec(idx + 1);
      return;
    }
    for (std::size_t k : block) tau[k] = t;
    rec(idx + 1);
    for (std::size_t k : block) tau[k] = -1;
    if (t < T) rec(idx + 1);
  };
  rec(0);
  return out;
}

RandomVariable oracle_stopping_value(const StoppingProblem& sp, int t) {
  const std::size_t n = sp.size();
  RandomVariable best(n, INFINITY);
  const StoppingTime from(n, t);
  for (const StoppingTime& tau : enumerate_stopping_times(sp.space->filtration(), t)) {
    const RandomVariable v = oracle_stopped(sp.risk, *sp.space, from, tau, sp.f, sp.h);
    for (std::size_t k = 0; k < n; ++k) best[k] = std::min(best[k], v[k]);
  }
  return best;
}

std::vector<Strategy> enumerate_strategies(const SwitchingProblem& p, int t, Mode i) {
  const Filtration& g = p.space->filtration();
  const int T = p.horizon();
  const std::size_t n = p.size();
  Strategy cur;
  cur.start = t;
  cur.initial = i;
  cur.modes.assign(static_cast<std::size_t>(T - t + 1), std::vector<Mode>(n, -1));
  std::vector<std::pair<int, std::size_t>> slots;
  for (int s = t; s <= T; ++s) {
    for (std::size_t b = 0; b < g.at(s).block_count(); ++b) slots.emplace_back(s, b);
  }
  std::vector<Strategy> out;
  std::function<void(std::size_t)> rec = [&](std::size_t idx) {
    if (idx == slots.size()) {
      out.push_back(cur);
      return;
    }
    const auto [s, b] = slots[idx];
    const auto& block = g.at(s).block(b);
    const Mode prev = s == t ? i : cur.modes[static_cast<std::size_t>(s - t - 1)][block.front()];
    for (Mode j = 0; j < p.m; ++j) {
      if (!p.is_allowed(prev, j)) continue;
      for (std::size_t k : block) cur.modes[static_cast<std::size_t>(s - t)][k] = j;
      rec(idx + 1);
    }
  };
  rec(0);
  return out;
}

RandomVariable oracle_strategy_cost(const SwitchingProblem& p, const Strategy& xi) {
  const std::size_t n = p.size();
  std::vector<RandomVariable> w;
  for (int s = xi.start; s <= p.horizon(); ++s) {
    RandomVariable ws(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
      const Mode prev = s == xi.start ? xi.initial : xi.modes[static_cast<std::size_t>(s - xi.start - 1)][k];
      const Mode now = xi.modes[static_cast<std::size_t>(s - xi.start)][k];
      const auto ss = static_cast<std::size_t>(s);
      ws[k] = p.g[static_cast<std::size_t>(now)][ss][k] +
              p.c[static_cast<std::size_t>(prev)][static_cast<std::size_t>(now)][ss][k];
    }
    w.push_back(ws);
  }
  return oracle_nested(p.risk, *p.space, xi.start, p.horizon(), w);
}

RandomVariable oracle_switching_value(const SwitchingProblem& p, int t, Mode i) {
  RandomVariable best(p.size(), INFINITY);
  for (const Strategy& xi : enumerate_strategies(p, t, i)) {
    const RandomVariable v = oracle_strategy_cost(p, xi);
    for (std::size_t k = 0; k < p.size(); ++k) best[k] = std::min(best[k], v[k]);
  }
  return best;
}

}  // namespace rstest
