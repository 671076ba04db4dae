#include "riskswitch/switching.hpp"

#include <algorithm>
#include <functional>

#include "riskswitch/parallel.hpp"

namespace riskswitch {

namespace {

void require_rv(const RandomVariable& x, std::size_t n, const std::string& what) {
  RISKSWITCH_REQUIRE(x.size() == n, ErrorCode::InvalidArgument, what + " has the wrong number of outcomes");
  RISKSWITCH_REQUIRE(x.is_finite(), ErrorCode::InvalidArgument, what + " is not finite");
}

std::string label(const char* name, std::initializer_list<std::size_t> idx) {
  std::string s = name;
  for (std::size_t k : idx) s += "[" + std::to_string(k) + "]";
  return s;
}

}  // namespace

void SwitchingProblem::validate() const {
  RISKSWITCH_REQUIRE(space != nullptr, ErrorCode::InvalidArgument, "problem has no space");
  risk.validate();
  RISKSWITCH_REQUIRE(m >= 1, ErrorCode::InvalidArgument, "need at least one mode");
  const auto modes = static_cast<std::size_t>(m);
  const auto steps = static_cast<std::size_t>(horizon() + 1);
  const std::size_t n = size();
  RISKSWITCH_REQUIRE(g.size() == modes, ErrorCode::InvalidArgument, "g must have one row per mode");
  RISKSWITCH_REQUIRE(c.size() == modes, ErrorCode::InvalidArgument, "c must have one row per mode");
  for (std::size_t i = 0; i < modes; ++i) {
    RISKSWITCH_REQUIRE(g[i].size() == steps, ErrorCode::InvalidArgument, "g rows must cover t = 0..T");
    for (std::size_t t = 0; t < steps; ++t) require_rv(g[i][t], n, label("g", {i, t}));
    RISKSWITCH_REQUIRE(c[i].size() == modes, ErrorCode::InvalidArgument, "c must be m x m");
    for (std::size_t j = 0; j < modes; ++j) {
      RISKSWITCH_REQUIRE(c[i][j].size() == steps, ErrorCode::InvalidArgument, "c entries must cover t = 0..T");
      for (std::size_t t = 0; t < steps; ++t) {
        require_rv(c[i][j][t], n, label("c", {i, j, t}));
        if (i == j) {
          RISKSWITCH_REQUIRE(std::all_of(c[i][i][t].begin(), c[i][i][t].end(), [](double v) { return v == 0.0; }),
                             ErrorCode::InvalidArgument, label("c", {i, i, t}) + " must be zero");
        }
      }
    }
  }
  if (!allowed.empty()) {
    RISKSWITCH_REQUIRE(allowed.size() == modes, ErrorCode::InvalidArgument, "allowed must be m x m");
    for (std::size_t i = 0; i < modes; ++i) {
      RISKSWITCH_REQUIRE(allowed[i].size() == modes, ErrorCode::InvalidArgument, "allowed must be m x m");
      RISKSWITCH_REQUIRE(allowed[i][i], ErrorCode::InvalidArgument, "every mode must allow staying");
    }
  }
}

void SwitchingProblem::fold_diagonal() {
  for (std::size_t i = 0; i < c.size(); ++i) {
    for (std::size_t t = 0; t < c[i][i].size(); ++t) {
      RandomVariable d = c[i][i][t];
      if (std::all_of(d.begin(), d.end(), [](double v) { return v == 0.0; })) continue;
      g[i][t] += d;
      for (std::size_t k = 0; k < c.size(); ++k) {
        if (k != i) c[k][i][t] -= d;
      }
      c[i][i][t] = RandomVariable(d.size(), 0.0);
    }
  }
}

SwitchingProblem SwitchingProblem::make(std::shared_ptr<const FilteredSpace> space, RiskSpec risk, Table g,
                                        std::vector<Table> c, std::vector<std::vector<bool>> allowed) {
  SwitchingProblem p;
  p.space = std::move(space);
  p.risk = risk;
  p.m = static_cast<int>(g.size());
  p.g = std::move(g);
  p.c = std::move(c);
  p.allowed = std::move(allowed);
  if (p.c.size() == p.g.size()) {
    bool shaped = true;
    for (const auto& row : p.c) shaped = shaped && row.size() == p.c.size();
    for (std::size_t i = 0; shaped && i < p.c.size(); ++i) {
      shaped = p.c[i][i].size() == p.g[i].size() &&
               std::all_of(p.c[i][i].begin(), p.c[i][i].end(),
                           [&](const RandomVariable& x) { return p.space && x.size() == p.space->size(); });
      for (std::size_t k = 0; shaped && k < p.c.size(); ++k) shaped = p.c[k][i].size() == p.g[i].size();
    }
    if (shaped) p.fold_diagonal();
  }
  p.validate();
  return p;
}

RandomVariable combined_cost(const SwitchingProblem& p, int i, int j, int t) {
  const auto tt = static_cast<std::size_t>(t);
  return p.g[static_cast<std::size_t>(j)][tt] + p.c[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)][tt];
}

RandomVariable ValueField::next(int j, int t, std::size_t n) const {
  if (t + 1 <= horizon()) return V[static_cast<std::size_t>(j)][static_cast<std::size_t>(t + 1)];
  if (terminal.empty()) return RandomVariable(n, 0.0);
  return terminal[static_cast<std::size_t>(j)];
}

RandomVariable switch_value(const SwitchingProblem& p, const ConditionalRisk& rho, const Table& v,
                            const std::vector<RandomVariable>& terminal, int i, int j, int t) {
  RandomVariable x = combined_cost(p, i, j, t);
  if (t < p.horizon()) {
    x += v[static_cast<std::size_t>(j)][static_cast<std::size_t>(t + 1)];
  } else if (!terminal.empty()) {
    x += terminal[static_cast<std::size_t>(j)];
  }
  return rho.rho(t, x);
}

ValueField solve_finite(const SwitchingProblem& p) { return solve_finite(p, {}); }

ValueField solve_finite(const SwitchingProblem& p, std::vector<RandomVariable> terminal) {
  p.validate();
  const int horizon = p.horizon();
  const std::size_t n = p.size();
  const auto modes = static_cast<std::size_t>(p.m);
  RISKSWITCH_REQUIRE(terminal.empty() || terminal.size() == modes, ErrorCode::InvalidArgument,
                     "terminal continuation needs one entry per mode");
  for (const auto& x : terminal) require_rv(x, n, "terminal continuation");

  const ConditionalRisk rho = p.riskmap();
  ValueField vf;
  vf.terminal = std::move(terminal);
  vf.V.assign(modes, std::vector<RandomVariable>(static_cast<std::size_t>(horizon + 1)));
  vf.selection.assign(modes, std::vector<std::vector<Mode>>(static_cast<std::size_t>(horizon + 1)));
  for (int t = horizon; t >= 0; --t) {
    const auto tt = static_cast<std::size_t>(t);
    parallel_for(modes, [&](std::size_t i) {
      const int mi = static_cast<int>(i);
      RandomVariable best = switch_value(p, rho, vf.V, vf.terminal, mi, mi, t);
      std::vector<Mode> choice(n, mi);
      for (int j = 0; j < p.m; ++j) {
        if (j == mi || !p.is_allowed(mi, j)) continue;
        const RandomVariable cand = switch_value(p, rho, vf.V, vf.terminal, mi, j, t);
        for (std::size_t k = 0; k < n; ++k) {
          if (cand[k] < best[k]) {
            best[k] = cand[k];
            choice[k] = j;
          }
        }
      }
      vf.V[i][tt] = std::move(best);
      vf.selection[i][tt] = std::move(choice);
    });
  }
  return vf;
}

Strategy extract_strategy(const ValueField& vf, const SwitchingProblem& p, int t, Mode i) {
  const int horizon = p.horizon();
  RISKSWITCH_REQUIRE(t >= 0 && t <= horizon, ErrorCode::InvalidArgument, "start time outside 0..T");
  RISKSWITCH_REQUIRE(i >= 0 && i < p.m, ErrorCode::InvalidArgument, "start mode out of range");
  const std::size_t n = p.size();
  Strategy xi;
  xi.start = t;
  xi.initial = i;
  std::vector<Mode> prev(n, i);
  for (int s = t; s <= horizon; ++s) {
    std::vector<Mode> cur(n);
    for (std::size_t k = 0; k < n; ++k) {
      cur[k] = vf.selection[static_cast<std::size_t>(prev[k])][static_cast<std::size_t>(s)][k];
    }
    xi.modes.push_back(cur);
    prev = std::move(cur);
  }
  return xi;
}

namespace {

RandomVariable evaluate_unchecked(const SwitchingProblem& p, const ConditionalRisk& rho, const Strategy& xi, int t,
                                  const std::vector<RandomVariable>& terminal) {
  const int horizon = p.horizon();
  const std::size_t n = p.size();
  std::vector<RandomVariable> costs;
  costs.reserve(static_cast<std::size_t>(horizon - t + 1));
  std::vector<Mode> prev = xi.at(t - 1);
  for (int s = t; s <= horizon; ++s) {
    const auto ss = static_cast<std::size_t>(s);
    const std::vector<Mode>& cur = xi.modes[static_cast<std::size_t>(s - xi.start)];
    RandomVariable w(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
      const auto a = static_cast<std::size_t>(prev[k]);
      const auto b = static_cast<std::size_t>(cur[k]);
      w[k] = p.g[b][ss][k] + p.c[a][b][ss][k];
      if (s == horizon && !terminal.empty()) w[k] += terminal[b][k];
    }
    costs.push_back(std::move(w));
    prev = cur;
  }
  return rho.aggregate(t, horizon, costs);
}

}  // namespace

RandomVariable evaluate_strategy(const SwitchingProblem& p, const Strategy& xi, int t,
                                 const std::vector<RandomVariable>& terminal) {
  const int horizon = p.horizon();
  RISKSWITCH_REQUIRE(t >= 0 && t <= horizon, ErrorCode::InvalidArgument, "start time outside 0..T");
  RISKSWITCH_REQUIRE(xi.start <= t && xi.end() == horizon, ErrorCode::InvalidArgument,
                     "strategy must be defined on t..T");
  RISKSWITCH_REQUIRE(check_adapted(xi, p.space->filtration(), p.m), ErrorCode::NotAdapted,
                     "strategy is not adapted");
  if (xi.start > 0) {
    RISKSWITCH_REQUIRE(xi.initial >= 0 && xi.initial < p.m, ErrorCode::InvalidArgument, "initial mode out of range");
  }
  for (int s = t; s <= horizon; ++s) {
    const auto prev = xi.at(s - 1);
    const auto& cur = xi.modes[static_cast<std::size_t>(s - xi.start)];
    for (std::size_t k = 0; k < p.size(); ++k) {
      RISKSWITCH_REQUIRE(p.is_allowed(prev[k], cur[k]), ErrorCode::InvalidArgument,
                         "strategy uses a switch that is not allowed");
    }
  }
  return evaluate_unchecked(p, p.riskmap(), xi, t, terminal);
}

namespace {

// Blocks of partition s+1 inside each block of partition s.
std::vector<std::vector<std::vector<std::size_t>>> children_of(const Filtration& f) {
  std::vector<std::vector<std::vector<std::size_t>>> out(static_cast<std::size_t>(f.horizon() + 1));
  for (int s = 0; s < f.horizon(); ++s) {
    const Partition& here = f.at(s);
    const Partition& next = f.at(s + 1);
    auto& level = out[static_cast<std::size_t>(s)];
    level.assign(here.block_count(), {});
    for (std::size_t b = 0; b < next.block_count(); ++b) level[here.block_of(next.block(b).front())].push_back(b);
  }
  return out;
}

}  // namespace

double count_strategies(const SwitchingProblem& p, int t, Mode i, std::size_t block) {
  const Filtration& f = p.space->filtration();
  const auto kids = children_of(f);
  const int horizon = p.horizon();
  std::function<double(int, std::size_t, Mode)> count = [&](int s, std::size_t b, Mode held) {
    double total = 0.0;
    for (int j = 0; j < p.m; ++j) {
      if (!p.is_allowed(held, j)) continue;
      double prod = 1.0;
      if (s < horizon) {
        for (std::size_t child : kids[static_cast<std::size_t>(s)][b]) prod *= count(s + 1, child, j);
      }
      total += prod;
    }
    return total;
  };
  return count(t, block, i);
}

RandomVariable brute_force_value(const SwitchingProblem& p, int t, Mode i, double limit) {
  p.validate();
  const int horizon = p.horizon();
  RISKSWITCH_REQUIRE(t >= 0 && t <= horizon, ErrorCode::InvalidArgument, "start time outside 0..T");
  const Filtration& f = p.space->filtration();
  const std::size_t n = p.size();
  const Partition& root = f.at(t);
  for (std::size_t b = 0; b < root.block_count(); ++b) {
    const double count = count_strategies(p, t, i, b);
    RISKSWITCH_REQUIRE(count <= limit, ErrorCode::TooLarge,
                       std::to_string(count) + " strategies on a block exceeds the limit");
  }
  const auto kids = children_of(f);
  const ConditionalRisk rho = p.riskmap();
  RandomVariable best(n, std::numeric_limits<double>::infinity());

  for (std::size_t rb = 0; rb < root.block_count(); ++rb) {
    // Decision nodes (time, block) under this root block, in time order, with parent node index.
    struct Node {
      int s;
      std::size_t block;
      int parent;
    };
    std::vector<Node> nodes{{t, rb, -1}};
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      const Node nd = nodes[k];
      if (nd.s >= horizon) continue;
      for (std::size_t child : kids[static_cast<std::size_t>(nd.s)][nd.block]) {
        nodes.push_back({nd.s + 1, child, static_cast<int>(k)});
      }
    }
    Strategy xi = Strategy::constant(n, t, horizon, i);
    std::vector<Mode> assigned(nodes.size(), i);
    const auto& outcomes = root.block(rb);

    std::function<void(std::size_t)> walk = [&](std::size_t k) {
      if (k == nodes.size()) {
        const RandomVariable v = evaluate_unchecked(p, rho, xi, t, {});
        for (std::size_t w : outcomes) best[w] = std::min(best[w], v[w]);
        return;
      }
      const Node& nd = nodes[k];
      const Mode held = nd.parent < 0 ? i : assigned[static_cast<std::size_t>(nd.parent)];
      auto& row = xi.modes[static_cast<std::size_t>(nd.s - t)];
      for (int j = 0; j < p.m; ++j) {
        if (!p.is_allowed(held, j)) continue;
        assigned[k] = j;
        for (std::size_t w : f.at(nd.s).block(nd.block)) row[w] = j;
        walk(k + 1);
      }
    };
    walk(0);
  }
  return best;
}

std::vector<Jump> jump_representation(const Strategy& xi, int t, Mode i, int horizon) {
  RISKSWITCH_REQUIRE(xi.start <= t && xi.end() == horizon, ErrorCode::InvalidArgument,
                     "strategy must be defined on t..T");
  const std::size_t n = xi.modes.empty() ? 0 : xi.modes.front().size();
  auto mode_at = [&](int s, std::size_t k) { return xi.modes[static_cast<std::size_t>(s - xi.start)][k]; };
  std::vector<Mode> cur(n, i);
  std::vector<int> lo(n, t);
  std::vector<Jump> jumps;
  while (true) {
    Jump jp{StoppingTime(n, horizon), std::vector<Mode>(n, i)};
    bool all_done = true;
    for (std::size_t k = 0; k < n; ++k) {
      int s = lo[k];
      while (s < horizon && mode_at(s, k) == cur[k]) ++s;
      s = std::min(s, horizon);
      jp.tau[k] = s;
      jp.beta[k] = mode_at(s, k);
      cur[k] = jp.beta[k];
      lo[k] = s + 1;
      all_done = all_done && s == horizon;
    }
    jumps.push_back(std::move(jp));
    if (all_done) break;
  }
  return jumps;
}

}  // namespace riskswitch
