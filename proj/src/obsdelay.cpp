#include "riskswitch/obsdelay.hpp"

#include <algorithm>
#include <array>
#include <limits>

namespace riskswitch {

CostComparison compare_costs(const SwitchingProblem& p, int s) {
  RISKSWITCH_REQUIRE(s >= 0 && s < p.horizon(), ErrorCode::InvalidArgument, "need 0 <= s < T");
  const ValueField vf = solve_finite(p);
  const ConditionalRisk rho = p.riskmap();
  const auto modes = static_cast<std::size_t>(p.m);
  CostComparison out;
  out.C_hat.assign(modes, std::vector<RandomVariable>(modes));
  out.C_check.assign(modes, std::vector<RandomVariable>(modes));
  for (int i = 0; i < p.m; ++i) {
    for (int j = 0; j < p.m; ++j) {
      if (!p.is_allowed(i, j)) continue;
      const auto ii = static_cast<std::size_t>(i);
      const auto jj = static_cast<std::size_t>(j);
      const RandomVariable& next = vf.V[jj][static_cast<std::size_t>(s + 1)];
      out.C_hat[ii][jj] = switch_value(p, rho, vf.V, vf.terminal, i, j, s);
      out.C_check[ii][jj] = rho.rho(s, combined_cost(p, i, j, s)) + rho.rho(s, next);
    }
  }
  return out;
}

namespace {

std::vector<Mode> select(const SwitchingProblem& p, const Table& cost, int i) {
  const auto ii = static_cast<std::size_t>(i);
  RandomVariable best = cost[ii][ii];
  std::vector<Mode> choice(best.size(), i);
  for (int j = 0; j < p.m; ++j) {
    if (j == i || !p.is_allowed(i, j)) continue;
    const RandomVariable& cand = cost[ii][static_cast<std::size_t>(j)];
    for (std::size_t k = 0; k < best.size(); ++k) {
      if (cand[k] < best[k]) {
        best[k] = cand[k];
        choice[k] = j;
      }
    }
  }
  return choice;
}

Selections select_all(const SwitchingProblem& p, const CostComparison& cc) {
  Selections out;
  for (int i = 0; i < p.m; ++i) {
    out.joint.push_back(select(p, cc.C_hat, i));
    out.separate.push_back(select(p, cc.C_check, i));
  }
  return out;
}

// Subtracts a G_s-measurable shift from g~_{from,to}(s) only.
void shift_cost(SwitchingProblem& p, int from, int to, int s, const RandomVariable& shift) {
  const auto ss = static_cast<std::size_t>(s);
  const auto ff = static_cast<std::size_t>(from);
  const auto tt = static_cast<std::size_t>(to);
  if (from == to) {
    p.g[ff][ss] -= shift;
    for (std::size_t k = 0; k < static_cast<std::size_t>(p.m); ++k) {
      if (k != ff) p.c[k][ff][ss] += shift;
    }
  } else {
    p.c[ff][tt][ss] -= shift;
  }
}

}  // namespace

Selections compare_selections(const SwitchingProblem& p, int s) { return select_all(p, compare_costs(p, s)); }

DelayComparison build_counterexample(const SwitchingProblem& p, int s, double n) {
  RISKSWITCH_REQUIRE(p.m >= 3, ErrorCode::InvalidArgument, "the construction needs at least three modes");
  RISKSWITCH_REQUIRE(s >= 0 && s < p.horizon(), ErrorCode::InvalidArgument, "need 0 <= s < T");
  RISKSWITCH_REQUIRE(n > 0.0, ErrorCode::InvalidArgument, "n must be positive");
  RISKSWITCH_REQUIRE(p.allowed.empty(), ErrorCode::InvalidArgument, "the construction needs every switch allowed");
  const std::size_t size = p.size();
  const auto probs = p.space->space().probs();
  const CostComparison cc = compare_costs(p, s);

  for (int i = 0; i < p.m; ++i) {
    for (int j = 0; j < p.m; ++j) {
      const auto& check = cc.C_check[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      const auto& hat = cc.C_hat[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      for (std::size_t k = 0; k < size; ++k) {
        RISKSWITCH_REQUIRE(check[k] > hat[k], ErrorCode::AssumptionFailed,
                           "separate cost does not exceed joint cost for switch " + std::to_string(i) + "->" +
                               std::to_string(j) + " at outcome " + std::to_string(k));
      }
    }
  }

  auto gap = [&](int i, int j, std::size_t k) {
    return cc.C_check[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)][k] -
           cc.C_hat[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)][k];
  };

  // Start mode 0 with destinations (0, 1) first, then with the roles of 0 and 1 exchanged,
  // then every other start mode and pair.
  std::vector<std::array<int, 3>> configs{{0, 0, 1}, {0, 1, 0}};
  for (int from = 0; from < p.m; ++from) {
    for (int a = 0; a < p.m; ++a) {
      for (int b = 0; b < p.m; ++b) {
        if (a == b || (from == 0 && ((a == 0 && b == 1) || (a == 1 && b == 0)))) continue;
        configs.push_back({from, a, b});
      }
    }
  }

  bool gaps_differ = false;
  for (const auto& [from, first, second] : configs) {
    std::vector<bool> event(size, false);
    double prob = 0.0;
    for (std::size_t k = 0; k < size; ++k) {
      if (gap(from, first, k) != gap(from, second, k)) gaps_differ = true;
      event[k] = gap(from, second, k) > gap(from, first, k) + 2.0 / n;
      if (event[k]) prob += probs[k];
    }
    if (prob <= 0.0) continue;

    DelayComparison out;
    out.s = s;
    out.n = n;
    out.from = from;
    out.first = first;
    out.second = second;
    out.original = cc;
    out.event = event;
    out.event_probability = prob;

    const auto fi = static_cast<std::size_t>(from);
    const RandomVariable& check_first = cc.C_check[fi][static_cast<std::size_t>(first)];
    const RandomVariable& check_second = cc.C_check[fi][static_cast<std::size_t>(second)];
    out.f_first = check_first - check_second + 1.0 / n;

    double sup = -std::numeric_limits<double>::infinity();
    double inf = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < size; ++k) {
      sup = std::max({sup, check_first[k] - out.f_first[k], check_second[k]});
      for (int other = 0; other < p.m; ++other) {
        if (other == first || other == second) continue;
        inf = std::min(inf, cc.C_hat[fi][static_cast<std::size_t>(other)][k]);
      }
    }
    out.f_bar = 1.0 + sup - inf;
    out.shift_first = out.f_first + out.f_bar;
    out.shift_second = RandomVariable(size, out.f_bar);

    out.modified = p;
    shift_cost(out.modified, from, first, s, out.shift_first);
    shift_cost(out.modified, from, second, s, out.shift_second);
    out.modified.validate();
    out.after = compare_costs(out.modified, s);
    out.selections = select_all(out.modified, out.after);

    const auto& a = out.after;
    const auto f1 = static_cast<std::size_t>(first);
    const auto f2 = static_cast<std::size_t>(second);
    out.chain_holds = true;
    out.selections_differ = true;
    for (std::size_t k = 0; k < size; ++k) {
      if (!event[k]) continue;
      out.chain_holds = out.chain_holds && a.C_check[fi][f2][k] > a.C_check[fi][f1][k] &&
                        a.C_check[fi][f1][k] > a.C_hat[fi][f1][k] && a.C_hat[fi][f1][k] > a.C_hat[fi][f2][k];
      out.selections_differ = out.selections_differ && out.selections.joint[fi][k] == second &&
                              out.selections.separate[fi][k] == first;
    }
    return out;
  }
  if (!gaps_differ) {
    throw Error(ErrorCode::AssumptionFailed, "cost gaps coincide almost surely for every start mode and pair");
  }
  throw Error(ErrorCode::AssumptionFailed,
              "cost gaps differ but never by more than 2/n; increase n");
}

}  // namespace riskswitch
