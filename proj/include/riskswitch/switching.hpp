#pragma once

// Finite-horizon risk-aware optimal switching on a finite filtered space.

#include <memory>
#include <vector>

#include "riskswitch/probspace.hpp"
#include "riskswitch/riskmap.hpp"

namespace riskswitch {

using Table = std::vector<std::vector<RandomVariable>>;  // [mode][time]

struct SwitchingProblem {
  std::shared_ptr<const FilteredSpace> space;
  RiskSpec risk;
  int m = 1;
  Table g;                                           // g[i][t], running cost in mode i
  std::vector<Table> c;                              // c[i][j][t], cost of switching i -> j
  std::vector<std::vector<bool>> allowed;            // allowed[i][j]; empty means all

  int horizon() const noexcept { return space->horizon(); }
  std::size_t size() const noexcept { return space->size(); }
  ConditionalRisk riskmap() const { return ConditionalRisk(risk, space); }
  bool is_allowed(int i, int j) const {
    return allowed.empty() || allowed[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }

  // Shapes, finiteness, zero diagonal, allowed[i][i]. Throws InvalidArgument.
  void validate() const;

  // g_i += c_ii, c_ki -= c_ii (k != i), c_ii = 0. Leaves every combined cost unchanged.
  void fold_diagonal();

  // Builds, folds any diagonal switching cost into g, and validates.
  static SwitchingProblem make(std::shared_ptr<const FilteredSpace> space, RiskSpec risk, Table g,
                               std::vector<Table> c, std::vector<std::vector<bool>> allowed = {});
};

// g_j(t) + c_ij(t).
RandomVariable combined_cost(const SwitchingProblem& p, int i, int j, int t);

struct ValueField {
  Table V;                                        // V[i][t]
  std::vector<std::vector<std::vector<Mode>>> selection;  // selection[i][t][outcome]
  std::vector<RandomVariable> terminal;           // continuation at T+1 per mode; empty means 0

  int horizon() const noexcept { return V.empty() ? -1 : static_cast<int>(V.front().size()) - 1; }
  // V[j][t], with V[j][T+1] the terminal continuation.
  RandomVariable next(int j, int t, std::size_t n) const;
};

// rho_t(g~_ij(t) + V^j_{t+1}) with V_{T+1} taken from `terminal` (zero when empty).
RandomVariable switch_value(const SwitchingProblem& p, const ConditionalRisk& rho, const Table& v,
                            const std::vector<RandomVariable>& terminal, int i, int j, int t);

// Backward recursion. Ties prefer staying in the current mode, then the lowest index.
ValueField solve_finite(const SwitchingProblem& p);
ValueField solve_finite(const SwitchingProblem& p, std::vector<RandomVariable> terminal);

// Optimal strategy started at time t from mode i (held at t-1).
Strategy extract_strategy(const ValueField& vf, const SwitchingProblem& p, int t, Mode i);

// rho_{t,T} of the realised combined costs (plus terminal continuation if given). Throws NotAdapted.
RandomVariable evaluate_strategy(const SwitchingProblem& p, const Strategy& xi, int t,
                                 const std::vector<RandomVariable>& terminal = {});

// Number of adapted strategies from (t, i) on one time-t block, respecting allowed successors.
double count_strategies(const SwitchingProblem& p, int t, Mode i, std::size_t block);

// Pointwise minimum of evaluate_strategy over every adapted strategy. Throws TooLarge if some
// time-t block has more than `limit` strategies.
RandomVariable brute_force_value(const SwitchingProblem& p, int t, Mode i, double limit = 1e6);

struct Jump {
  StoppingTime tau;
  std::vector<Mode> beta;
};

// Jump times and targets of xi from (t, i). The list ends with the first jump at which every
// outcome has reached T; constant strategies give a single jump (T, i).
std::vector<Jump> jump_representation(const Strategy& xi, int t, Mode i, int horizon);

}  // namespace riskswitch
