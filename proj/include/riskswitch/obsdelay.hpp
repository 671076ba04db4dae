#pragma once

// A delayed observation at time s (G_s = F_{s-1}) and the mode selected at s when the risk
// of the cost and of the continuation are taken jointly versus separately.

#include <vector>

#include "riskswitch/switching.hpp"

namespace riskswitch {

struct Selections {
  // [start mode][outcome]
  std::vector<std::vector<Mode>> joint;     // argmin_j rho_s(g~_ij(s) + V_{s+1}^j)
  std::vector<std::vector<Mode>> separate;  // argmin_j rho_s(g~_ij(s)) + rho_s(V_{s+1}^j)
};

// Both selections at time s < T on the problem as given (its filtration is the delayed one).
// Ties prefer staying, then the lowest index.
Selections compare_selections(const SwitchingProblem& p, int s);

// C_check[i][j] = rho_s(g~_ij(s)) + rho_s(V^j_{s+1}), C_hat[i][j] = rho_s(g~_ij(s) + V^j_{s+1}).
struct CostComparison {
  Table C_hat;
  Table C_check;
};
CostComparison compare_costs(const SwitchingProblem& p, int s);

struct DelayComparison {
  int s = 0;
  double n = 10.0;
  Mode from = 0;   // start mode held at s-1
  Mode first = 0;  // destination whose gap is smaller on the event
  Mode second = 1;
  CostComparison original;     // at zero shift, on the input problem
  std::vector<bool> event;     // gap(second) > gap(first) + 2/n, gap = C_check - C_hat
  double event_probability = 0.0;
  RandomVariable f_first;      // C_check(from, first) - C_check(from, second) + 1/n
  double f_bar = 0.0;
  RandomVariable shift_first;  // f_bar + f_first
  RandomVariable shift_second; // f_bar
  SwitchingProblem modified;
  CostComparison after;        // on the modified problem
  Selections selections;       // on the modified problem
  bool chain_holds = false;    // check(second) > check(first) > hat(first) > hat(second) on the event
  bool selections_differ = false;
};

// Modifies g~_{from,first}(s) and g~_{from,second}(s) so that on the event the joint selection
// picks `second` and the separate selection picks `first`. Requires m >= 3 and s < T; throws
// InvalidArgument otherwise. Throws AssumptionFailed when C_check > C_hat fails at some outcome
// or when no start mode and destination pair has gaps differing with positive probability.
DelayComparison build_counterexample(const SwitchingProblem& p, int s, double n = 10.0);

}  // namespace riskswitch
