#pragma once

// Reflected backward stochastic difference equations attached to a switching problem:
// construction from the value field, verification of candidate triples, and the jump-time
// optimality conditions.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "riskswitch/switching.hpp"

namespace riskswitch {

struct RbsdeTriple {
  Table Y;
  Table M;
  Table A;
};

struct CheckResult {
  std::string name;
  bool passed = true;
  double max_violation = 0.0;
  std::string where;  // first failing location, empty when passed
};

struct VerificationReport {
  std::vector<CheckResult> checks;

  bool passed() const;
  const CheckResult* find(const std::string& name) const;
  // Folds `other` into the checks of the same name.
  void merge(const VerificationReport& other);
};

struct VerifyOptions {
  double tol = 1e-9;
  // false: the terminal line is not imposed and the backward equation is checked between every
  // pair t <= T' of times in the window instead (truncated infinite-horizon form).
  bool anchor_terminal = true;
};

// Data of one component Y^i of the system.
struct ComponentData {
  std::vector<RandomVariable> driver;                   // g_i(s), s = 0..T-1
  RandomVariable terminal;                              // required value of Y_T
  std::vector<std::optional<RandomVariable>> obstacle;  // t = 0..T; nullopt means +infinity
};

// Checks: backward_equation, obstacle, skorokhod, martingale, predictable, nondecreasing,
// initial_zero, adapted. The Skorokhod sum is taken over absolute terms; under the obstacle and
// monotonicity conditions every term is nonpositive, so this equals the signed sum up to sign.
VerificationReport verify_component(const ConditionalRisk& rho, const std::vector<RandomVariable>& y,
                                    const std::vector<RandomVariable>& m, const std::vector<RandomVariable>& a,
                                    const ComponentData& data, const VerifyOptions& opt = {},
                                    const std::string& label = "");

// Component data of mode i, with obstacle min over allowed j != i of rho_t(g~_ij(t) + Y^j_{t+1}).
ComponentData component_data(const SwitchingProblem& p, const ConditionalRisk& rho, const Table& y, int i,
                             const std::vector<RandomVariable>& terminal = {});

// (N, B) with dN_{t+1} = Y_{t+1} - rho_t(Y_{t+1}), dB_{t+1} = rho_t(g_i(t) + Y_{t+1}) - Y_t.
std::pair<Table, Table> reconstruct_MA(const SwitchingProblem& p, const Table& y);

// Y = V together with the increments above.
RbsdeTriple construct_solution(const SwitchingProblem& p, const ValueField& vf);

VerificationReport verify_solution(const SwitchingProblem& p, const RbsdeTriple& triple,
                                   const std::vector<RandomVariable>& terminal = {},
                                   const VerifyOptions& opt = {});

// For every jump (tau_j, beta_j) of xi from (xi.start, xi.initial), checked per outcome up to
// the first jump at T: A^{beta_0} is flat on [start, tau_1], A^{beta_{j-1}} is flat on
// [tau_{j-1} + 1, tau_j] for j >= 2, and
// Y^{beta_{j-1}}_{tau_j} = rho_{tau_j}(g~_{beta_{j-1},beta_j} + Y^{beta_j}_{tau_j + 1}).
bool check_optimality_conditions(const SwitchingProblem& p, const RbsdeTriple& triple, const Strategy& xi,
                                 const std::vector<RandomVariable>& terminal = {}, double tol = 1e-9);

}  // namespace riskswitch
