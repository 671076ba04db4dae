#pragma once

// Optimal stopping: F_t = min over stopping times tau in [t, T] of rho_{t,tau}(f..., h(tau)).

#include <memory>
#include <vector>

#include "riskswitch/rbsde.hpp"
#include "riskswitch/switching.hpp"

namespace riskswitch {

struct StoppingProblem {
  std::shared_ptr<const FilteredSpace> space;
  RiskSpec risk;
  std::vector<RandomVariable> f;  // running cost, t = 0..T
  std::vector<RandomVariable> h;  // stopping cost, t = 0..T

  int horizon() const noexcept { return space->horizon(); }
  std::size_t size() const noexcept { return space->size(); }
  ConditionalRisk riskmap() const { return ConditionalRisk(risk, space); }
  void validate() const;
};

struct StoppingSolution {
  std::vector<RandomVariable> F;   // t = 0..T
  std::vector<StoppingTime> tau;   // tau[t] = first s >= t with F_s = rho_s(h(s))
};

StoppingSolution solve_stopping(const StoppingProblem& sp);

// Two modes: 0 running, 1 stopped and absorbing. g_0 = f, c_01 = h, g_1 = c_10 = 0.
// With terminal_stop, g_0(T) = h(T) so that stopping at T is forced; without it g_0(T) = f(T),
// which is the form used when the horizon is a truncation point.
SwitchingProblem as_switching(const StoppingProblem& sp, bool terminal_stop = true);

// One stopping problem per mode with f = g_i and obstacle
//   h^i(T) = min_j rho_T(g~_ij(T) + terminal_j),
//   h^i(t) = min over allowed j != i of rho_t(g~_ij(t) + V^j_{t+1}),  t < T.
// When mode i has no allowed switch the obstacle falls back to rho_t(g_i(t) + V^i_{t+1}), which
// never binds below the continuation and keeps every value finite.
std::vector<StoppingProblem> switching_to_stopping_obstacles(const SwitchingProblem& p, const ValueField& vf);

// (F, M, A) as a single-component triple.
RbsdeTriple stopping_rbsde(const StoppingProblem& sp);
RbsdeTriple stopping_rbsde(const StoppingProblem& sp, const StoppingSolution& sol);

// The single-component system with obstacle rho_t(h(t)) and terminal value rho_T(h(T)).
VerificationReport verify_stopping_rbsde(const StoppingProblem& sp, const RbsdeTriple& triple,
                                         const VerifyOptions& opt = {});

}  // namespace riskswitch
