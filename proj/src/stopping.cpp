#include "riskswitch/stopping.hpp"

namespace riskswitch {

void StoppingProblem::validate() const {
  RISKSWITCH_REQUIRE(space != nullptr, ErrorCode::InvalidArgument, "stopping problem has no space");
  risk.validate();
  const auto steps = static_cast<std::size_t>(horizon() + 1);
  RISKSWITCH_REQUIRE(f.size() == steps && h.size() == steps, ErrorCode::InvalidArgument,
                     "f and h must cover t = 0..T");
  for (std::size_t t = 0; t < steps; ++t) {
    RISKSWITCH_REQUIRE(f[t].size() == size() && h[t].size() == size(), ErrorCode::InvalidArgument,
                       "f/h entry at t=" + std::to_string(t) + " has the wrong number of outcomes");
    RISKSWITCH_REQUIRE(f[t].is_finite() && h[t].is_finite(), ErrorCode::InvalidArgument,
                       "f/h entry at t=" + std::to_string(t) + " is not finite");
  }
}

StoppingSolution solve_stopping(const StoppingProblem& sp) {
  sp.validate();
  const ConditionalRisk rho = sp.riskmap();
  const int horizon = sp.horizon();
  const std::size_t n = sp.size();
  StoppingSolution sol;
  sol.F.resize(static_cast<std::size_t>(horizon + 1));
  std::vector<std::vector<bool>> stop_now(static_cast<std::size_t>(horizon + 1), std::vector<bool>(n, true));
  sol.F.back() = rho.rho(horizon, sp.h.back());
  for (int t = horizon - 1; t >= 0; --t) {
    const auto tt = static_cast<std::size_t>(t);
    const RandomVariable cont = rho.rho(t, sp.f[tt] + sol.F[tt + 1]);
    const RandomVariable stop = rho.rho(t, sp.h[tt]);
    RandomVariable v(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
      stop_now[tt][k] = stop[k] <= cont[k];
      v[k] = stop_now[tt][k] ? stop[k] : cont[k];
    }
    sol.F[tt] = std::move(v);
  }
  sol.tau.assign(static_cast<std::size_t>(horizon + 1), StoppingTime(n, horizon));
  for (int t = horizon - 1; t >= 0; --t) {
    const auto tt = static_cast<std::size_t>(t);
    for (std::size_t k = 0; k < n; ++k) sol.tau[tt][k] = stop_now[tt][k] ? t : sol.tau[tt + 1][k];
  }
  for (const auto& tau : sol.tau) {
    RISKSWITCH_REQUIRE(is_stopping_time(tau, sp.space->filtration()), ErrorCode::NotAStoppingTime,
                       "optimal stopping rule is not a stopping time");
  }
  return sol;
}

SwitchingProblem as_switching(const StoppingProblem& sp, bool terminal_stop) {
  sp.validate();
  const int horizon = sp.horizon();
  const std::size_t n = sp.size();
  const RandomVariable zero(n, 0.0);
  Table g(2);
  g[0] = sp.f;
  if (terminal_stop) g[0].back() = sp.h.back();
  g[1].assign(static_cast<std::size_t>(horizon + 1), zero);
  std::vector<Table> c(2, Table(2, std::vector<RandomVariable>(static_cast<std::size_t>(horizon + 1), zero)));
  c[0][1] = sp.h;
  return SwitchingProblem::make(sp.space, sp.risk, std::move(g), std::move(c), {{true, true}, {false, true}});
}

std::vector<StoppingProblem> switching_to_stopping_obstacles(const SwitchingProblem& p, const ValueField& vf) {
  const ConditionalRisk rho = p.riskmap();
  const int horizon = p.horizon();
  std::vector<StoppingProblem> out;
  for (int i = 0; i < p.m; ++i) {
    const auto ii = static_cast<std::size_t>(i);
    StoppingProblem sp{p.space, p.risk, p.g[ii], {}};
    sp.h.resize(static_cast<std::size_t>(horizon + 1));
    for (int t = 0; t <= horizon; ++t) {
      std::optional<RandomVariable> best;
      for (int j = 0; j < p.m; ++j) {
        const bool candidate = t == horizon ? p.is_allowed(i, j) : (j != i && p.is_allowed(i, j));
        if (!candidate) continue;
        RandomVariable v = switch_value(p, rho, vf.V, vf.terminal, i, j, t);
        best = best ? pointwise_min(*best, v) : v;
      }
      if (!best) best = switch_value(p, rho, vf.V, vf.terminal, i, i, t);
      sp.h[static_cast<std::size_t>(t)] = std::move(*best);
    }
    out.push_back(std::move(sp));
  }
  return out;
}

RbsdeTriple stopping_rbsde(const StoppingProblem& sp) { return stopping_rbsde(sp, solve_stopping(sp)); }

RbsdeTriple stopping_rbsde(const StoppingProblem& sp, const StoppingSolution& sol) {
  const ConditionalRisk rho = sp.riskmap();
  const int horizon = sp.horizon();
  const std::size_t n = sp.size();
  std::vector<RandomVariable> m{RandomVariable(n, 0.0)};
  std::vector<RandomVariable> a{RandomVariable(n, 0.0)};
  for (int t = 0; t < horizon; ++t) {
    const auto tt = static_cast<std::size_t>(t);
    m.push_back(m.back() + (sol.F[tt + 1] - rho.rho(t, sol.F[tt + 1])));
    a.push_back(a.back() + (rho.rho(t, sp.f[tt] + sol.F[tt + 1]) - sol.F[tt]));
  }
  return RbsdeTriple{{sol.F}, {std::move(m)}, {std::move(a)}};
}

VerificationReport verify_stopping_rbsde(const StoppingProblem& sp, const RbsdeTriple& triple,
                                         const VerifyOptions& opt) {
  if (triple.Y.size() != 1 || triple.M.size() != 1 || triple.A.size() != 1) {
    return VerificationReport{{CheckResult{"shape", false, 0.0, "expected one component"}}};
  }
  const ConditionalRisk rho = sp.riskmap();
  const int horizon = sp.horizon();
  ComponentData data;
  data.driver.assign(sp.f.begin(), sp.f.begin() + horizon);
  data.terminal = rho.rho(horizon, sp.h.back());
  for (int t = 0; t <= horizon; ++t) data.obstacle.emplace_back(rho.rho(t, sp.h[static_cast<std::size_t>(t)]));
  return verify_component(rho, triple.Y[0], triple.M[0], triple.A[0], data, opt);
}

}  // namespace riskswitch
