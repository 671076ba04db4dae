#include "riskswitch/rbsde.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace riskswitch {

bool VerificationReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

const CheckResult* VerificationReport::find(const std::string& name) const {
  for (const auto& c : checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

void VerificationReport::merge(const VerificationReport& other) {
  for (const auto& o : other.checks) {
    auto it = std::find_if(checks.begin(), checks.end(), [&](const CheckResult& c) { return c.name == o.name; });
    if (it == checks.end()) {
      checks.push_back(o);
      continue;
    }
    if (it->passed && !o.passed) it->where = o.where;
    it->passed = it->passed && o.passed;
    it->max_violation = std::max(it->max_violation, o.max_violation);
  }
}

namespace {

struct Recorder {
  double tol;
  std::string label;

  void note(CheckResult& c, double violation, int t, std::size_t outcome, bool force_fail = false) const {
    c.max_violation = std::max(c.max_violation, violation);
    if ((violation > tol || force_fail) && c.passed) {
      c.passed = false;
      c.where = (label.empty() ? "" : label + " ") + "t=" + std::to_string(t) + " outcome=" + std::to_string(outcome);
    }
  }

  void note_diff(CheckResult& c, const RandomVariable& a, const RandomVariable& b, int t) const {
    for (std::size_t k = 0; k < a.size(); ++k) note(c, std::abs(a[k] - b[k]), t, k);
  }

  void note_spread(CheckResult& c, const RandomVariable& x, const Partition& p, int t) const {
    for (const auto& block : p.blocks()) {
      const double first = x[block.front()];
      for (std::size_t k : block) note(c, std::abs(x[k] - first), t, k);
    }
  }
};

}  // namespace

VerificationReport verify_component(const ConditionalRisk& rho, const std::vector<RandomVariable>& y,
                                    const std::vector<RandomVariable>& m, const std::vector<RandomVariable>& a,
                                    const ComponentData& data, const VerifyOptions& opt, const std::string& label) {
  auto named = [](const char* n) {
    CheckResult c;
    c.name = n;
    return c;
  };
  CheckResult backward = named("backward_equation");
  CheckResult obstacle = named("obstacle");
  CheckResult skorokhod = named("skorokhod");
  CheckResult martingale = named("martingale");
  CheckResult predictable = named("predictable");
  CheckResult nondecreasing = named("nondecreasing");
  CheckResult initial = named("initial_zero");
  CheckResult adapted = named("adapted");
  const Recorder rec{opt.tol, label};

  const int horizon = rho.horizon();
  const auto steps = static_cast<std::size_t>(horizon + 1);
  const std::size_t n = rho.size();
  auto sized = [&](const std::vector<RandomVariable>& v) {
    return v.size() == steps && std::all_of(v.begin(), v.end(), [&](const RandomVariable& x) { return x.size() == n; });
  };
  if (!sized(y) || !sized(m) || !sized(a) || data.driver.size() < static_cast<std::size_t>(horizon) ||
      data.obstacle.size() != steps) {
    CheckResult shape{"shape", false, 0.0, label};
    return VerificationReport{{shape}};
  }

  // Driver terms rho_s(g(s) + dM_{s+1}).
  std::vector<RandomVariable> drive(static_cast<std::size_t>(horizon));
  for (int s = 0; s < horizon; ++s) {
    const auto ss = static_cast<std::size_t>(s);
    drive[ss] = rho.rho(s, data.driver[ss] + (m[ss + 1] - m[ss]));
  }

  auto rhs = [&](int t, int anchor, const RandomVariable& end_value) {
    RandomVariable r = end_value;
    for (int s = t; s < anchor; ++s) r += drive[static_cast<std::size_t>(s)];
    const auto tt = static_cast<std::size_t>(t);
    const auto aa = static_cast<std::size_t>(anchor);
    r -= m[aa] - m[tt];
    r -= a[aa] - a[tt];
    return r;
  };
  for (int t = 0; t <= horizon; ++t) {
    if (opt.anchor_terminal) {
      rec.note_diff(backward, y[static_cast<std::size_t>(t)], rhs(t, horizon, data.terminal), t);
    } else {
      for (int anchor = t; anchor <= horizon; ++anchor) {
        rec.note_diff(backward, y[static_cast<std::size_t>(t)], rhs(t, anchor, y[static_cast<std::size_t>(anchor)]), t);
      }
    }
  }

  for (int t = 0; t <= horizon; ++t) {
    const auto tt = static_cast<std::size_t>(t);
    if (!data.obstacle[tt]) continue;
    const RandomVariable& obs = *data.obstacle[tt];
    for (std::size_t k = 0; k < n; ++k) rec.note(obstacle, std::max(0.0, y[tt][k] - obs[k]), t, k);
  }

  for (std::size_t k = 0; k < n; ++k) {
    double total = 0.0;
    bool infinite_term = false;
    int first_bad = 0;
    for (int t = 0; t < horizon; ++t) {
      const auto tt = static_cast<std::size_t>(t);
      const double inc = a[tt + 1][k] - a[tt][k];
      if (!data.obstacle[tt]) {
        // infinity * 0 = 0; any increment against an infinite obstacle is a violation.
        if (std::abs(inc) > opt.tol && !infinite_term) {
          infinite_term = true;
          first_bad = t;
        }
        continue;
      }
      total += std::abs((y[tt][k] - (*data.obstacle[tt])[k]) * inc);
    }
    rec.note(skorokhod, total, first_bad, k, infinite_term);
  }

  for (int t = 0; t < horizon; ++t) {
    const auto tt = static_cast<std::size_t>(t);
    const RandomVariable r = rho.rho(t, m[tt + 1] - m[tt]);
    for (std::size_t k = 0; k < n; ++k) rec.note(martingale, std::abs(r[k]), t, k);
    rec.note_spread(predictable, a[tt + 1], rho.space().at(t), t + 1);
    for (std::size_t k = 0; k < n; ++k) rec.note(nondecreasing, std::max(0.0, a[tt][k] - a[tt + 1][k]), t + 1, k);
  }

  for (std::size_t k = 0; k < n; ++k) {
    rec.note(initial, std::max(std::abs(m[0][k]), std::abs(a[0][k])), 0, k);
  }
  for (int t = 0; t <= horizon; ++t) {
    const auto tt = static_cast<std::size_t>(t);
    const Partition& p = rho.space().at(t);
    rec.note_spread(adapted, y[tt], p, t);
    rec.note_spread(adapted, m[tt], p, t);
    rec.note_spread(adapted, a[tt], p, t);
  }

  return VerificationReport{{backward, obstacle, skorokhod, martingale, predictable, nondecreasing, initial, adapted}};
}

ComponentData component_data(const SwitchingProblem& p, const ConditionalRisk& rho, const Table& y, int i,
                             const std::vector<RandomVariable>& terminal) {
  const int horizon = p.horizon();
  const auto ii = static_cast<std::size_t>(i);
  ComponentData d;
  d.driver.assign(p.g[ii].begin(), p.g[ii].begin() + horizon);
  d.obstacle.resize(static_cast<std::size_t>(horizon + 1));
  for (int t = 0; t <= horizon; ++t) {
    std::optional<RandomVariable> best;
    for (int j = 0; j < p.m; ++j) {
      if (j == i || !p.is_allowed(i, j)) continue;
      RandomVariable v = switch_value(p, rho, y, terminal, i, j, t);
      best = best ? pointwise_min(*best, v) : v;
    }
    d.obstacle[static_cast<std::size_t>(t)] = std::move(best);
  }
  d.terminal = switch_value(p, rho, y, terminal, i, i, horizon);
  if (d.obstacle.back()) d.terminal = pointwise_min(d.terminal, *d.obstacle.back());
  return d;
}

std::pair<Table, Table> reconstruct_MA(const SwitchingProblem& p, const Table& y) {
  const ConditionalRisk rho = p.riskmap();
  const int horizon = p.horizon();
  const std::size_t n = p.size();
  Table big_m(y.size());
  Table big_a(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    RISKSWITCH_REQUIRE(y[i].size() == static_cast<std::size_t>(horizon + 1), ErrorCode::InvalidArgument,
                       "Y must cover t = 0..T");
    big_m[i].push_back(RandomVariable(n, 0.0));
    big_a[i].push_back(RandomVariable(n, 0.0));
    for (int t = 0; t < horizon; ++t) {
      const auto tt = static_cast<std::size_t>(t);
      const RandomVariable dm = y[i][tt + 1] - rho.rho(t, y[i][tt + 1]);
      const RandomVariable da = rho.rho(t, p.g[i][tt] + y[i][tt + 1]) - y[i][tt];
      big_m[i].push_back(big_m[i].back() + dm);
      big_a[i].push_back(big_a[i].back() + da);
    }
  }
  return {std::move(big_m), std::move(big_a)};
}

RbsdeTriple construct_solution(const SwitchingProblem& p, const ValueField& vf) {
  auto [big_m, big_a] = reconstruct_MA(p, vf.V);
  return RbsdeTriple{vf.V, std::move(big_m), std::move(big_a)};
}

VerificationReport verify_solution(const SwitchingProblem& p, const RbsdeTriple& triple,
                                   const std::vector<RandomVariable>& terminal, const VerifyOptions& opt) {
  const auto modes = static_cast<std::size_t>(p.m);
  if (triple.Y.size() != modes || triple.M.size() != modes || triple.A.size() != modes) {
    return VerificationReport{{CheckResult{"shape", false, 0.0, "mode count"}}};
  }
  const ConditionalRisk rho = p.riskmap();
  VerificationReport report;
  for (int i = 0; i < p.m; ++i) {
    const auto ii = static_cast<std::size_t>(i);
    if (triple.Y[ii].size() != static_cast<std::size_t>(p.horizon() + 1)) {
      report.merge(VerificationReport{{CheckResult{"shape", false, 0.0, "mode=" + std::to_string(i)}}});
      continue;
    }
    const ComponentData data = component_data(p, rho, triple.Y, i, terminal);
    report.merge(verify_component(rho, triple.Y[ii], triple.M[ii], triple.A[ii], data, opt,
                                  "mode=" + std::to_string(i)));
  }
  return report;
}

bool check_optimality_conditions(const SwitchingProblem& p, const RbsdeTriple& triple, const Strategy& xi,
                                 const std::vector<RandomVariable>& terminal, double tol) {
  const int horizon = p.horizon();
  const int t0 = xi.start;
  const Mode i0 = xi.initial;
  const std::size_t n = p.size();
  const ConditionalRisk rho = p.riskmap();

  // R[a][b][s] = rho_s(g~_ab(s) + Y^b_{s+1}), computed lazily.
  std::vector<std::vector<std::vector<std::optional<RandomVariable>>>> cache(
      static_cast<std::size_t>(p.m),
      std::vector<std::vector<std::optional<RandomVariable>>>(
          static_cast<std::size_t>(p.m), std::vector<std::optional<RandomVariable>>(static_cast<std::size_t>(horizon + 1))));
  auto r_value = [&](int a, int b, int s) -> const RandomVariable& {
    auto& slot = cache[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)][static_cast<std::size_t>(s)];
    if (!slot) slot = switch_value(p, rho, triple.Y, terminal, a, b, s);
    return *slot;
  };

  const std::vector<Jump> jumps = jump_representation(xi, t0, i0, horizon);
  std::vector<int> prev_tau(n, t0);
  std::vector<Mode> prev_beta(n, i0);
  std::vector<bool> active(n, true);
  bool first = true;
  for (const Jump& jp : jumps) {
    for (std::size_t k = 0; k < n; ++k) {
      if (!active[k]) continue;
      const auto a = static_cast<std::size_t>(prev_beta[k]);
      const int tau = jp.tau[k];
      // A mode entered at tau_{j-1} is first held at the decision of tau_{j-1} + 1.
      const int from = first ? prev_tau[k] : prev_tau[k] + 1;
      const double flat = triple.A[a][static_cast<std::size_t>(tau)][k] -
                          triple.A[a][static_cast<std::size_t>(from)][k];
      if (std::abs(flat) > tol) return false;
      const double lhs = triple.Y[a][static_cast<std::size_t>(tau)][k];
      if (std::abs(lhs - r_value(prev_beta[k], jp.beta[k], tau)[k]) > tol) return false;
      if (tau >= horizon) active[k] = false;
      prev_tau[k] = tau;
      prev_beta[k] = jp.beta[k];
    }
    first = false;
  }
  return true;
}

}  // namespace riskswitch
