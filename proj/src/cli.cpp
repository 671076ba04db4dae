#include "riskswitch/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <optional>

#include "riskswitch/io.hpp"
#include "riskswitch/obsdelay.hpp"
#include "riskswitch/parallel.hpp"

namespace riskswitch::cli {

namespace {

using io::json;

std::string shortest(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

struct Emit {
  std::ostream& out;
  void operator()(const json& j) const { out << io::render(j); }
};

int solve_cmd(const std::string& file, int start_mode, int start_time, const Emit& emit) {
  const SwitchingProblem p = io::load_problem(io::read_file(file));
  RISKSWITCH_REQUIRE(start_mode >= 0 && start_mode < p.m, ErrorCode::InvalidArgument, "start mode out of range");
  RISKSWITCH_REQUIRE(start_time >= 0 && start_time <= p.horizon(), ErrorCode::InvalidArgument,
                     "start time out of range");
  const ValueField vf = solve_finite(p);
  json doc = io::dump_value_field(vf);
  doc["strategy"] = io::dump_strategy(extract_strategy(vf, p, start_time, start_mode));
  doc["value"] = io::dump_rv(vf.V[static_cast<std::size_t>(start_mode)][static_cast<std::size_t>(start_time)]);
  emit(doc);
  return kOk;
}

int rbsde_cmd(const std::string& file, const std::string& verify, double tol, const Emit& emit) {
  const SwitchingProblem p = io::load_problem(io::read_file(file));
  if (verify.empty()) {
    emit(io::dump_triple(construct_solution(p, solve_finite(p))));
    return kOk;
  }
  const RbsdeTriple tr =
      io::load_triple(io::read_file(verify), static_cast<std::size_t>(p.m), p.horizon(), p.size());
  VerifyOptions opt;
  opt.tol = tol;
  const VerificationReport rep = verify_solution(p, tr, {}, opt);
  emit(io::dump_report(rep));
  return rep.passed() ? kOk : kVerification;
}

int stop_cmd(const std::string& file, const Emit& emit) {
  const StoppingProblem sp = io::load_stopping(io::read_file(file));
  const StoppingSolution sol = solve_stopping(sp);
  json F = json::array();
  for (const auto& x : sol.F) F.push_back(io::dump_rv(x));
  json doc{{"version", io::kVersion}, {"kind", "stopping_solution"}, {"F", F}, {"tau", sol.tau}};
  json tr = io::dump_triple(stopping_rbsde(sp, sol));
  doc["triple"] = {{"Y", tr["Y"]}, {"M", tr["M"]}, {"A", tr["A"]}};
  emit(doc);
  return kOk;
}

int oracle_cmd(const std::string& file, double limit, double tol, const Emit& emit) {
  const SwitchingProblem p = io::load_problem(io::read_file(file));
  const ValueField vf = solve_finite(p);
  Table brute(static_cast<std::size_t>(p.m));
  double worst = 0.0;
  for (int i = 0; i < p.m; ++i) {
    for (int t = 0; t <= p.horizon(); ++t) {
      RandomVariable b = brute_force_value(p, t, i, limit);
      worst = std::max(worst, max_abs_diff(b, vf.V[static_cast<std::size_t>(i)][static_cast<std::size_t>(t)]));
      brute[static_cast<std::size_t>(i)].push_back(std::move(b));
    }
  }
  const bool ok = worst <= tol;
  emit({{"version", io::kVersion},
        {"kind", "oracle_comparison"},
        {"dp", io::dump_table(vf.V)},
        {"brute_force", io::dump_table(brute)},
        {"max_abs_diff", worst},
        {"tol", tol},
        {"passed", ok}});
  return ok ? kOk : kVerification;
}

int infinite_cmd(const std::string& file, double tol, int horizon, bool window, const Emit& emit) {
  const json doc = io::read_file(file);
  const json kind = doc.contains("kind") ? doc["kind"] : json();
  json out{{"version", io::kVersion}, {"kind", "infinite_value"}};
  auto fill = [&](const TruncatedValue& tv) {
    out["r"] = tv.horizon;
    out["error_bound"] = tv.error_bound;
    out["V0"] = tv.v0_blocks;
    out["tail"] = tv.tail;
  };
  if (kind.is_string() && kind.get<std::string>() == "discounted_markov_stopping") {
    const DiscountedMarkovStopping gen(io::load_discounted_stopping(doc));
    fill(horizon >= 0 ? infinite_stopping_at(gen, horizon) : infinite_stopping(gen, tol));
    out["problem"] = "stopping";
    emit(out);
    return kOk;
  }
  const DiscountedMarkovGenerator gen(io::load_discounted(doc));
  const int r = horizon >= 0 ? horizon : choose_horizon(gen.bound(), tol);
  if (window) {
    const WindowSolution ws = infinite_rbsde_window(gen, r);
    fill(ws.value);
    out["report"] = io::dump_report(ws.report);
    out["problem"] = "switching";
    emit(out);
    return ws.report.passed() ? kOk : kVerification;
  }
  fill(truncated_solve_at(gen, r));
  out["problem"] = "switching";
  emit(out);
  return kOk;
}

json selections_json(const std::vector<std::vector<Mode>>& s) { return json(s); }

int delay_cmd(const std::string& file, int s, double n, bool delay, const Emit& emit) {
  SwitchingProblem p = io::load_problem(io::read_file(file));
  if (delay) {
    RISKSWITCH_REQUIRE(s >= 1, ErrorCode::InvalidArgument, "a delayed observation needs s >= 1");
    RISKSWITCH_REQUIRE(s < p.horizon(), ErrorCode::InvalidArgument, "need s < T");
    p.space = FilteredSpace::make(p.space->space(), delayed_filtration(p.space->filtration(), {s}));
  }
  const DelayComparison dc = build_counterexample(p, s, n);
  json event = json::array();
  for (bool e : dc.event) event.push_back(e);
  json c = json::array();
  for (const Table& row : dc.modified.c) c.push_back(io::dump_table(row));
  emit({{"version", io::kVersion},
        {"kind", "delay_demo"},
        {"s", dc.s},
        {"n", dc.n},
        {"from", dc.from},
        {"first", dc.first},
        {"second", dc.second},
        {"event", event},
        {"event_probability", dc.event_probability},
        {"f_first", io::dump_rv(dc.f_first)},
        {"f_bar", dc.f_bar},
        {"modified", {{"g", io::dump_table(dc.modified.g)}, {"c", c}}},
        {"C_hat", io::dump_table(dc.after.C_hat)},
        {"C_check", io::dump_table(dc.after.C_check)},
        {"joint", selections_json(dc.selections.joint)},
        {"separate", selections_json(dc.selections.separate)},
        {"chain_holds", dc.chain_holds},
        {"selections_differ", dc.selections_differ}});
  return dc.chain_holds && dc.selections_differ ? kOk : kVerification;
}

int hydro_cmd(const std::string& config, std::optional<double> theta, std::size_t simulate, std::uint64_t seed,
              bool csv, bool full, std::ostream& out, const Emit& emit) {
  HydroConfig cfg = config.empty() ? HydroConfig::defaults() : io::load_hydro(io::read_file(config));
  if (theta) cfg.theta = *theta;
  const HydroSolution sol = solve_hydro(cfg);
  std::optional<HydroStats> stats;
  if (simulate > 0) stats = simulate_policy(sol, seed, simulate);

  if (csv) {
    out << "t,mean_level,p05_level,min_level,max_level,mean_production\n";
    if (stats) {
      for (std::size_t t = 0; t < stats->mean_level.size(); ++t) {
        out << t << ',' << shortest(stats->mean_level[t]) << ',' << shortest(stats->p05_level[t]) << ','
            << shortest(stats->min_level[t]) << ',' << shortest(stats->max_level[t]) << ',';
        if (t < stats->mean_production.size()) out << shortest(stats->mean_production[t]);
        out << '\n';
      }
    }
    return kOk;
  }

  const HydroState x0 = hydro_initial_state(cfg);
  const auto b0 = static_cast<std::size_t>(cfg.initial_bid);
  json doc{{"version", io::kVersion},
           {"kind", "hydro"},
           {"config", io::dump_hydro_config(cfg)},
           {"state_count", hydro_state_count(cfg)},
           {"initial_state", {{"level", cfg.level(x0.level)}, {"price", x0.price}, {"rain", x0.rain}}},
           {"initial_value", sol.initial_value()},
           {"initial_policy", sol.policy.front()[b0][hydro_state_index(cfg, x0)]},
           {"value_t0", sol.value.front()[b0]},
           {"policy_t0", sol.policy.front()[b0]}};
  if (full) {
    doc["value"] = sol.value;
    doc["policy"] = sol.policy;
  }
  if (stats) {
    doc["simulation"] = {{"paths", stats->paths},
                         {"seed", seed},
                         {"mean_level", stats->mean_level},
                         {"p05_level", stats->p05_level},
                         {"min_level", stats->min_level},
                         {"max_level", stats->max_level},
                         {"mean_production", stats->mean_production}};
  }
  emit(doc);
  return kOk;
}

int check_cmd(const std::string& file, const std::string& triple, double tol, const Emit& emit) {
  const SwitchingProblem p = io::load_problem(io::read_file(file));
  const ValueField vf = solve_finite(p);
  const RbsdeTriple tr = triple.empty() ? construct_solution(p, vf)
                                        : io::load_triple(io::read_file(triple), static_cast<std::size_t>(p.m),
                                                          p.horizon(), p.size());
  VerifyOptions opt;
  opt.tol = tol;
  const VerificationReport rep = verify_solution(p, tr, {}, opt);

  std::vector<RandomVariable> samples;
  for (const auto& row : p.g) samples.insert(samples.end(), row.begin(), row.end());
  for (const auto& row : tr.Y) samples.insert(samples.end(), row.begin(), row.end());
  const AxiomReport ax = axioms_check(p.riskmap(), samples);
  json axioms = json::array();
  for (const AxiomCheck& c : ax.checks) {
    axioms.push_back({{"name", c.name},
                      {"claimed", c.claimed},
                      {"passed", c.passed},
                      {"evaluations", c.evaluations},
                      {"max_violation", c.max_violation}});
  }
  const bool ok = rep.passed() && ax.all_passed();
  emit({{"version", io::kVersion},
        {"kind", "check_report"},
        {"passed", ok},
        {"verification", io::dump_report(rep)},
        {"axioms", axioms}});
  return ok ? kOk : kVerification;
}

int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::Schema: return kSchema;
    case ErrorCode::AssumptionFailed: return kVerification;
    case ErrorCode::TooLarge:
    case ErrorCode::DivergentBound: return kGuard;
    default: return kUsage;
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Risk-aware optimal switching and stopping on finite filtered spaces", "riskswitch"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "worker threads (default: RISKSWITCH_THREADS or all cores)")
      ->check(CLI::NonNegativeNumber);

  std::string file;
  std::string extra;
  int start_mode = 0;
  int start_time = 0;
  double tol = 1e-9;
  double inf_tol = 1e-3;
  double limit = 1e6;
  int horizon = -1;
  bool window = false;
  int s = 1;
  double n = 10.0;
  bool no_delay = false;
  std::string config;
  std::optional<double> theta;
  std::size_t simulate = 0;
  std::uint64_t seed = 1;
  bool csv = false;
  bool full = false;

  auto* solve = app.add_subcommand("solve", "value field and optimal strategy");
  solve->add_option("file", file, "problem JSON")->required();
  solve->add_option("--start-mode", start_mode, "mode held before the start time");
  solve->add_option("--start-time", start_time, "start time");

  auto* rbsde = app.add_subcommand("rbsde", "RBSDE triple from the value field, or verify a given triple");
  rbsde->add_option("file", file, "problem JSON")->required();
  rbsde->add_option("--verify", extra, "triple JSON to verify");
  rbsde->add_option("--tol", tol, "verification tolerance");

  auto* stop = app.add_subcommand("stop", "optimal stopping value, stopping times and triple");
  stop->add_option("file", file, "stopping JSON")->required();

  auto* oracle = app.add_subcommand("oracle", "compare the recursion with strategy enumeration");
  oracle->add_option("file", file, "problem JSON")->required();
  oracle->add_option("--limit", limit, "largest strategy count per block");
  oracle->add_option("--tol", tol, "agreement tolerance");

  auto* infinite = app.add_subcommand("infinite", "truncated infinite-horizon value");
  infinite->add_option("file", file, "generator JSON")->required();
  infinite->add_option("--tol", inf_tol, "target error bound");
  infinite->add_option("--horizon", horizon, "fixed truncation horizon instead of --tol");
  infinite->add_flag("--window", window, "also build and verify the RBSDE on the window");

  auto* delay = app.add_subcommand("delay-demo", "joint versus separate risk under a delayed observation");
  delay->add_option("file", file, "problem JSON")->required();
  delay->add_option("--s", s, "time of the delayed observation");
  delay->add_option("--n", n, "separation parameter");
  delay->add_flag("--no-delay", no_delay, "use the filtration in the file as given");

  auto* hydro = app.add_subcommand("hydro", "hydropower bidding demo");
  hydro->add_option("--config", config, "configuration JSON (defaults otherwise)");
  hydro->add_option("--theta", theta, "entropic risk aversion, 0 for expectation")->check(CLI::NonNegativeNumber);
  hydro->add_option("--simulate", simulate, "number of simulated paths");
  hydro->add_option("--seed", seed, "simulation seed");
  hydro->add_flag("--csv", csv, "emit trajectory statistics as CSV");
  hydro->add_flag("--full", full, "include value and policy tables for every time and bid");

  auto* check = app.add_subcommand("check", "verify a triple and the risk axioms");
  check->add_option("file", file, "problem JSON")->required();
  check->add_option("--triple", extra, "triple JSON (constructed from the problem otherwise)");
  check->add_option("--tol", tol, "verification tolerance");

  app.fallthrough();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  if (threads > 0) set_thread_count(threads);
  const Emit emit{out};
  try {
    if (solve->parsed()) return solve_cmd(file, start_mode, start_time, emit);
    if (rbsde->parsed()) return rbsde_cmd(file, extra, tol, emit);
    if (stop->parsed()) return stop_cmd(file, emit);
    if (oracle->parsed()) return oracle_cmd(file, limit, tol, emit);
    if (infinite->parsed()) return infinite_cmd(file, inf_tol, horizon, window, emit);
    if (delay->parsed()) return delay_cmd(file, s, n, !no_delay, emit);
    if (hydro->parsed()) return hydro_cmd(config, theta, simulate, seed, csv, full, out, emit);
    if (check->parsed()) return check_cmd(file, extra, tol, emit);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}

}  // namespace riskswitch::cli
