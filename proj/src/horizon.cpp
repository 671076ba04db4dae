#include "riskswitch/horizon.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace riskswitch {

BoundSequence BoundSequence::geometric(double scale, double ratio) {
  RISKSWITCH_REQUIRE(scale >= 0.0 && std::isfinite(scale), ErrorCode::InvalidArgument,
                     "bound scale must be finite and nonnegative");
  RISKSWITCH_REQUIRE(ratio >= 0.0 && ratio < 1.0, ErrorCode::DivergentBound,
                     "geometric bound needs ratio in [0, 1)");
  BoundSequence b;
  b.kind_ = Kind::Geometric;
  b.scale_ = scale;
  b.ratio_ = ratio;
  return b;
}

BoundSequence BoundSequence::finite(std::vector<double> values) {
  for (double v : values) {
    RISKSWITCH_REQUIRE(v >= 0.0 && std::isfinite(v), ErrorCode::InvalidArgument,
                       "bound entries must be finite and nonnegative");
  }
  BoundSequence b;
  b.kind_ = Kind::Finite;
  b.values_ = std::move(values);
  return b;
}

BoundSequence BoundSequence::general(std::function<double(int)> k) {
  BoundSequence b;
  b.kind_ = Kind::General;
  b.fn_ = std::move(k);
  return b;
}

double BoundSequence::at(int t) const {
  switch (kind_) {
    case Kind::Geometric: return scale_ * std::pow(ratio_, t);
    case Kind::Finite: return t >= 0 && static_cast<std::size_t>(t) < values_.size() ? values_[static_cast<std::size_t>(t)] : 0.0;
    case Kind::General: return fn_(t);
  }
  return 0.0;
}

double BoundSequence::tail(int r) const {
  switch (kind_) {
    case Kind::Geometric: return scale_ * std::pow(ratio_, r + 1) / (1.0 - ratio_);
    case Kind::Finite: {
      double s = 0.0;
      for (std::size_t t = static_cast<std::size_t>(std::max(r + 1, 0)); t < values_.size(); ++t) s += values_[t];
      return s;
    }
    case Kind::General: {
      // Summed until terms are negligible; a sequence still contributing after 10^6 terms is
      // treated as divergent.
      constexpr int kMaxTerms = 1000000;
      double s = 0.0;
      for (int n = 0; n < kMaxTerms; ++n) {
        const double v = fn_(r + 1 + n);
        RISKSWITCH_REQUIRE(v >= 0.0 && std::isfinite(v), ErrorCode::DivergentBound,
                           "bound term is negative or not finite");
        s += v;
        if (v <= 1e-18 * std::max(1.0, s) && n > 16) return s;
      }
      throw Error(ErrorCode::DivergentBound, "bound tail did not converge numerically");
    }
  }
  return 0.0;
}

int choose_horizon(const BoundSequence& k, double tol, int max_r) {
  RISKSWITCH_REQUIRE(tol > 0.0, ErrorCode::InvalidArgument, "tolerance must be positive");
  for (int r = 0; r <= max_r; ++r) {
    if (2.0 * k.tail(r) <= tol) return r;
  }
  throw Error(ErrorCode::DivergentBound, "no truncation horizon up to " + std::to_string(max_r) + " meets the tolerance");
}

namespace {

void check_chain(const std::vector<std::vector<double>>& p, int initial) {
  RISKSWITCH_REQUIRE(!p.empty(), ErrorCode::InvalidArgument, "transition matrix is empty");
  for (const auto& row : p) {
    RISKSWITCH_REQUIRE(row.size() == p.size(), ErrorCode::InvalidArgument, "transition matrix must be square");
    double s = 0.0;
    for (double v : row) {
      RISKSWITCH_REQUIRE(v >= 0.0 && std::isfinite(v), ErrorCode::InvalidArgument, "negative transition probability");
      s += v;
    }
    RISKSWITCH_REQUIRE(std::abs(s - 1.0) <= 1e-12, ErrorCode::NonNormalized, "transition row does not sum to 1");
  }
  RISKSWITCH_REQUIRE(initial >= 0 && static_cast<std::size_t>(initial) < p.size(), ErrorCode::InvalidArgument,
                     "initial state out of range");
}

}  // namespace

double markov_path_count(const std::vector<std::vector<double>>& transition, int initial, int r) {
  check_chain(transition, initial);
  const std::size_t states = transition.size();
  std::vector<double> count(states, 0.0);
  count[static_cast<std::size_t>(initial)] = 1.0;
  for (int t = 0; t < r; ++t) {
    std::vector<double> next(states, 0.0);
    for (std::size_t a = 0; a < states; ++a) {
      for (std::size_t b = 0; b < states; ++b) {
        if (transition[a][b] > 0.0) next[b] += count[a];
      }
    }
    count = std::move(next);
  }
  return std::accumulate(count.begin(), count.end(), 0.0);
}

MarkovTree markov_tree(const std::vector<std::vector<double>>& transition, int initial, int r) {
  check_chain(transition, initial);
  RISKSWITCH_REQUIRE(r >= 0, ErrorCode::InvalidArgument, "horizon must be nonnegative");
  // Paths in lexicographic order, so paths sharing a prefix are contiguous.
  std::vector<std::vector<int>> paths{{initial}};
  std::vector<double> probs{1.0};
  for (int t = 0; t < r; ++t) {
    std::vector<std::vector<int>> next_paths;
    std::vector<double> next_probs;
    for (std::size_t k = 0; k < paths.size(); ++k) {
      const auto& row = transition[static_cast<std::size_t>(paths[k].back())];
      for (std::size_t b = 0; b < row.size(); ++b) {
        if (row[b] <= 0.0) continue;
        next_paths.push_back(paths[k]);
        next_paths.back().push_back(static_cast<int>(b));
        next_probs.push_back(probs[k] * row[b]);
      }
    }
    paths = std::move(next_paths);
    probs = std::move(next_probs);
  }
  const double total = std::accumulate(probs.begin(), probs.end(), 0.0);
  for (double& p : probs) p /= total;

  const std::size_t n = paths.size();
  std::vector<std::string> ids(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::string id = "s";
    for (std::size_t t = 0; t < paths[k].size(); ++t) id += (t ? "-" : "") + std::to_string(paths[k][t]);
    ids[k] = std::move(id);
  }
  std::vector<Partition> parts;
  for (int t = 0; t <= r; ++t) {
    std::vector<std::vector<std::size_t>> blocks;
    for (std::size_t k = 0; k < n; ++k) {
      const bool same = k > 0 && std::equal(paths[k].begin(), paths[k].begin() + t + 1, paths[k - 1].begin());
      if (!same) blocks.emplace_back();
      blocks.back().push_back(k);
    }
    parts.push_back(Partition::build(n, std::move(blocks)));
  }
  MarkovTree tree;
  tree.space = FilteredSpace::make(OutcomeSpace::build(std::move(ids), std::move(probs)),
                                   Filtration::build(std::move(parts)));
  tree.state.assign(static_cast<std::size_t>(r + 1), std::vector<int>(n));
  for (int t = 0; t <= r; ++t) {
    for (std::size_t k = 0; k < n; ++k) tree.state[static_cast<std::size_t>(t)][k] = paths[k][static_cast<std::size_t>(t)];
  }
  return tree;
}

namespace {

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

RandomVariable discounted(const MarkovTree& tree, int t, double alpha, const std::vector<double>& by_state) {
  const auto& st = tree.state[static_cast<std::size_t>(t)];
  const double scale = std::pow(alpha, t);
  RandomVariable x(st.size(), 0.0);
  for (std::size_t k = 0; k < st.size(); ++k) x[k] = scale * by_state[static_cast<std::size_t>(st[k])];
  return x;
}

void check_alpha(double alpha) {
  RISKSWITCH_REQUIRE(alpha >= 0.0 && alpha < 1.0, ErrorCode::DivergentBound, "discount must lie in [0, 1)");
}

}  // namespace

DiscountedMarkovGenerator::DiscountedMarkovGenerator(DiscountedMarkovParams params) : params_(std::move(params)) {
  check_alpha(params_.alpha);
  check_chain(params_.transition, params_.initial_state);
  params_.risk.validate();
  const std::size_t states = params_.transition.size();
  const std::size_t m = params_.g_hat.size();
  RISKSWITCH_REQUIRE(m >= 1, ErrorCode::InvalidArgument, "need at least one mode");
  for (const auto& row : params_.g_hat) {
    RISKSWITCH_REQUIRE(row.size() == states, ErrorCode::InvalidArgument, "g_hat needs one entry per state");
  }
  if (params_.c_hat.empty()) {
    params_.c_hat.assign(m, std::vector<std::vector<double>>(m, std::vector<double>(states, 0.0)));
  }
  RISKSWITCH_REQUIRE(params_.c_hat.size() == m, ErrorCode::InvalidArgument, "c_hat must be m x m");
  for (const auto& row : params_.c_hat) {
    RISKSWITCH_REQUIRE(row.size() == m, ErrorCode::InvalidArgument, "c_hat must be m x m");
    for (const auto& cell : row) {
      RISKSWITCH_REQUIRE(cell.size() == states, ErrorCode::InvalidArgument, "c_hat needs one entry per state");
    }
  }
}

std::size_t DiscountedMarkovGenerator::outcome_count(int r) const {
  const double c = markov_path_count(params_.transition, params_.initial_state, r);
  return c > 1e18 ? static_cast<std::size_t>(-1) : static_cast<std::size_t>(c);
}

SwitchingProblem DiscountedMarkovGenerator::problem(int r) const {
  const MarkovTree tree = markov_tree(params_.transition, params_.initial_state, r);
  const std::size_t m = params_.g_hat.size();
  Table g(m);
  std::vector<Table> c(m, Table(m));
  for (int t = 0; t <= r; ++t) {
    for (std::size_t i = 0; i < m; ++i) {
      g[i].push_back(discounted(tree, t, params_.alpha, params_.g_hat[i]));
      for (std::size_t j = 0; j < m; ++j) c[i][j].push_back(discounted(tree, t, params_.alpha, params_.c_hat[i][j]));
    }
  }
  return SwitchingProblem::make(tree.space, params_.risk, std::move(g), std::move(c));
}

BoundSequence DiscountedMarkovGenerator::bound() const {
  double gmax = 0.0;
  double cmax = 0.0;
  for (const auto& row : params_.g_hat) gmax = std::max(gmax, max_abs(row));
  for (const auto& row : params_.c_hat) {
    for (const auto& cell : row) cmax = std::max(cmax, max_abs(cell));
  }
  return BoundSequence::geometric(gmax + cmax, params_.alpha);
}

BoundSequence DiscountedMarkovGenerator::stay_bound(int j) const {
  // After folding, staying in j costs g_hat_j + c_hat_jj.
  const auto jj = static_cast<std::size_t>(j);
  double s = 0.0;
  for (std::size_t st = 0; st < params_.transition.size(); ++st) {
    s = std::max(s, std::abs(params_.g_hat[jj][st] + params_.c_hat[jj][jj][st]));
  }
  return BoundSequence::geometric(s, params_.alpha);
}

DiscountedMarkovStopping::DiscountedMarkovStopping(DiscountedStoppingParams params) : params_(std::move(params)) {
  check_alpha(params_.alpha);
  check_chain(params_.transition, params_.initial_state);
  params_.risk.validate();
  const std::size_t states = params_.transition.size();
  RISKSWITCH_REQUIRE(params_.f_hat.size() == states && params_.h_hat.size() == states, ErrorCode::InvalidArgument,
                     "f_hat and h_hat need one entry per state");
}

std::size_t DiscountedMarkovStopping::outcome_count(int r) const {
  const double c = markov_path_count(params_.transition, params_.initial_state, r);
  return c > 1e18 ? static_cast<std::size_t>(-1) : static_cast<std::size_t>(c);
}

StoppingProblem DiscountedMarkovStopping::problem(int r) const {
  const MarkovTree tree = markov_tree(params_.transition, params_.initial_state, r);
  StoppingProblem sp{tree.space, params_.risk, {}, {}};
  for (int t = 0; t <= r; ++t) {
    sp.f.push_back(discounted(tree, t, params_.alpha, params_.f_hat));
    sp.h.push_back(discounted(tree, t, params_.alpha, params_.h_hat));
  }
  return sp;
}

BoundSequence DiscountedMarkovStopping::bound() const {
  return BoundSequence::geometric(std::max(max_abs(params_.f_hat), max_abs(params_.h_hat)), params_.alpha);
}

BoundSequence DiscountedMarkovStopping::running_bound() const {
  return BoundSequence::geometric(max_abs(params_.f_hat), params_.alpha);
}

namespace {

void guard_size(std::size_t count, double limit, int r) {
  RISKSWITCH_REQUIRE(static_cast<double>(count) <= limit, ErrorCode::TooLarge,
                     "horizon " + std::to_string(r) + " needs " + std::to_string(count) + " outcomes");
}

TruncatedValue finish(SwitchingProblem problem, std::vector<double> tail, int r, double error_bound) {
  const std::size_t n = problem.size();
  std::vector<RandomVariable> terminal;
  for (double k : tail) terminal.emplace_back(n, k);
  TruncatedValue out;
  out.horizon = r;
  out.error_bound = error_bound;
  out.tail = std::move(tail);
  out.field = solve_finite(problem, std::move(terminal));
  const Partition& p0 = problem.space->at(0);
  for (const auto& row : out.field.V) {
    out.v0.push_back(row.front());
    std::vector<double> blocks;
    for (const auto& b : p0.blocks()) blocks.push_back(row.front()[b.front()]);
    out.v0_blocks.push_back(std::move(blocks));
  }
  out.problem = std::move(problem);
  return out;
}

}  // namespace

TruncatedValue truncated_solve_at(const CostGenerator& gen, int r, double outcome_limit) {
  RISKSWITCH_REQUIRE(r >= 0, ErrorCode::InvalidArgument, "horizon must be nonnegative");
  const BoundSequence k = gen.bound();
  const double bound = 2.0 * k.tail(r);
  guard_size(gen.outcome_count(r), outcome_limit, r);
  std::vector<double> tail;
  for (int j = 0; j < gen.modes(); ++j) tail.push_back(gen.stay_bound(j).tail(r));
  return finish(gen.problem(r), std::move(tail), r, bound);
}

TruncatedValue truncated_solve(const CostGenerator& gen, double tol, double outcome_limit) {
  return truncated_solve_at(gen, choose_horizon(gen.bound(), tol), outcome_limit);
}

WindowSolution infinite_rbsde_window(const CostGenerator& gen, int r, double tol) {
  WindowSolution out;
  out.value = truncated_solve_at(gen, r);
  out.triple = construct_solution(out.value.problem, out.value.field);
  VerifyOptions opt;
  opt.tol = tol;
  opt.anchor_terminal = false;
  out.report = verify_solution(out.value.problem, out.triple, out.value.field.terminal, opt);
  return out;
}

TruncatedValue infinite_stopping_at(const StoppingGenerator& gen, int r, double outcome_limit) {
  RISKSWITCH_REQUIRE(r >= 0, ErrorCode::InvalidArgument, "horizon must be nonnegative");
  const double bound = 2.0 * gen.bound().tail(r);
  guard_size(gen.outcome_count(r), outcome_limit, r);
  SwitchingProblem p = as_switching(gen.problem(r), false);
  return finish(std::move(p), {gen.running_bound().tail(r), 0.0}, r, bound);
}

TruncatedValue infinite_stopping(const StoppingGenerator& gen, double tol, double outcome_limit) {
  return infinite_stopping_at(gen, choose_horizon(gen.bound(), tol), outcome_limit);
}

}  // namespace riskswitch
