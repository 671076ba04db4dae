#pragma once

// Infinite-horizon switching and stopping through truncation with a certified error bound.

#include <functional>
#include <memory>
#include <vector>

#include "riskswitch/rbsde.hpp"
#include "riskswitch/stopping.hpp"
#include "riskswitch/switching.hpp"

namespace riskswitch {

// Nonnegative deterministic sequence k_t with a convergent sum.
class BoundSequence {
 public:
  // k_t = scale * ratio^t. Throws DivergentBound unless 0 <= ratio < 1.
  static BoundSequence geometric(double scale, double ratio);
  // k_t = values[t], zero afterwards.
  static BoundSequence finite(std::vector<double> values);
  // Arbitrary sequence; tails are summed numerically and checked for convergence.
  static BoundSequence general(std::function<double(int)> k);

  double at(int t) const;
  // K_{r+1} = sum over s >= r+1 of k_s. Throws DivergentBound.
  double tail(int r) const;

 private:
  enum class Kind { Geometric, Finite, General } kind_ = Kind::Finite;
  double scale_ = 0.0;
  double ratio_ = 0.0;
  std::vector<double> values_;
  std::function<double(int)> fn_;
};

inline double tail_bound(const BoundSequence& k, int r) { return k.tail(r); }

// Smallest r >= 0 with 2 K_{r+1} <= tol. Throws DivergentBound, or InvalidArgument for tol <= 0.
int choose_horizon(const BoundSequence& k, double tol, int max_r = 100000);

// Consistent family of finite-horizon problems indexed by the truncation horizon.
class CostGenerator {
 public:
  virtual ~CostGenerator() = default;
  virtual int modes() const = 0;
  virtual std::size_t outcome_count(int r) const = 0;
  virtual SwitchingProblem problem(int r) const = 0;
  // Dominates |g~_ij(t)| for all i, j.
  virtual BoundSequence bound() const = 0;
  // Dominates |g_j(t)|, the cost of staying in mode j.
  virtual BoundSequence stay_bound(int j) const = 0;
};

class StoppingGenerator {
 public:
  virtual ~StoppingGenerator() = default;
  virtual std::size_t outcome_count(int r) const = 0;
  virtual StoppingProblem problem(int r) const = 0;
  // Dominates |f(t)| and |h(t)|.
  virtual BoundSequence bound() const = 0;
  // Dominates |f(t)|.
  virtual BoundSequence running_bound() const = 0;
};

// Path tree of a finite Markov chain started in `initial`; outcomes are the positive-probability
// paths of length r+1 and partition t groups paths by their first t+1 states.
struct MarkovTree {
  std::shared_ptr<const FilteredSpace> space;
  std::vector<std::vector<int>> state;  // state[t][outcome]
};

double markov_path_count(const std::vector<std::vector<double>>& transition, int initial, int r);
MarkovTree markov_tree(const std::vector<std::vector<double>>& transition, int initial, int r);

struct DiscountedMarkovParams {
  double alpha = 0.5;
  std::vector<std::vector<double>> transition;
  std::vector<std::vector<double>> g_hat;               // [mode][state]
  std::vector<std::vector<std::vector<double>>> c_hat;  // [mode][mode][state]; empty means 0
  int initial_state = 0;
  RiskSpec risk;
};

// g_i(t) = alpha^t g_hat_i(state_t), c_ij(t) = alpha^t c_hat_ij(state_t).
class DiscountedMarkovGenerator : public CostGenerator {
 public:
  explicit DiscountedMarkovGenerator(DiscountedMarkovParams params);

  const DiscountedMarkovParams& params() const noexcept { return params_; }
  int modes() const override { return static_cast<int>(params_.g_hat.size()); }
  std::size_t outcome_count(int r) const override;
  SwitchingProblem problem(int r) const override;
  BoundSequence bound() const override;
  BoundSequence stay_bound(int j) const override;

 private:
  DiscountedMarkovParams params_;
};

struct DiscountedStoppingParams {
  double alpha = 0.5;
  std::vector<std::vector<double>> transition;
  std::vector<double> f_hat;  // [state]
  std::vector<double> h_hat;  // [state]
  int initial_state = 0;
  RiskSpec risk;
};

class DiscountedMarkovStopping : public StoppingGenerator {
 public:
  explicit DiscountedMarkovStopping(DiscountedStoppingParams params);

  const DiscountedStoppingParams& params() const noexcept { return params_; }
  std::size_t outcome_count(int r) const override;
  StoppingProblem problem(int r) const override;
  BoundSequence bound() const override;
  BoundSequence running_bound() const override;

 private:
  DiscountedStoppingParams params_;
};

struct TruncatedValue {
  int horizon = 0;                          // truncation horizon r
  double error_bound = 0.0;                 // 2 K_{r+1}
  std::vector<RandomVariable> v0;           // per mode, t = 0
  std::vector<std::vector<double>> v0_blocks;  // per mode, per block of partition 0
  std::vector<double> tail;                 // continuation K^j_{r+1} used past the horizon
  SwitchingProblem problem;
  ValueField field;
};

// Horizon-r problem solved with the deterministic continuation K^j_{r+1} (sum of the stay bound
// of mode j past r) in place of the stay-in-mode tail. The continuation dominates that tail, so
// the result is nonincreasing in r and lies within 2 K_{r+1} above the infinite-horizon value.
TruncatedValue truncated_solve_at(const CostGenerator& gen, int r, double outcome_limit = 1e6);
TruncatedValue truncated_solve(const CostGenerator& gen, double tol, double outcome_limit = 1e6);

struct WindowSolution {
  TruncatedValue value;
  RbsdeTriple triple;
  VerificationReport report;
};

// Triple on 0..r from the truncated value field, verified in window form.
WindowSolution infinite_rbsde_window(const CostGenerator& gen, int r, double tol = 1e-9);

// Stopping via the two-mode reduction without forced stopping at r. Mode 0 is running.
TruncatedValue infinite_stopping_at(const StoppingGenerator& gen, int r, double outcome_limit = 1e6);
TruncatedValue infinite_stopping(const StoppingGenerator& gen, double tol, double outcome_limit = 1e6);

}  // namespace riskswitch
