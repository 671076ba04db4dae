#pragma once

// Conditional risk mappings on a finite filtered space, evaluated blockwise.
// Orientation: costs. Larger rho means riskier.

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "riskswitch/probspace.hpp"

namespace riskswitch {

enum class RiskKind { Linear, Entropic, WorstCase, CVaR };

struct RiskSpec {
  RiskKind kind = RiskKind::Linear;
  double theta = 1.0;  // entropic, > 0
  double alpha = 1.0;  // cvar tail level, in (0, 1]

  static RiskSpec linear() { return {}; }
  static RiskSpec entropic(double theta) { return {RiskKind::Entropic, theta, 1.0}; }
  static RiskSpec worst_case() { return {RiskKind::WorstCase, 1.0, 1.0}; }
  static RiskSpec cvar(double alpha) { return {RiskKind::CVaR, 1.0, alpha}; }

  // Analytic property of the functional, not detected numerically.
  bool strongly_sensitive() const noexcept;
  void validate() const;
  std::string name() const;
};

// Static functional of the law (values, weights) on one block. Weights need not be normalised.
//   linear      weighted mean
//   entropic    -(1/theta) log E[exp(-theta X)], via a max-shifted sum
//   worst_case  max
//   cvar        min over attained z of z + E[(X - z)^+] / alpha
double evaluate_static(const RiskSpec& risk, std::span<const double> values, std::span<const double> weights);

struct DoobDecomposition {
  std::vector<RandomVariable> martingale;   // M, M_0 = 0
  std::vector<RandomVariable> predictable;  // A, A_0 = 0
};

// The family {rho_t} generated by a static functional on a filtered space.
class ConditionalRisk {
 public:
  ConditionalRisk(RiskSpec spec, std::shared_ptr<const FilteredSpace> space);

  const RiskSpec& spec() const noexcept { return spec_; }
  const FilteredSpace& space() const noexcept { return *space_; }
  const std::shared_ptr<const FilteredSpace>& space_ptr() const noexcept { return space_; }
  int horizon() const noexcept { return space_->horizon(); }
  std::size_t size() const noexcept { return space_->size(); }

  // rho_t(X): block-constant on partition t.
  RandomVariable rho(int t, const RandomVariable& x) const;
  RandomVariable operator()(int t, const RandomVariable& x) const { return rho(t, x); }

  // rho_{s,t}(W_s, ..., W_t) with w[k] = W_{s+k}.
  RandomVariable aggregate(int s, int t, std::span<const RandomVariable> w) const;

  // rho_{from,to}(f_from, ..., f_{to-1}, W_to) for stopping times; f and w are indexed by
  // absolute time 0..T. Zero on {to < from}. Throws NotAStoppingTime.
  RandomVariable aggregate_stopped(const StoppingTime& from, const StoppingTime& to,
                                   std::span<const RandomVariable> f,
                                   std::span<const RandomVariable> w) const;

  // w[t] for t = 0..n-1, adapted. Throws NotAdapted.
  DoobDecomposition doob_decompose(std::span<const RandomVariable> w) const;

 private:
  RiskSpec spec_;
  std::shared_ptr<const FilteredSpace> space_;
};

struct AxiomCheck {
  std::string name;
  bool claimed = true;
  bool passed = true;
  std::size_t evaluations = 0;
  double max_violation = 0.0;
};

struct AxiomReport {
  std::vector<AxiomCheck> checks;

  bool all_passed() const;
  const AxiomCheck* find(const std::string& name) const;
};

// Normalisation, conditional translation invariance, monotonicity, conditional locality and
// (when check_strong) strong sensitivity, over the sample set at every t. Tolerance 1e-10.
AxiomReport axioms_check(const ConditionalRisk& risk, std::span<const RandomVariable> samples,
                         bool check_strong);
inline AxiomReport axioms_check(const ConditionalRisk& risk, std::span<const RandomVariable> samples) {
  return axioms_check(risk, samples, risk.spec().strongly_sensitive());
}

}  // namespace riskswitch
