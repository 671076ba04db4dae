#include "riskswitch/riskmap.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace riskswitch {

bool RiskSpec::strongly_sensitive() const noexcept {
  switch (kind) {
    case RiskKind::Linear:
    case RiskKind::Entropic: return true;
    case RiskKind::WorstCase: return false;
    case RiskKind::CVaR: return alpha >= 1.0;
  }
  return false;
}

void RiskSpec::validate() const {
  if (kind == RiskKind::Entropic) {
    RISKSWITCH_REQUIRE(std::isfinite(theta) && theta > 0.0, ErrorCode::InvalidArgument,
                       "entropic theta must be > 0");
  }
  if (kind == RiskKind::CVaR) {
    RISKSWITCH_REQUIRE(alpha > 0.0 && alpha <= 1.0, ErrorCode::InvalidArgument,
                       "cvar alpha must lie in (0, 1]");
  }
}

std::string RiskSpec::name() const {
  std::ostringstream os;
  switch (kind) {
    case RiskKind::Linear: os << "linear"; break;
    case RiskKind::Entropic: os << "entropic(theta=" << theta << ")"; break;
    case RiskKind::WorstCase: os << "worst_case"; break;
    case RiskKind::CVaR: os << "cvar(alpha=" << alpha << ")"; break;
  }
  return os.str();
}

namespace {

double weighted_mean(std::span<const double> x, std::span<const double> w) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    num += w[k] * x[k];
    den += w[k];
  }
  return num / den;
}

double entropic(std::span<const double> x, std::span<const double> w, double theta) {
  const double lo = *std::min_element(x.begin(), x.end());
  double s = 0.0;
  double den = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    s += w[k] * std::exp(-theta * (x[k] - lo));
    den += w[k];
  }
  return lo - std::log(s / den) / theta;
}

double cvar(std::span<const double> x, std::span<const double> w, double alpha) {
  const std::size_t n = x.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  double total = 0.0;
  for (double v : w) total += v;
  // Suffix sums over strictly later sorted positions; ties contribute (x - z)^+ = 0.
  double tail_w = 0.0;
  double tail_wx = 0.0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t pos = n; pos-- > 0;) {
    const double z = x[order[pos]];
    const double excess = tail_wx - z * tail_w;
    best = std::min(best, z + excess / (alpha * total));
    tail_w += w[order[pos]];
    tail_wx += w[order[pos]] * z;
  }
  return best;
}

}  // namespace

double evaluate_static(const RiskSpec& risk, std::span<const double> values, std::span<const double> weights) {
  const bool constant = std::adjacent_find(values.begin(), values.end(), std::not_equal_to<>()) == values.end();
  if (constant) return values.front();
  switch (risk.kind) {
    case RiskKind::Linear: return weighted_mean(values, weights);
    case RiskKind::Entropic: return entropic(values, weights, risk.theta);
    case RiskKind::WorstCase: return *std::max_element(values.begin(), values.end());
    case RiskKind::CVaR:
      if (risk.alpha >= 1.0) return weighted_mean(values, weights);
      return cvar(values, weights, risk.alpha);
  }
  return 0.0;
}

ConditionalRisk::ConditionalRisk(RiskSpec spec, std::shared_ptr<const FilteredSpace> space)
    : spec_(spec), space_(std::move(space)) {
  spec_.validate();
  RISKSWITCH_REQUIRE(space_ != nullptr, ErrorCode::InvalidArgument, "null filtered space");
}

RandomVariable ConditionalRisk::rho(int t, const RandomVariable& x) const {
  const Partition& p = space_->at(t);
  const auto probs = space_->space().probs();
  RandomVariable out(x.size(), 0.0);
  std::vector<double> vals;
  std::vector<double> wts;
  for (const auto& block : p.blocks()) {
    double v;
    if (block.size() == 1) {
      v = x[block.front()];
    } else {
      vals.clear();
      wts.clear();
      for (std::size_t k : block) {
        vals.push_back(x[k]);
        wts.push_back(probs[k]);
      }
      v = evaluate_static(spec_, vals, wts);
    }
    for (std::size_t k : block) out[k] = v;
  }
  return out;
}

RandomVariable ConditionalRisk::aggregate(int s, int t, std::span<const RandomVariable> w) const {
  RISKSWITCH_REQUIRE(s <= t && w.size() == static_cast<std::size_t>(t - s + 1), ErrorCode::InvalidArgument,
                     "aggregate expects W_s..W_t");
  RandomVariable acc = rho(t, w.back());
  for (int r = t - 1; r >= s; --r) acc = rho(r, w[static_cast<std::size_t>(r - s)] + acc);
  return acc;
}

RandomVariable ConditionalRisk::aggregate_stopped(const StoppingTime& from, const StoppingTime& to,
                                                  std::span<const RandomVariable> f,
                                                  std::span<const RandomVariable> w) const {
  const Filtration& g = space_->filtration();
  RISKSWITCH_REQUIRE(is_stopping_time(from, g), ErrorCode::NotAStoppingTime, "start time is not a stopping time");
  RISKSWITCH_REQUIRE(is_stopping_time(to, g), ErrorCode::NotAStoppingTime, "end time is not a stopping time");
  const int horizon = g.horizon();
  const std::size_t n = size();
  RISKSWITCH_REQUIRE(w.size() == static_cast<std::size_t>(horizon + 1), ErrorCode::InvalidArgument,
                     "W must be indexed 0..T");
  RISKSWITCH_REQUIRE(f.size() >= static_cast<std::size_t>(horizon), ErrorCode::InvalidArgument,
                     "f must be indexed 0..T-1");

  RandomVariable result(n, 0.0);
  RandomVariable next(n, 0.0);  // rho_{t+1,to}
  for (int t = horizon; t >= 0; --t) {
    RandomVariable stop_here = rho(t, w[static_cast<std::size_t>(t)]);
    RandomVariable cont = t < horizon ? rho(t, f[static_cast<std::size_t>(t)] + next) : RandomVariable(n, 0.0);
    RandomVariable here(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
      if (to[k] == t) here[k] = stop_here[k];
      else if (to[k] > t) here[k] = cont[k];
      if (from[k] == t) result[k] = here[k];
    }
    next = std::move(here);
  }
  return result;
}

DoobDecomposition ConditionalRisk::doob_decompose(std::span<const RandomVariable> w) const {
  RISKSWITCH_REQUIRE(!w.empty() && w.size() <= static_cast<std::size_t>(horizon() + 1),
                     ErrorCode::InvalidArgument, "W must be indexed 0..n-1 with n <= T+1");
  for (std::size_t t = 0; t < w.size(); ++t) {
    RISKSWITCH_REQUIRE(is_measurable(w[t], space_->at(static_cast<int>(t))), ErrorCode::NotAdapted,
                       "W_" + std::to_string(t) + " is not measurable at time " + std::to_string(t));
  }
  const std::size_t n = size();
  DoobDecomposition d;
  d.martingale.assign(1, RandomVariable(n, 0.0));
  d.predictable.assign(1, RandomVariable(n, 0.0));
  for (std::size_t t = 0; t + 1 < w.size(); ++t) {
    const RandomVariable r = rho(static_cast<int>(t), w[t + 1]);
    d.martingale.push_back(d.martingale.back() + (w[t + 1] - r));
    d.predictable.push_back(d.predictable.back() + (r - w[t]));
  }
  return d;
}

bool AxiomReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const AxiomCheck& c) { return !c.claimed || c.passed; });
}

const AxiomCheck* AxiomReport::find(const std::string& name) const {
  for (const auto& c : checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

namespace {

constexpr double kAxiomTol = 1e-10;

void record(AxiomCheck& c, double violation) {
  ++c.evaluations;
  c.max_violation = std::max(c.max_violation, violation);
  if (violation > kAxiomTol) c.passed = false;
}

}  // namespace

AxiomReport axioms_check(const ConditionalRisk& risk, std::span<const RandomVariable> samples, bool check_strong) {
  const std::size_t n = risk.size();
  AxiomCheck normalisation{"normalisation"};
  AxiomCheck translation{"translation_invariance"};
  AxiomCheck monotonicity{"monotonicity"};
  AxiomCheck locality{"conditional_locality"};
  AxiomCheck strong{"strong_sensitivity"};
  strong.claimed = check_strong;

  for (int t = 0; t <= risk.horizon(); ++t) {
    const Partition& p = risk.space().at(t);
    const RandomVariable zero(n, 0.0);
    const RandomVariable r0 = risk.rho(t, zero);
    ++normalisation.evaluations;
    for (double v : r0) {
      if (v != 0.0) {
        normalisation.passed = false;
        normalisation.max_violation = std::max(normalisation.max_violation, std::abs(v));
      }
    }

    // G_t-measurable shifts: sample images under rho_t plus measurable samples themselves.
    std::vector<RandomVariable> shifts;
    for (const auto& z : samples) {
      if (is_measurable(z, p)) shifts.push_back(z);
      shifts.push_back(risk.rho(t, z));
    }

    for (std::size_t a = 0; a < samples.size(); ++a) {
      const RandomVariable& x = samples[a];
      const RandomVariable rx = risk.rho(t, x);
      for (const auto& z : shifts) {
        record(translation, max_abs_diff(risk.rho(t, z + x), z + rx));
      }
      for (std::size_t b = 0; b < samples.size(); ++b) {
        const RandomVariable& y = samples[b];
        RandomVariable lo = x;
        RandomVariable hi = x;
        for (std::size_t k = 0; k < n; ++k) {
          lo[k] = std::min(x[k], y[k]);
          hi[k] = std::max(x[k], y[k]);
        }
        const RandomVariable rlo = risk.rho(t, lo);
        const RandomVariable rhi = risk.rho(t, hi);
        double worst = 0.0;
        for (std::size_t k = 0; k < n; ++k) worst = std::max(worst, rlo[k] - rhi[k]);
        record(monotonicity, worst);

        // Events: each block, and a pseudo-random union of blocks keyed on (a, b).
        const RandomVariable ry = risk.rho(t, y);
        const std::size_t nb = p.block_count();
        for (std::size_t e = 0; e <= nb; ++e) {
          std::vector<bool> in_event(nb, false);
          if (e < nb) {
            in_event[e] = true;
          } else {
            for (std::size_t blk = 0; blk < nb; ++blk) {
              in_event[blk] = (((blk + 1) * 2654435761u + a * 40503u + b) >> 4) & 1u;
            }
          }
          RandomVariable mixed = x;
          RandomVariable expected = rx;
          for (std::size_t k = 0; k < n; ++k) {
            if (!in_event[p.block_of(k)]) {
              mixed[k] = y[k];
              expected[k] = ry[k];
            }
          }
          record(locality, max_abs_diff(risk.rho(t, mixed), expected));
          if (nb == 1) break;
        }
      }

      if (check_strong) {
        double scale = 1.0;
        for (double v : x) scale = std::max(scale, std::abs(v));
        const double bump = 1e-3 * scale;
        for (std::size_t k = 0; k < n; ++k) {
          RandomVariable y = x;
          y[k] += bump;
          const double gain = risk.rho(t, y)[k] - rx[k];
          ++strong.evaluations;
          if (!(gain > 0.0)) {
            strong.passed = false;
            strong.max_violation = std::max(strong.max_violation, bump);
          }
        }
      }
    }
  }
  return AxiomReport{{normalisation, translation, monotonicity, locality, strong}};
}

}  // namespace riskswitch
