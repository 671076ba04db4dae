#include "riskswitch/probspace.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace riskswitch {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::ZeroProbability: return "ZeroProbability";
    case ErrorCode::NonNormalized: return "NonNormalized";
    case ErrorCode::InvalidPartition: return "InvalidPartition";
    case ErrorCode::NotRefining: return "NotRefining";
    case ErrorCode::NotAdapted: return "NotAdapted";
    case ErrorCode::NotAStoppingTime: return "NotAStoppingTime";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::DivergentBound: return "DivergentBound";
    case ErrorCode::AssumptionFailed: return "AssumptionFailed";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Schema: return "Schema";
  }
  return "Unknown";
}

OutcomeSpace OutcomeSpace::build(std::vector<std::string> ids, std::vector<double> probs) {
  RISKSWITCH_REQUIRE(!probs.empty(), ErrorCode::InvalidArgument, "outcome space is empty");
  RISKSWITCH_REQUIRE(ids.size() == probs.size(), ErrorCode::InvalidArgument,
                     "outcome and probability lists differ in length");
  double total = 0.0;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    RISKSWITCH_REQUIRE(std::isfinite(probs[k]) && probs[k] > 0.0, ErrorCode::ZeroProbability,
                       "outcome '" + ids[k] + "' has non-positive probability");
    total += probs[k];
  }
  RISKSWITCH_REQUIRE(std::abs(total - 1.0) <= 1e-12, ErrorCode::NonNormalized,
                     "probabilities sum to " + std::to_string(total));
  OutcomeSpace s;
  s.ids_ = std::move(ids);
  s.probs_ = std::move(probs);
  return s;
}

OutcomeSpace OutcomeSpace::build(std::vector<double> probs) {
  std::vector<std::string> ids(probs.size());
  for (std::size_t k = 0; k < ids.size(); ++k) ids[k] = "w" + std::to_string(k + 1);
  return build(std::move(ids), std::move(probs));
}

bool RandomVariable::is_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

bool RandomVariable::is_constant() const noexcept {
  return std::adjacent_find(values_.begin(), values_.end(), std::not_equal_to<>()) == values_.end();
}

RandomVariable& RandomVariable::operator+=(const RandomVariable& o) {
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += o.values_[k];
  return *this;
}

RandomVariable& RandomVariable::operator-=(const RandomVariable& o) {
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] -= o.values_[k];
  return *this;
}

RandomVariable& RandomVariable::operator+=(double c) {
  for (double& v : values_) v += c;
  return *this;
}

RandomVariable& RandomVariable::operator-=(double c) {
  for (double& v : values_) v -= c;
  return *this;
}

RandomVariable& RandomVariable::operator*=(double c) {
  for (double& v : values_) v *= c;
  return *this;
}

double max_abs_diff(const RandomVariable& a, const RandomVariable& b) {
  double worst = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) worst = std::max(worst, std::abs(a[k] - b[k]));
  return worst;
}

RandomVariable pointwise_min(const RandomVariable& a, const RandomVariable& b) {
  RandomVariable out = a;
  for (std::size_t k = 0; k < a.size(); ++k) out[k] = std::min(a[k], b[k]);
  return out;
}

Partition Partition::build(std::size_t n, std::vector<std::vector<std::size_t>> blocks) {
  constexpr std::size_t unset = static_cast<std::size_t>(-1);
  Partition p;
  p.block_of_.assign(n, unset);
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    RISKSWITCH_REQUIRE(!blocks[b].empty(), ErrorCode::InvalidPartition, "empty block");
    std::sort(blocks[b].begin(), blocks[b].end());
    for (std::size_t k : blocks[b]) {
      RISKSWITCH_REQUIRE(k < n, ErrorCode::InvalidPartition,
                         "outcome index " + std::to_string(k) + " out of range");
      RISKSWITCH_REQUIRE(p.block_of_[k] == unset, ErrorCode::InvalidPartition,
                         "outcome " + std::to_string(k) + " appears in two blocks");
      p.block_of_[k] = b;
    }
  }
  for (std::size_t k = 0; k < n; ++k) {
    RISKSWITCH_REQUIRE(p.block_of_[k] != unset, ErrorCode::InvalidPartition,
                       "outcome " + std::to_string(k) + " not covered");
  }
  p.blocks_ = std::move(blocks);
  return p;
}

Partition Partition::trivial(std::size_t n) {
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), std::size_t{0});
  return build(n, {std::move(all)});
}

Partition Partition::discrete(std::size_t n) {
  std::vector<std::vector<std::size_t>> blocks(n);
  for (std::size_t k = 0; k < n; ++k) blocks[k] = {k};
  return build(n, std::move(blocks));
}

bool Partition::refines(const Partition& coarser) const {
  if (coarser.outcome_count() != outcome_count()) return false;
  for (const auto& b : blocks_) {
    const std::size_t target = coarser.block_of(b.front());
    for (std::size_t k : b) {
      if (coarser.block_of(k) != target) return false;
    }
  }
  return true;
}

Filtration Filtration::build(std::vector<Partition> partitions) {
  RISKSWITCH_REQUIRE(!partitions.empty(), ErrorCode::InvalidArgument, "filtration has no partitions");
  const std::size_t n = partitions.front().outcome_count();
  for (std::size_t t = 0; t < partitions.size(); ++t) {
    RISKSWITCH_REQUIRE(partitions[t].outcome_count() == n, ErrorCode::InvalidPartition,
                       "partition " + std::to_string(t) + " is over a different outcome set");
    if (t > 0) {
      RISKSWITCH_REQUIRE(partitions[t].refines(partitions[t - 1]), ErrorCode::NotRefining,
                         "partition " + std::to_string(t) + " does not refine partition " +
                             std::to_string(t - 1));
    }
  }
  Filtration f;
  f.partitions_ = std::move(partitions);
  return f;
}

std::shared_ptr<const FilteredSpace> FilteredSpace::make(OutcomeSpace space, Filtration filtration) {
  RISKSWITCH_REQUIRE(space.size() == filtration.outcome_count(), ErrorCode::InvalidArgument,
                     "filtration and outcome space sizes differ");
  return std::shared_ptr<const FilteredSpace>(new FilteredSpace(std::move(space), std::move(filtration)));
}

namespace {

template <class Seq>
bool block_constant(const Seq& x, const Partition& p) {
  if (x.size() != p.outcome_count()) return false;
  for (const auto& b : p.blocks()) {
    const auto first = x[b.front()];
    for (std::size_t k : b) {
      if (x[k] != first) return false;
    }
  }
  return true;
}

}  // namespace

bool is_measurable(const RandomVariable& x, const Partition& p) { return block_constant(x, p); }

bool is_measurable(std::span<const int> x, const Partition& p) { return block_constant(x, p); }

std::vector<Mode> Strategy::at(int s) const {
  if (s == start - 1) {
    const std::size_t n = modes.empty() ? 0 : modes.front().size();
    return std::vector<Mode>(n, initial);
  }
  return modes.at(static_cast<std::size_t>(s - start));
}

Strategy Strategy::constant(std::size_t n, int start, int horizon, Mode mode) {
  Strategy xi;
  xi.start = start;
  xi.initial = mode;
  xi.modes.assign(static_cast<std::size_t>(horizon - start + 1), std::vector<Mode>(n, mode));
  return xi;
}

bool check_adapted(const Strategy& xi, const Filtration& g, int modes) {
  if (xi.initial < 0 || xi.initial >= modes) return false;
  if (xi.start < 0 || xi.end() > g.horizon()) return false;
  for (std::size_t idx = 0; idx < xi.modes.size(); ++idx) {
    const auto& row = xi.modes[idx];
    if (std::any_of(row.begin(), row.end(), [&](Mode v) { return v < 0 || v >= modes; })) return false;
    if (!is_measurable(std::span<const int>(row), g.at(xi.start + static_cast<int>(idx)))) return false;
  }
  return true;
}

bool is_stopping_time(const StoppingTime& tau, const Filtration& g, int lo) {
  if (tau.size() != g.outcome_count()) return false;
  const int horizon = g.horizon();
  for (int v : tau) {
    if (v < lo || v > horizon) return false;
  }
  for (int t = lo; t <= horizon; ++t) {
    const Partition& p = g.at(t);
    for (const auto& b : p.blocks()) {
      const bool first = tau[b.front()] == t;
      for (std::size_t k : b) {
        if ((tau[k] == t) != first) return false;
      }
    }
  }
  return true;
}

Filtration delayed_filtration(const Filtration& f, const std::set<int>& delayed) {
  std::vector<Partition> parts = f.partitions();
  for (int s : delayed) {
    RISKSWITCH_REQUIRE(s >= 1 && s <= f.horizon(), ErrorCode::InvalidArgument,
                       "delayed time " + std::to_string(s) + " outside 1..T");
    parts[static_cast<std::size_t>(s)] = f.at(s - 1);
  }
  return Filtration::build(std::move(parts));
}

}  // namespace riskswitch
