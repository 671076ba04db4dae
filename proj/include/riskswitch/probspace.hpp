#pragma once

// Finite filtered probability spaces. Sub-sigma-algebras are partitions of the
// outcome set; measurability is block-constancy.

#include <cstddef>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "riskswitch/error.hpp"

namespace riskswitch {

using Mode = int;  // 0-based mode index

class OutcomeSpace {
 public:
  OutcomeSpace() = default;

  // Throws ZeroProbability / NonNormalized (tolerance 1e-12).
  static OutcomeSpace build(std::vector<std::string> ids, std::vector<double> probs);
  // Outcomes named w1..wn.
  static OutcomeSpace build(std::vector<double> probs);

  std::size_t size() const noexcept { return probs_.size(); }
  double prob(std::size_t k) const { return probs_[k]; }
  std::span<const double> probs() const noexcept { return probs_; }
  const std::vector<std::string>& ids() const noexcept { return ids_; }

 private:
  std::vector<std::string> ids_;
  std::vector<double> probs_;
};

// A real value per outcome.
class RandomVariable {
 public:
  RandomVariable() = default;
  explicit RandomVariable(std::vector<double> values) : values_(std::move(values)) {}
  RandomVariable(std::size_t n, double c) : values_(n, c) {}

  std::size_t size() const noexcept { return values_.size(); }
  double& operator[](std::size_t k) { return values_[k]; }
  double operator[](std::size_t k) const { return values_[k]; }
  const std::vector<double>& values() const noexcept { return values_; }
  auto begin() const noexcept { return values_.begin(); }
  auto end() const noexcept { return values_.end(); }

  bool is_finite() const noexcept;
  bool is_constant() const noexcept;

  RandomVariable& operator+=(const RandomVariable& o);
  RandomVariable& operator-=(const RandomVariable& o);
  RandomVariable& operator+=(double c);
  RandomVariable& operator-=(double c);
  RandomVariable& operator*=(double c);

  friend RandomVariable operator+(RandomVariable a, const RandomVariable& b) { return a += b; }
  friend RandomVariable operator-(RandomVariable a, const RandomVariable& b) { return a -= b; }
  friend RandomVariable operator+(RandomVariable a, double c) { return a += c; }
  friend RandomVariable operator-(RandomVariable a, double c) { return a -= c; }
  friend RandomVariable operator*(double c, RandomVariable a) { return a *= c; }
  friend RandomVariable operator-(RandomVariable a) { return a *= -1.0; }
  friend bool operator==(const RandomVariable&, const RandomVariable&) = default;

 private:
  std::vector<double> values_;
};

// Largest pointwise |a - b|.
double max_abs_diff(const RandomVariable& a, const RandomVariable& b);
RandomVariable pointwise_min(const RandomVariable& a, const RandomVariable& b);

class Partition {
 public:
  Partition() = default;

  // Blocks must be nonempty, disjoint and cover {0..n-1}; throws InvalidPartition.
  // Outcomes inside each block are stored in increasing order.
  static Partition build(std::size_t n, std::vector<std::vector<std::size_t>> blocks);
  static Partition trivial(std::size_t n);
  static Partition discrete(std::size_t n);

  std::size_t outcome_count() const noexcept { return block_of_.size(); }
  std::size_t block_count() const noexcept { return blocks_.size(); }
  const std::vector<std::size_t>& block(std::size_t b) const { return blocks_[b]; }
  const std::vector<std::vector<std::size_t>>& blocks() const noexcept { return blocks_; }
  std::size_t block_of(std::size_t outcome) const { return block_of_[outcome]; }

  // True iff every block of *this lies inside a block of `coarser`.
  bool refines(const Partition& coarser) const;

  friend bool operator==(const Partition& a, const Partition& b) { return a.block_of_ == b.block_of_; }

 private:
  std::vector<std::vector<std::size_t>> blocks_;
  std::vector<std::size_t> block_of_;
};

class Filtration {
 public:
  Filtration() = default;

  // Throws NotRefining if partition t+1 does not refine partition t.
  static Filtration build(std::vector<Partition> partitions);

  int horizon() const noexcept { return static_cast<int>(partitions_.size()) - 1; }
  std::size_t outcome_count() const noexcept {
    return partitions_.empty() ? 0 : partitions_.front().outcome_count();
  }
  const Partition& at(int t) const { return partitions_.at(static_cast<std::size_t>(t)); }
  const std::vector<Partition>& partitions() const noexcept { return partitions_; }

 private:
  std::vector<Partition> partitions_;
};

// Outcome space together with its information structure.
class FilteredSpace {
 public:
  static std::shared_ptr<const FilteredSpace> make(OutcomeSpace space, Filtration filtration);

  const OutcomeSpace& space() const noexcept { return space_; }
  const Filtration& filtration() const noexcept { return filtration_; }
  std::size_t size() const noexcept { return space_.size(); }
  int horizon() const noexcept { return filtration_.horizon(); }
  const Partition& at(int t) const { return filtration_.at(t); }

 private:
  FilteredSpace(OutcomeSpace s, Filtration f) : space_(std::move(s)), filtration_(std::move(f)) {}
  OutcomeSpace space_;
  Filtration filtration_;
};

bool is_measurable(const RandomVariable& x, const Partition& p);
bool is_measurable(std::span<const int> x, const Partition& p);

// Switching strategy from time `start` onwards; `initial` is the mode held at start-1.
struct Strategy {
  int start = 0;
  Mode initial = 0;
  std::vector<std::vector<Mode>> modes;  // modes[s - start][outcome], s = start..T

  int end() const noexcept { return start + static_cast<int>(modes.size()) - 1; }
  // Mode held at time s per outcome; s = start-1 gives the initial mode.
  std::vector<Mode> at(int s) const;

  // Constant strategy holding `mode` from `start`-1 through `horizon`.
  static Strategy constant(std::size_t n, int start, int horizon, Mode mode);
};

// True iff each modes[s] is constant on the blocks of partition s and valued in [0, m).
bool check_adapted(const Strategy& xi, const Filtration& g, int modes);

// Integer time per outcome.
using StoppingTime = std::vector<int>;

// True iff {tau = t} is a union of blocks of partition t for every t, and tau in [lo, T].
bool is_stopping_time(const StoppingTime& tau, const Filtration& g, int lo = 0);

// G_s = F_{s-1} for s in `delayed`, G_t = F_t otherwise.
Filtration delayed_filtration(const Filtration& f, const std::set<int>& delayed);

}  // namespace riskswitch
