#pragma once

// Filtered random variables, iterated prediction processes and adapted
// distributions, plus the inverse direction: checking that a nested law is a
// consistently terminating martingale law and building its canonical
// representative.

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fpt/finprob.hpp"
#include "fpt/nested.hpp"

namespace fpt {

class FilteredProcess;

// A probability space with an N-step filtration and an F_N-measurable value.
// Level-0 values are points over `states` (one label for a state, N labels
// for a path); higher levels come out of pp().
class FilteredRandomVariable {
 public:
  // Throws kMissingValue (wrong number of values), kUnknownState,
  // kNotAdapted (value not F_N-measurable), kSpaceMismatch.
  FilteredRandomVariable(std::shared_ptr<const StateSpace> states, FiniteProbSpace space,
                         Filtration filtration, std::vector<NestedValue> values);

  [[nodiscard]] const StateSpace& states() const { return *states_; }
  [[nodiscard]] const std::shared_ptr<const StateSpace>& states_ptr() const {
    return states_;
  }
  [[nodiscard]] const FiniteProbSpace& space() const { return space_; }
  [[nodiscard]] const Filtration& filtration() const { return filtration_; }
  [[nodiscard]] std::size_t timesteps() const { return filtration_.timesteps(); }
  [[nodiscard]] const std::vector<NestedValue>& values() const { return values_; }
  [[nodiscard]] NestedValue value(std::size_t atom) const { return values_[atom]; }
  // Throws kMissingValue.
  [[nodiscard]] NestedValue value(const std::string& atom_id) const;
  [[nodiscard]] int level() const { return values_.front().level(); }

  // Same space and filtration, new values.
  [[nodiscard]] FilteredRandomVariable with_values(std::vector<NestedValue> values) const;

 private:
  std::shared_ptr<const StateSpace> states_;
  FiniteProbSpace space_;
  Filtration filtration_;
  std::vector<NestedValue> values_;
};

// An adapted state-valued path: path(ω)[t-1] is F_t-measurable.
class FilteredProcess {
 public:
  // Throws kNotAPath (wrong path length), kUnknownState, kNotAdapted.
  FilteredProcess(std::shared_ptr<const StateSpace> states, FiniteProbSpace space,
                  Filtration filtration, std::vector<std::vector<std::string>> paths);

  [[nodiscard]] const StateSpace& states() const { return *states_; }
  [[nodiscard]] const std::shared_ptr<const StateSpace>& states_ptr() const {
    return states_;
  }
  [[nodiscard]] const FiniteProbSpace& space() const { return space_; }
  [[nodiscard]] const Filtration& filtration() const { return filtration_; }
  [[nodiscard]] std::size_t timesteps() const { return filtration_.timesteps(); }
  [[nodiscard]] const std::vector<std::vector<std::string>>& paths() const {
    return paths_;
  }
  // 1-based time.
  [[nodiscard]] const std::string& at(std::size_t atom, std::size_t t) const {
    return paths_[atom][t - 1];
  }

  // The process as an S^N-valued filtered random variable.
  [[nodiscard]] FilteredRandomVariable as_frv() const;

 private:
  std::shared_ptr<const StateSpace> states_;
  FiniteProbSpace space_;
  Filtration filtration_;
  std::vector<std::vector<std::string>> paths_;
};

// pp^n. pp(x, 0) is x itself.
FilteredRandomVariable pp(const FilteredRandomVariable& x, int n);
// pp^0 .. pp^n, sharing the work.
std::vector<FilteredRandomVariable> pp_levels(const FilteredRandomVariable& x, int n);

// L(pp^n(x)).
NestedLaw adapted_distribution(const FilteredRandomVariable& x, int n);

// Throws kIncomparable on different N or state spaces.
bool equiv_rank(const FilteredRandomVariable& x, const FilteredRandomVariable& y, int n);

struct ConsistencyReport {
  bool ok = true;
  // Names the first violated identity when !ok.
  std::string diagnostic;
};

// Throws kMalformedDistribution when support points have mismatched shapes.
ConsistencyReport check_consistently_terminating(const NestedLaw& mu);
bool is_consistently_terminating(const NestedLaw& mu);

// Atoms z1, z2, ... follow the canonical support order. Throws kNotConsistent.
FilteredRandomVariable canonical_representative(const NestedLaw& mu,
                                                std::shared_ptr<const StateSpace> states);

int saturation_rank(const FilteredRandomVariable& x);
// The rank-k adapted distribution for k >= N-1, after checking that pp^k is a
// function of pp^{N-1}. Throws kInvalidArgument for k < N-1.
NestedLaw stabilized(const FilteredRandomVariable& x, int k);

// Throws kNotAPath unless the value is a level-0 path with N coordinates.
bool is_adapted(const FilteredRandomVariable& x);

// The constant-then-jump path (s0, ..., s0, X) of a state-valued x.
FilteredProcess iota(const FilteredRandomVariable& x, const std::string& s0);

// f ⋄ x for a total map between finite state spaces, applied to every label.
// Throws kUnknownState when f misses a used label or hits a label outside
// `target`.
FilteredRandomVariable diamond(const FilteredRandomVariable& x,
                               const std::map<std::string, std::string>& f,
                               std::shared_ptr<const StateSpace> target);

}  // namespace fpt
