#pragma once

// Exact optimal stopping by backward induction, and a bounded search for
// rank-1 equivalent processes that optimal stopping tells apart.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fpt/afdsl.hpp"
#include "fpt/prediction.hpp"

namespace fpt {

// Reward g(state, t) for t = 1..N, either tabulated or as one rank-0 term per
// timestep evaluated at the current state.
class RewardSpec {
 public:
  // table[t - 1] maps state label -> reward.
  static RewardSpec from_table(std::vector<std::map<std::string, Rational>> table);
  static RewardSpec from_terms(std::vector<Term> terms);
  static RewardSpec constant(std::size_t timesteps, Rational c);

  [[nodiscard]] std::size_t timesteps() const;

  // Throws kBadTimestep on a timestep mismatch, kMissingValue when the table
  // misses a state, kInvalidArgument for terms of positive rank.
  void validate(const StateSpace& states, std::size_t timesteps) const;

  // The table over `states`; terms are evaluated once per (state, t).
  [[nodiscard]] std::vector<std::map<std::string, Rational>> tabulate(
      std::shared_ptr<const StateSpace> states) const;

 private:
  std::vector<std::map<std::string, Rational>> table_;
  std::vector<Term> terms_;
};

struct SnellResult {
  Rational value;
  // envelope[t - 1][atom] = V_t, continuation[t - 1][atom] = E[V_{t+1} | F_t]
  // (equal to V_N at t = N), stop[t - 1][atom] = whether the rule stops at t.
  std::vector<std::vector<Rational>> envelope;
  std::vector<std::vector<Rational>> continuation;
  std::vector<std::vector<bool>> stop;
  // First stopping time of the rule per atom, 1-based.
  std::vector<std::size_t> tau;
};

// V_N = g(X_N, N), V_t = max(g(X_t, t), E[V_{t+1} | F_t]); value = E[V_1].
// The rule stops when the reward is at least the continuation value.
SnellResult snell(const FilteredProcess& x, const RewardSpec& g);
// For variables whose values are paths; throws kNotAdapted when the path is
// not adapted and kNotAPath when the values are not level-0 paths of length N.
SnellResult snell(const FilteredRandomVariable& x, const RewardSpec& g);

struct SearchSpace {
  std::size_t max_atoms = 8;
  std::size_t max_steps = 4;
  std::size_t max_denominator = 4;
  // Random rewards tried per candidate pair, on the grid {0, 1/12, ..., 1}.
  std::size_t reward_samples = 500;
  std::uint32_t seed = 1;
  // Candidate pairs (equal rank-1, distinct saturated laws) to try.
  std::size_t max_candidates = 20000;
  // Instances to enumerate before giving up.
  std::size_t max_instances = 2000000;
};

struct SeparationWitness {
  FilteredProcess x;
  FilteredProcess y;
  RewardSpec reward;
  Rational value_x;
  Rational value_y;
};

// x and y are rank-1 equivalent and snell(x, g) != snell(y, g).
bool separates(const FilteredProcess& x, const FilteredProcess& y, const RewardSpec& g);

// Enumerates binary-state processes with N = 3..max_steps (N <= 2 cannot
// separate: rank 1 is then saturated), atoms ascending, nonincreasing weights
// with denominators <= max_denominator. Throws kNotFound when the budget runs
// out and kInvalidArgument when the space exceeds N <= 4, |atoms| <= 8,
// denominators <= 4.
SeparationWitness find_rank_separation(const SearchSpace& space = {});

}  // namespace fpt
