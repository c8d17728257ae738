#pragma once

// Continuous-time filtered processes on [0, 1] whose paths and filtration
// are step functions with rational event times, and their discretization on
// finite time grids.

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "fpt/prediction.hpp"

namespace fpt {

// t_1 < ... < t_N = 1 inside [0, 1].
class TimeGrid {
 public:
  // Throws kInvalidArgument.
  explicit TimeGrid(std::vector<Rational> times);
  // Comma-separated rationals, e.g. "1/3,1".
  static TimeGrid parse(std::string_view text);

  [[nodiscard]] const std::vector<Rational>& times() const { return times_; }
  [[nodiscard]] std::size_t size() const { return times_.size(); }

  friend bool operator==(const TimeGrid&, const TimeGrid&) = default;

 private:
  std::vector<Rational> times_;
};

// Events u_1 < ... < u_m = 1. The partition and path value attached to u_j
// are in force on [u_j, u_{j+1}); before u_1 the first ones apply. The
// outcome is either the path itself or a terminal state per atom.
class StepFilteredProcess {
 public:
  // paths[atom][j] is the state in force from event j on. Throws
  // kInvalidArgument (events, partition count), kNotAdapted, kNotAPath,
  // kUnknownState, kSpaceMismatch.
  static StepFilteredProcess with_paths(std::shared_ptr<const StateSpace> states,
                                        FiniteProbSpace space, TimeGrid events,
                                        std::vector<Partition> partitions,
                                        std::vector<std::vector<std::string>> paths);
  // terminal[atom] must be measurable for the last partition.
  static StepFilteredProcess with_terminal(std::shared_ptr<const StateSpace> states,
                                           FiniteProbSpace space, TimeGrid events,
                                           std::vector<Partition> partitions,
                                           std::vector<std::string> terminal);

  [[nodiscard]] const StateSpace& states() const { return *states_; }
  [[nodiscard]] const std::shared_ptr<const StateSpace>& states_ptr() const {
    return states_;
  }
  [[nodiscard]] const FiniteProbSpace& space() const { return space_; }
  [[nodiscard]] const TimeGrid& events() const { return events_; }
  [[nodiscard]] const std::vector<Partition>& partitions() const { return partitions_; }
  [[nodiscard]] bool has_paths() const { return !paths_.empty(); }
  [[nodiscard]] const std::vector<std::vector<std::string>>& paths() const { return paths_; }
  [[nodiscard]] const std::vector<std::string>& terminal() const { return terminal_; }

  // 0-based index of the event in force at t in [0, 1].
  [[nodiscard]] std::size_t in_force(const Rational& t) const;
  [[nodiscard]] const Partition& partition_at(const Rational& t) const {
    return partitions_[in_force(t)];
  }

  friend bool operator==(const StepFilteredProcess& a, const StepFilteredProcess& b) {
    return *a.states_ == *b.states_ && a.space_ == b.space_ && a.events_ == b.events_ &&
           a.partitions_ == b.partitions_ && a.paths_ == b.paths_ && a.terminal_ == b.terminal_;
  }

 private:
  StepFilteredProcess(std::shared_ptr<const StateSpace> states, FiniteProbSpace space,
                      TimeGrid events, std::vector<Partition> partitions);

  std::shared_ptr<const StateSpace> states_;
  FiniteProbSpace space_;
  TimeGrid events_;
  std::vector<Partition> partitions_;
  std::vector<std::vector<std::string>> paths_;
  std::vector<std::string> terminal_;
};

// Restricts the filtration (and the path) to the grid. Path-mode processes
// give path values over the grid, terminal-mode ones the terminal state.
FilteredRandomVariable discretize(const StepFilteredProcess& x, const TimeGrid& grid);
// Path mode only; throws kNotAPath otherwise.
FilteredProcess discretize_process(const StepFilteredProcess& x, const TimeGrid& grid);

// Reads a discrete process as a step process with the grid as event times.
// Throws kInvalidArgument when the grid size differs from N.
StepFilteredProcess expand(const FilteredProcess& x, const TimeGrid& grid);

// The finite set excluded from the continuity points: event times where
// t -> L(pp^inf_t) jumps, found by comparing the law of the in-force
// prediction values just before and at each event.
std::vector<Rational> continuity_points(const StepFilteredProcess& x);

// F_T^n: maps a rank-n value over the event grid of `x` to one over `grid`.
// F^0 samples a path at the grid times (terminal values pass through),
// F^{n+1}(z) = (F^n_# z(t_1), ..., F^n_# z(t_N)) with z(t) the coordinate in
// force at t.
class GridProjection {
 public:
  GridProjection(const StepFilteredProcess& x, const TimeGrid& grid);
  NestedValue operator()(NestedValue z);

 private:
  std::vector<std::size_t> in_force_;
  bool paths_;
  std::unordered_map<const void*, NestedValue> memo_;
};

// Compares F_T^n(pp^n of x on its events) with pp^n(discretize(x, T)) atom
// by atom. Throws kInvalidArgument unless 0 <= n <= |T| - 1.
bool verify_ftn(const StepFilteredProcess& x, const TimeGrid& grid, int n);

}  // namespace fpt
