#include "fpt/timegrid.hpp"

#include <algorithm>

namespace fpt {

TimeGrid::TimeGrid(std::vector<Rational> times) : times_(std::move(times)) {
  if (times_.empty()) throw Error(Errc::kInvalidArgument, "time grid is empty");
  for (std::size_t i = 0; i < times_.size(); ++i) {
    if (sgn(times_[i]) < 0 || times_[i] > 1) {
      throw Error(Errc::kInvalidArgument, "time " + to_string(times_[i]) + " outside [0,1]");
    }
    if (i > 0 && !(times_[i - 1] < times_[i])) {
      throw Error(Errc::kInvalidArgument, "times must be strictly increasing");
    }
  }
  if (times_.back() != 1) throw Error(Errc::kInvalidArgument, "time grid must end at 1");
}

TimeGrid TimeGrid::parse(std::string_view text) {
  std::vector<Rational> times;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = text.find(',', start);
    std::string_view part = text.substr(start, comma == std::string_view::npos ? comma : comma - start);
    while (!part.empty() && part.front() == ' ') part.remove_prefix(1);
    while (!part.empty() && part.back() == ' ') part.remove_suffix(1);
    times.push_back(parse_rational(part));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return TimeGrid(std::move(times));
}

StepFilteredProcess::StepFilteredProcess(std::shared_ptr<const StateSpace> states,
                                         FiniteProbSpace space, TimeGrid events,
                                         std::vector<Partition> partitions)
    : states_(std::move(states)),
      space_(std::move(space)),
      events_(std::move(events)),
      partitions_(std::move(partitions)) {
  if (!states_) throw Error(Errc::kInvalidArgument, "missing state space");
  if (partitions_.size() != events_.size()) {
    throw Error(Errc::kInvalidArgument, std::to_string(events_.size()) + " events but " +
                                            std::to_string(partitions_.size()) + " partitions");
  }
  for (std::size_t j = 0; j < partitions_.size(); ++j) {
    if (partitions_[j].universe() != space_.size()) {
      throw Error(Errc::kSpaceMismatch, "partition at event " + std::to_string(j + 1) +
                                            " has the wrong number of atoms");
    }
    if (j > 0 && !refines(partitions_[j], partitions_[j - 1])) {
      throw Error(Errc::kInvalidArgument, "partition at event " + std::to_string(j + 1) +
                                              " does not refine the previous one");
    }
  }
}

namespace {

void check_label(const StateSpace& states, const std::string& label) {
  if (!states.contains(label)) throw Error(Errc::kUnknownState, "unknown state '" + label + "'");
}

void check_measurable(const Partition& p, const std::vector<std::string>& values,
                      const std::string& what) {
  for (const auto& block : p.blocks()) {
    for (std::size_t a : block) {
      if (values[a] != values[block.front()]) {
        throw Error(Errc::kNotAdapted, what + " is not measurable for the partition in force");
      }
    }
  }
}

}  // namespace

StepFilteredProcess StepFilteredProcess::with_paths(std::shared_ptr<const StateSpace> states,
                                                    FiniteProbSpace space, TimeGrid events,
                                                    std::vector<Partition> partitions,
                                                    std::vector<std::vector<std::string>> paths) {
  StepFilteredProcess x(std::move(states), std::move(space), std::move(events),
                        std::move(partitions));
  if (paths.size() != x.space_.size()) {
    throw Error(Errc::kMissingValue, "expected one path per atom");
  }
  const std::size_t m = x.events_.size();
  for (const auto& path : paths) {
    if (path.size() != m) {
      throw Error(Errc::kNotAPath, "path has " + std::to_string(path.size()) +
                                       " values, expected one per event (" + std::to_string(m) +
                                       ")");
    }
    for (const auto& label : path) check_label(*x.states_, label);
  }
  for (std::size_t j = 0; j < m; ++j) {
    std::vector<std::string> column;
    for (const auto& path : paths) column.push_back(path[j]);
    check_measurable(x.partitions_[j], column, "path at event " + std::to_string(j + 1));
  }
  x.paths_ = std::move(paths);
  return x;
}

StepFilteredProcess StepFilteredProcess::with_terminal(std::shared_ptr<const StateSpace> states,
                                                       FiniteProbSpace space, TimeGrid events,
                                                       std::vector<Partition> partitions,
                                                       std::vector<std::string> terminal) {
  StepFilteredProcess x(std::move(states), std::move(space), std::move(events),
                        std::move(partitions));
  if (terminal.size() != x.space_.size()) {
    throw Error(Errc::kMissingValue, "expected one terminal value per atom");
  }
  for (const auto& label : terminal) check_label(*x.states_, label);
  check_measurable(x.partitions_.back(), terminal, "terminal value");
  x.terminal_ = std::move(terminal);
  return x;
}

std::size_t StepFilteredProcess::in_force(const Rational& t) const {
  if (sgn(t) < 0 || t > 1) throw Error(Errc::kBadTimestep, "time " + to_string(t) + " outside [0,1]");
  const auto& u = events_.times();
  const auto it = std::upper_bound(u.begin(), u.end(), t);
  return it == u.begin() ? 0 : static_cast<std::size_t>(it - u.begin()) - 1;
}

namespace {

std::vector<std::size_t> in_force_indices(const StepFilteredProcess& x, const TimeGrid& grid) {
  std::vector<std::size_t> out;
  for (const auto& t : grid.times()) out.push_back(x.in_force(t));
  return out;
}

}  // namespace

FilteredRandomVariable discretize(const StepFilteredProcess& x, const TimeGrid& grid) {
  const auto idx = in_force_indices(x, grid);
  std::vector<Partition> steps;
  for (std::size_t j : idx) steps.push_back(x.partitions()[j]);
  std::vector<NestedValue> values;
  for (std::size_t a = 0; a < x.space().size(); ++a) {
    if (x.has_paths()) {
      std::vector<std::string> labels;
      for (std::size_t j : idx) labels.push_back(x.paths()[a][j]);
      values.push_back(NestedValue::point(std::move(labels)));
    } else {
      values.push_back(NestedValue::state(x.terminal()[a]));
    }
  }
  return FilteredRandomVariable(x.states_ptr(), x.space(), Filtration(std::move(steps)),
                                std::move(values));
}

FilteredProcess discretize_process(const StepFilteredProcess& x, const TimeGrid& grid) {
  if (!x.has_paths()) throw Error(Errc::kNotAPath, "step process has a terminal value, not a path");
  const auto idx = in_force_indices(x, grid);
  std::vector<Partition> steps;
  for (std::size_t j : idx) steps.push_back(x.partitions()[j]);
  std::vector<std::vector<std::string>> paths;
  for (const auto& path : x.paths()) {
    auto& out = paths.emplace_back();
    for (std::size_t j : idx) out.push_back(path[j]);
  }
  return FilteredProcess(x.states_ptr(), x.space(), Filtration(std::move(steps)),
                         std::move(paths));
}

StepFilteredProcess expand(const FilteredProcess& x, const TimeGrid& grid) {
  if (grid.size() != x.timesteps()) {
    throw Error(Errc::kInvalidArgument, "grid has " + std::to_string(grid.size()) +
                                            " times, process has " +
                                            std::to_string(x.timesteps()) + " steps");
  }
  return StepFilteredProcess::with_paths(x.states_ptr(), x.space(), grid, x.filtration().steps(),
                                         x.paths());
}

std::vector<Rational> continuity_points(const StepFilteredProcess& x) {
  const auto& u = x.events().times();
  const std::size_t m = u.size();
  std::vector<Rational> out;
  if (m < 2) return out;
  // One rank past saturation on the event grid; pp^K_t determines every
  // lower-order pp^k_t.
  const int k = static_cast<int>(m);
  const auto z = pp(discretize(x, x.events()), k);
  auto law_at = [&](std::size_t j) {
    std::vector<NestedDistribution> coords;
    for (NestedValue v : z.values()) coords.push_back(v.coord(j));
    return pushforward(x.space(), std::span<const NestedDistribution>(coords));
  };
  auto before = law_at(1);
  for (std::size_t j = 2; j <= m; ++j) {
    auto at = law_at(j);
    if (!(at == before)) out.push_back(u[j - 1]);
    before = std::move(at);
  }
  return out;
}

GridProjection::GridProjection(const StepFilteredProcess& x, const TimeGrid& grid)
    : in_force_(in_force_indices(x, grid)), paths_(x.has_paths()) {}

NestedValue GridProjection::operator()(NestedValue z) {
  if (auto it = memo_.find(z.id()); it != memo_.end()) return it->second;
  NestedValue out;
  if (z.level() == 0) {
    if (!paths_) return z;
    std::vector<std::string> labels;
    for (std::size_t j : in_force_) labels.push_back(z.labels().at(j));
    out = NestedValue::point(std::move(labels));
  } else {
    std::vector<NestedDistribution> coords;
    for (std::size_t j : in_force_) {
      coords.push_back(z.coord(j + 1).map([this](NestedValue v) { return (*this)(v); }));
    }
    out = NestedValue::from_coords(std::move(coords));
  }
  memo_.emplace(z.id(), out);
  return out;
}

bool verify_ftn(const StepFilteredProcess& x, const TimeGrid& grid, int n) {
  if (n < 0 || static_cast<std::size_t>(n) + 1 > grid.size()) {
    throw Error(Errc::kInvalidArgument, "rank must lie in 0..|T|-1");
  }
  const auto on_events = pp(discretize(x, x.events()), n);
  const auto on_grid = pp(discretize(x, grid), n);
  GridProjection project(x, grid);
  for (std::size_t a = 0; a < x.space().size(); ++a) {
    if (!(project(on_events.value(a)) == on_grid.value(a))) return false;
  }
  return true;
}

}  // namespace fpt
