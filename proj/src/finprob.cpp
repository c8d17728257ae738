#include "fpt/finprob.hpp"

#include <algorithm>

namespace fpt {

StateSpace::StateSpace(std::vector<State> states) : states_(std::move(states)) {
  if (states_.empty()) {
    throw Error(Errc::kInvalidArgument, "state space must not be empty");
  }
  dimension_ = states_.front().payload.size();
  for (std::size_t i = 0; i < states_.size(); ++i) {
    const State& s = states_[i];
    if (s.label.empty()) {
      throw Error(Errc::kInvalidArgument, "empty state label");
    }
    if (s.payload.size() != dimension_) {
      throw Error(Errc::kInvalidArgument,
                  "payload dimension of '" + s.label + "' differs from the space");
    }
    if (!index_.emplace(s.label, i).second) {
      throw Error(Errc::kInvalidArgument, "duplicate state label '" + s.label + "'");
    }
  }
}

bool StateSpace::contains(const std::string& label) const {
  return index_.contains(label);
}

const State& StateSpace::at(const std::string& label) const {
  auto it = index_.find(label);
  if (it == index_.end()) {
    throw Error(Errc::kUnknownState, "unknown state '" + label + "'");
  }
  return states_[it->second];
}

FiniteProbSpace::FiniteProbSpace(std::vector<std::pair<std::string, Rational>> atoms) {
  if (atoms.empty()) {
    throw Error(Errc::kMalformedDistribution, "probability space has no atoms");
  }
  Rational total = 0;
  for (auto& [id, w] : atoms) {
    if (sgn(w) <= 0) {
      throw Error(Errc::kMalformedDistribution,
                  "atom '" + id + "' has non-positive weight " + to_string(w));
    }
    if (!index_.emplace(id, ids_.size()).second) {
      throw Error(Errc::kInvalidArgument, "duplicate atom id '" + id + "'");
    }
    total += w;
    ids_.push_back(std::move(id));
    weights_.push_back(std::move(w));
  }
  if (total != 1) {
    throw Error(Errc::kMalformedDistribution,
                "atom weights sum to " + to_string(total) + ", expected 1");
  }
}

std::size_t FiniteProbSpace::index_of(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) {
    throw Error(Errc::kMissingValue, "unknown atom '" + id + "'");
  }
  return it->second;
}

Partition::Partition(std::size_t universe, std::vector<std::vector<std::size_t>> blocks)
    : blocks_(std::move(blocks)), block_of_(universe, universe) {
  for (auto& block : blocks_) {
    if (block.empty()) {
      throw Error(Errc::kInvalidArgument, "partition has an empty block");
    }
    std::sort(block.begin(), block.end());
  }
  std::sort(blocks_.begin(), blocks_.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    for (std::size_t atom : blocks_[b]) {
      if (atom >= universe) {
        throw Error(Errc::kSpaceMismatch, "partition mentions an atom outside the space");
      }
      if (block_of_[atom] != universe) {
        throw Error(Errc::kInvalidArgument, "partition blocks overlap");
      }
      block_of_[atom] = b;
    }
  }
  for (std::size_t atom = 0; atom < universe; ++atom) {
    if (block_of_[atom] == universe) {
      throw Error(Errc::kInvalidArgument, "partition does not cover every atom");
    }
  }
}

Partition Partition::trivial(std::size_t universe) {
  std::vector<std::size_t> all(universe);
  for (std::size_t i = 0; i < universe; ++i) all[i] = i;
  return Partition(universe, {std::move(all)});
}

Partition Partition::discrete(std::size_t universe) {
  std::vector<std::vector<std::size_t>> blocks(universe);
  for (std::size_t i = 0; i < universe; ++i) blocks[i] = {i};
  return Partition(universe, std::move(blocks));
}

Partition Partition::from_ids(const FiniteProbSpace& space,
                              const std::vector<std::vector<std::string>>& blocks) {
  std::vector<std::vector<std::size_t>> indexed;
  indexed.reserve(blocks.size());
  for (const auto& block : blocks) {
    auto& out = indexed.emplace_back();
    for (const auto& id : block) {
      auto it = std::find(space.ids().begin(), space.ids().end(), id);
      if (it == space.ids().end()) {
        throw Error(Errc::kSpaceMismatch, "partition mentions unknown atom '" + id + "'");
      }
      out.push_back(static_cast<std::size_t>(it - space.ids().begin()));
    }
  }
  return Partition(space.size(), std::move(indexed));
}

bool refines(const Partition& finer, const Partition& coarser) {
  if (finer.universe() != coarser.universe()) {
    throw Error(Errc::kSpaceMismatch, "partitions live on different atom sets");
  }
  for (const auto& block : finer.blocks()) {
    const std::size_t target = coarser.block_of(block.front());
    for (std::size_t atom : block) {
      if (coarser.block_of(atom) != target) return false;
    }
  }
  return true;
}

Filtration::Filtration(std::vector<Partition> steps) : steps_(std::move(steps)) {
  if (steps_.empty()) {
    throw Error(Errc::kInvalidArgument, "filtration needs at least one step");
  }
  for (std::size_t t = 1; t < steps_.size(); ++t) {
    if (steps_[t].universe() != steps_[0].universe()) {
      throw Error(Errc::kSpaceMismatch, "filtration steps live on different atom sets");
    }
    if (!refines(steps_[t], steps_[t - 1])) {
      throw Error(Errc::kInvalidArgument,
                  "filtration step " + std::to_string(t + 1) +
                      " does not refine step " + std::to_string(t));
    }
  }
}

const Partition& Filtration::step(std::size_t t) const {
  if (t < 1 || t > steps_.size()) {
    throw Error(Errc::kBadTimestep, "timestep " + std::to_string(t) +
                                        " outside 1.." + std::to_string(steps_.size()));
  }
  return steps_[t - 1];
}

}  // namespace fpt
