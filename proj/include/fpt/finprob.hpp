#pragma once

// Finite probability spaces, partitions standing in for sigma-algebras,
// filtrations, exact conditional laws and the intensity (barycenter) map.

#include <algorithm>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "fpt/error.hpp"
#include "fpt/rational.hpp"

namespace fpt {

struct State {
  std::string label;
  std::vector<Rational> payload;

  friend bool operator==(const State&, const State&) = default;
};

// A finite state set with numeric coordinates of uniform dimension.
class StateSpace {
 public:
  explicit StateSpace(std::vector<State> states);

  [[nodiscard]] const std::vector<State>& states() const { return states_; }
  [[nodiscard]] std::size_t size() const { return states_.size(); }
  [[nodiscard]] std::size_t dimension() const { return dimension_; }
  [[nodiscard]] bool contains(const std::string& label) const;
  // Throws kUnknownState.
  [[nodiscard]] const State& at(const std::string& label) const;

  friend bool operator==(const StateSpace& a, const StateSpace& b) {
    return a.states_ == b.states_;
  }

 private:
  std::vector<State> states_;
  std::size_t dimension_ = 0;
  std::unordered_map<std::string, std::size_t> index_;
};

class FiniteProbSpace {
 public:
  // Weights must be strictly positive and sum to one; ids unique.
  explicit FiniteProbSpace(std::vector<std::pair<std::string, Rational>> atoms);

  [[nodiscard]] std::size_t size() const { return ids_.size(); }
  [[nodiscard]] const std::string& id(std::size_t atom) const { return ids_[atom]; }
  [[nodiscard]] const Rational& weight(std::size_t atom) const {
    return weights_[atom];
  }
  [[nodiscard]] const std::vector<std::string>& ids() const { return ids_; }
  [[nodiscard]] const std::vector<Rational>& weights() const { return weights_; }
  // Throws kMissingValue for unknown ids.
  [[nodiscard]] std::size_t index_of(const std::string& id) const;

  friend bool operator==(const FiniteProbSpace& a, const FiniteProbSpace& b) {
    return a.ids_ == b.ids_ && a.weights_ == b.weights_;
  }

 private:
  std::vector<std::string> ids_;
  std::vector<Rational> weights_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Blocks are kept sorted by least atom index with atoms sorted inside each
// block, so structural equality is equality of partitions.
class Partition {
 public:
  Partition(std::size_t universe, std::vector<std::vector<std::size_t>> blocks);

  static Partition trivial(std::size_t universe);
  static Partition discrete(std::size_t universe);
  static Partition from_ids(const FiniteProbSpace& space,
                            const std::vector<std::vector<std::string>>& blocks);

  [[nodiscard]] std::size_t universe() const { return block_of_.size(); }
  [[nodiscard]] std::size_t block_count() const { return blocks_.size(); }
  [[nodiscard]] const std::vector<std::vector<std::size_t>>& blocks() const {
    return blocks_;
  }
  [[nodiscard]] const std::vector<std::size_t>& block(std::size_t b) const {
    return blocks_[b];
  }
  [[nodiscard]] std::size_t block_of(std::size_t atom) const {
    return block_of_[atom];
  }

  friend bool operator==(const Partition& a, const Partition& b) {
    return a.blocks_ == b.blocks_;
  }

 private:
  std::vector<std::vector<std::size_t>> blocks_;
  std::vector<std::size_t> block_of_;
};

// True iff every block of `finer` lies inside a block of `coarser`.
bool refines(const Partition& finer, const Partition& coarser);

// N refining partitions; step(t) is 1-based.
class Filtration {
 public:
  explicit Filtration(std::vector<Partition> steps);

  [[nodiscard]] std::size_t timesteps() const { return steps_.size(); }
  [[nodiscard]] std::size_t universe() const { return steps_.front().universe(); }
  // Throws kBadTimestep.
  [[nodiscard]] const Partition& step(std::size_t t) const;
  [[nodiscard]] const std::vector<Partition>& steps() const { return steps_; }

  friend bool operator==(const Filtration&, const Filtration&) = default;

 private:
  std::vector<Partition> steps_;
};

// Finitely supported probability on V in canonical form: support sorted by
// V's operator<, no duplicates, positive masses summing to one.
template <class V>
class Distribution {
 public:
  using Entry = std::pair<V, Rational>;

  Distribution() = default;

  // Merges duplicates and sorts. Throws kMalformedDistribution on
  // non-positive mass, empty support or total != 1.
  static Distribution from_entries(std::vector<Entry> raw) {
    Distribution d = collect(std::move(raw));
    Rational total = 0;
    for (const auto& [v, p] : d.entries_) total += p;
    if (total != 1) {
      throw Error(Errc::kMalformedDistribution,
                  "masses sum to " + to_string(total) + ", expected 1");
    }
    return d;
  }

  // Same as from_entries but rescales the (positive) masses to total one.
  static Distribution normalized(std::vector<Entry> raw) {
    Distribution d = collect(std::move(raw));
    Rational total = 0;
    for (const auto& [v, p] : d.entries_) total += p;
    for (auto& [v, p] : d.entries_) p /= total;
    return d;
  }

  static Distribution dirac(V value) {
    Distribution d;
    d.entries_.emplace_back(std::move(value), Rational(1));
    return d;
  }

  [[nodiscard]] const std::vector<Entry>& entries() const { return entries_; }
  [[nodiscard]] std::size_t size() const { return entries_.size(); }
  [[nodiscard]] bool is_dirac() const { return entries_.size() == 1; }
  [[nodiscard]] auto begin() const { return entries_.begin(); }
  [[nodiscard]] auto end() const { return entries_.end(); }

  [[nodiscard]] Rational mass(const V& v) const {
    auto it = std::lower_bound(
        entries_.begin(), entries_.end(), v,
        [](const Entry& e, const V& key) { return e.first < key; });
    if (it != entries_.end() && it->first == v) return it->second;
    return Rational(0);
  }

  template <class F>
  [[nodiscard]] auto map(F&& f) const {
    using W = std::decay_t<decltype(f(std::declval<const V&>()))>;
    std::vector<typename Distribution<W>::Entry> raw;
    raw.reserve(entries_.size());
    for (const auto& [v, p] : entries_) raw.emplace_back(f(v), p);
    return Distribution<W>::from_entries(std::move(raw));
  }

  friend bool operator==(const Distribution& a, const Distribution& b) {
    return a.entries_ == b.entries_;
  }
  // Lexicographic over (value, mass) pairs, then by length.
  friend bool operator<(const Distribution& a, const Distribution& b) {
    const std::size_t n = std::min(a.entries_.size(), b.entries_.size());
    for (std::size_t i = 0; i < n; ++i) {
      const auto& [va, pa] = a.entries_[i];
      const auto& [vb, pb] = b.entries_[i];
      if (va < vb) return true;
      if (vb < va) return false;
      if (pa != pb) return pa < pb;
    }
    return a.entries_.size() < b.entries_.size();
  }

 private:
  static Distribution collect(std::vector<Entry> raw) {
    if (raw.empty()) {
      throw Error(Errc::kMalformedDistribution, "empty support");
    }
    for (const auto& [v, p] : raw) {
      if (sgn(p) <= 0) {
        throw Error(Errc::kMalformedDistribution,
                    "non-positive mass " + to_string(p));
      }
    }
    std::stable_sort(raw.begin(), raw.end(), [](const Entry& a, const Entry& b) {
      return a.first < b.first;
    });
    Distribution d;
    d.entries_.reserve(raw.size());
    for (auto& e : raw) {
      if (!d.entries_.empty() && d.entries_.back().first == e.first) {
        d.entries_.back().second += e.second;
      } else {
        d.entries_.push_back(std::move(e));
      }
    }
    return d;
  }

  std::vector<Entry> entries_;
};

template <class V>
Distribution<V> pushforward(const FiniteProbSpace& space, std::span<const V> rv) {
  if (rv.size() != space.size()) {
    throw Error(Errc::kMissingValue, "random variable does not cover every atom");
  }
  std::vector<typename Distribution<V>::Entry> raw;
  raw.reserve(rv.size());
  for (std::size_t a = 0; a < rv.size(); ++a) raw.emplace_back(rv[a], space.weight(a));
  return Distribution<V>::from_entries(std::move(raw));
}

// One conditional law per block of `partition`.
template <class V>
std::vector<Distribution<V>> conditional_law_by_block(const FiniteProbSpace& space,
                                                      const Partition& partition,
                                                      std::span<const V> rv) {
  if (partition.universe() != space.size()) {
    throw Error(Errc::kSpaceMismatch, "partition and space have different atoms");
  }
  if (rv.size() != space.size()) {
    throw Error(Errc::kMissingValue, "random variable does not cover every atom");
  }
  std::vector<Distribution<V>> laws;
  laws.reserve(partition.block_count());
  for (const auto& block : partition.blocks()) {
    std::vector<typename Distribution<V>::Entry> raw;
    raw.reserve(block.size());
    for (std::size_t a : block) raw.emplace_back(rv[a], space.weight(a));
    laws.push_back(Distribution<V>::normalized(std::move(raw)));
  }
  return laws;
}

// L(rv | sigma(partition)) evaluated at every atom.
template <class V>
std::vector<Distribution<V>> conditional_law(const FiniteProbSpace& space,
                                             const Partition& partition,
                                             std::span<const V> rv) {
  auto by_block = conditional_law_by_block(space, partition, rv);
  std::vector<Distribution<V>> out;
  out.reserve(space.size());
  for (std::size_t a = 0; a < space.size(); ++a) {
    out.push_back(by_block[partition.block_of(a)]);
  }
  return out;
}

// Keyed by atom id; a missing atom raises kMissingValue.
template <class V>
std::map<std::string, Distribution<V>> conditional_law(
    const FiniteProbSpace& space, const Partition& partition,
    const std::map<std::string, V>& rv) {
  std::vector<V> values;
  values.reserve(space.size());
  for (const auto& id : space.ids()) {
    auto it = rv.find(id);
    if (it == rv.end()) {
      throw Error(Errc::kMissingValue, "no value for atom '" + id + "'");
    }
    values.push_back(it->second);
  }
  auto laws = conditional_law(space, partition, std::span<const V>(values));
  std::map<std::string, Distribution<V>> out;
  for (std::size_t a = 0; a < space.size(); ++a) out.emplace(space.id(a), laws[a]);
  return out;
}

// Coarsest partition making rv measurable: the level sets of rv.
template <class V>
Partition generated_partition(const FiniteProbSpace& space, std::span<const V> rv) {
  if (rv.size() != space.size()) {
    throw Error(Errc::kMissingValue, "random variable does not cover every atom");
  }
  std::vector<std::vector<std::size_t>> blocks;
  std::vector<std::size_t> representative;
  for (std::size_t a = 0; a < rv.size(); ++a) {
    std::size_t b = 0;
    for (; b < representative.size(); ++b) {
      if (rv[representative[b]] == rv[a]) break;
    }
    if (b == representative.size()) {
      representative.push_back(a);
      blocks.emplace_back();
    }
    blocks[b].push_back(a);
  }
  return Partition(space.size(), std::move(blocks));
}

// I(P)(v) = sum_q P(q) q(v).
template <class V>
Distribution<V> intensity(const Distribution<Distribution<V>>& outer) {
  std::vector<typename Distribution<V>::Entry> raw;
  for (const auto& [inner, weight] : outer) {
    for (const auto& [v, p] : inner) raw.emplace_back(v, weight * p);
  }
  return Distribution<V>::from_entries(std::move(raw));
}

}  // namespace fpt
