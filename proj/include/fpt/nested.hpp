#pragma once

// Canonical points of the nested path spaces M_n (N coordinates per level)
// and canonical probability laws on them.
//
// Values are hash-consed: every distinct canonical value exists exactly once
// in a process-wide table, so value equality is handle equality and hashing is
// O(1). The table is guarded by a mutex and nodes are never released.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "fpt/finprob.hpp"

namespace fpt {

namespace detail {
struct Node;
}

class NestedValue {
 public:
  // A null handle; only valid as a placeholder.
  NestedValue() = default;

  // Level 0. A single state is a one-label point; a path over N states is an
  // N-label point.
  static NestedValue point(std::vector<std::string> labels);
  static NestedValue state(std::string label);
  // Level k+1 from N distributions over level-k values.
  static NestedValue from_coords(std::vector<Distribution<NestedValue>> coords);

  [[nodiscard]] bool is_null() const { return node_ == nullptr; }
  [[nodiscard]] int level() const;
  [[nodiscard]] bool is_point() const { return level() == 0; }
  // Level 0 only.
  [[nodiscard]] const std::vector<std::string>& labels() const;
  // Labels joined by ':'.
  [[nodiscard]] std::string point_label() const;
  // Number of coordinates (level >= 1).
  [[nodiscard]] std::size_t timesteps() const;
  [[nodiscard]] const std::vector<Distribution<NestedValue>>& coords() const;
  // 1-based coordinate; throws kBadTimestep.
  [[nodiscard]] const Distribution<NestedValue>& coord(std::size_t t) const;

  // Structural hash; independent of construction order.
  [[nodiscard]] std::size_t hash() const;
  [[nodiscard]] const void* id() const { return node_; }

  friend bool operator==(NestedValue a, NestedValue b) { return a.node_ == b.node_; }
  // Canonical total order: level, then labels or coordinates lexicographically.
  friend bool operator<(NestedValue a, NestedValue b);

 private:
  explicit NestedValue(const detail::Node* node) : node_(node) {}
  friend struct detail::Node;
  friend class Interner;

  const detail::Node* node_ = nullptr;
};

// Three-way canonical comparison (-1, 0, 1).
int compare(NestedValue a, NestedValue b);

struct NestedValueHash {
  std::size_t operator()(NestedValue v) const { return v.hash(); }
};

using NestedDistribution = Distribution<NestedValue>;

// A probability law on level-`rank` nested values.
struct NestedLaw {
  int rank = 0;
  NestedDistribution dist;

  friend bool operator==(const NestedLaw&, const NestedLaw&) = default;
};

// Un-canonicalized input: duplicates and arbitrary order allowed.
struct RawNestedEntry;
struct RawNestedValue {
  std::vector<std::string> labels;                 // level 0 when coords empty
  std::vector<std::vector<RawNestedEntry>> coords;  // otherwise
};
struct RawNestedEntry {
  RawNestedValue value;
  Rational mass;
};

NestedValue canonicalize(const RawNestedValue& raw);
NestedLaw canonicalize(int rank, const std::vector<RawNestedEntry>& raw);

NestedDistribution dirac(NestedValue v);
// Throws kNotDirac.
NestedValue dirac_inv(const NestedDistribution& q);

// Coordinate projection e_t; throws kBadTimestep.
const NestedDistribution& terminal_eval(NestedValue z, std::size_t t);

// R^{n,k}: repeatedly replaces z by the atom of its terminal Dirac.
// Throws kNotTerminating when a terminal coordinate is not a Dirac and
// kInvalidArgument when k exceeds the level.
NestedValue restrict(NestedValue z, int k);

// Human-readable rendering for diagnostics.
std::string describe(NestedValue v);
std::string describe(const NestedDistribution& d);

// Canonical byte encoding (big-endian u32 lengths):
//   value  := 'V' u32:level ( u32:count (u32:len bytes)*   -- level 0
//                           | u32:N dist^N )               -- level >= 1
//   dist   := 'D' u32:m (value rational)^m
//   rational := 'Q' u8:sign u32:len magnitude(num) u32:len magnitude(den)
//   law    := 'L' u32:rank dist
// sign is 0 for non-negative, 1 for negative; magnitudes are minimal
// big-endian byte strings (zero is the empty string).
std::vector<std::uint8_t> encode(NestedValue v);
std::vector<std::uint8_t> encode(const NestedDistribution& d);
std::vector<std::uint8_t> encode(const NestedLaw& law);
// Throws kInvalidFile on malformed input and kMalformedDistribution on
// non-canonical masses.
NestedValue decode_value(std::span<const std::uint8_t> bytes);
NestedLaw decode_law(std::span<const std::uint8_t> bytes);

std::string to_hex(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> from_hex(std::string_view hex);

// Process-wide cap on the number of interned nodes; exceeding it raises
// kResourceLimit. Defaults to unlimited.
void set_node_limit(std::size_t limit);
std::size_t node_limit();
std::size_t interned_node_count();

}  // namespace fpt

template <>
struct std::hash<fpt::NestedValue> {
  std::size_t operator()(fpt::NestedValue v) const { return v.hash(); }
};
