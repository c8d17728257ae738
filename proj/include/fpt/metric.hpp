#pragma once

// Exact Wasserstein-1 transport on rationals and the nested distance that
// lifts a ground metric on states to adapted distributions of any rank.

#include <cstddef>
#include <functional>
#include <unordered_map>
#include <utility>
#include <vector>

#include "fpt/prediction.hpp"

namespace fpt {

struct TransportPlan {
  // mass[i][j] moves from left support point i to right support point j.
  std::vector<std::vector<Rational>> mass;
};

struct TransportResult {
  Rational cost;
  TransportPlan plan;
  // Dual potentials: row[i] + col[j] <= cost[i][j], with equality wherever
  // the plan is positive.
  std::vector<Rational> row_potential;
  std::vector<Rational> col_potential;
};

// Min-cost transport between two probability vectors by successive shortest
// paths. Throws kMalformedDistribution unless both sides are positive and sum
// to one, kInvalidArgument on negative costs or a ragged cost matrix.
TransportResult transport(const std::vector<Rational>& left, const std::vector<Rational>& right,
                          const std::vector<std::vector<Rational>>& cost);

// Checks primal feasibility, dual feasibility, complementary slackness and
// equality of primal and dual objectives, all exactly.
bool certifies_optimality(const std::vector<Rational>& left, const std::vector<Rational>& right,
                          const std::vector<std::vector<Rational>>& cost,
                          const TransportResult& result);

template <class V, class Cost>
TransportResult w1(const Distribution<V>& p, const Distribution<V>& q, Cost&& d) {
  std::vector<Rational> left;
  std::vector<Rational> right;
  for (const auto& [v, m] : p) left.push_back(m);
  for (const auto& [v, m] : q) right.push_back(m);
  std::vector<std::vector<Rational>> cost(p.size(), std::vector<Rational>(q.size()));
  for (std::size_t i = 0; i < p.size(); ++i) {
    for (std::size_t j = 0; j < q.size(); ++j) {
      cost[i][j] = d(p.entries()[i].first, q.entries()[j].first);
    }
  }
  return transport(left, right, cost);
}

enum class GroundMetric {
  kDiscrete,   // 0 on equal points, 1 otherwise
  kPayloadL1,  // sum of |payload differences| over coordinates and times
};

// d_0 is the ground metric on level-0 points and
// d_{k+1}(z, z') = sum_t w1(z_t, z'_t; d_k). Pair costs are memoized per
// instance; an instance is not safe for concurrent use.
class NestedMetric {
 public:
  NestedMetric(std::shared_ptr<const StateSpace> states, GroundMetric ground);

  // Throws kIncomparable for values of different levels or shapes.
  Rational distance(NestedValue a, NestedValue b);
  TransportResult transport(const NestedDistribution& p, const NestedDistribution& q);

 private:
  Rational ground(NestedValue a, NestedValue b) const;

  struct PairHash {
    std::size_t operator()(const std::pair<const void*, const void*>& k) const {
      return std::hash<const void*>{}(k.first) * 31 + std::hash<const void*>{}(k.second);
    }
  };

  std::shared_ptr<const StateSpace> states_;
  GroundMetric ground_;
  std::unordered_map<std::pair<const void*, const void*>, Rational, PairHash> memo_;
};

struct NestedDistanceResult {
  Rational distance;
  NestedLaw left;
  NestedLaw right;
  // Optimal coupling of the two adapted distributions.
  TransportResult coupling;
};

// Throws kIncomparable on different N or state spaces.
NestedDistanceResult nested_distance_detail(const FilteredRandomVariable& x,
                                            const FilteredRandomVariable& y, int n,
                                            GroundMetric ground);
Rational nested_distance(const FilteredRandomVariable& x, const FilteredRandomVariable& y, int n,
                         GroundMetric ground);

}  // namespace fpt
