#include "fpt/metric.hpp"

#include <optional>

namespace fpt {

namespace {

void check_marginal(const std::vector<Rational>& side, const char* name) {
  if (side.empty()) {
    throw Error(Errc::kMalformedDistribution, std::string(name) + " marginal is empty");
  }
  Rational total = 0;
  for (const auto& m : side) {
    if (sgn(m) <= 0) {
      throw Error(Errc::kMalformedDistribution,
                  std::string(name) + " marginal has non-positive mass " + to_string(m));
    }
    total += m;
  }
  if (total != 1) {
    throw Error(Errc::kMalformedDistribution,
                std::string(name) + " marginal sums to " + to_string(total));
  }
}

// Bellman-Ford over the bipartite residual graph: forward arcs row->col at
// cost c, backward arcs col->row at cost -c where the plan is positive.
// `dist` holds row distances first, then column distances.
struct Residual {
  std::size_t rows;
  std::size_t cols;
  const std::vector<std::vector<Rational>>& cost;
  const std::vector<std::vector<Rational>>& plan;

  // pred[node] = previous node, or npos for path starts.
  void shortest(std::vector<std::optional<Rational>>& dist,
                std::vector<std::size_t>& pred) const {
    const std::size_t nodes = rows + cols;
    pred.assign(nodes, SIZE_MAX);
    for (std::size_t round = 0; round < nodes; ++round) {
      bool changed = false;
      for (std::size_t i = 0; i < rows; ++i) {
        if (!dist[i]) continue;
        for (std::size_t j = 0; j < cols; ++j) {
          Rational cand = *dist[i] + cost[i][j];
          auto& dj = dist[rows + j];
          if (!dj || cand < *dj) {
            dj = std::move(cand);
            pred[rows + j] = i;
            changed = true;
          }
        }
      }
      for (std::size_t j = 0; j < cols; ++j) {
        if (!dist[rows + j]) continue;
        for (std::size_t i = 0; i < rows; ++i) {
          if (sgn(plan[i][j]) <= 0) continue;
          Rational cand = *dist[rows + j] - cost[i][j];
          auto& di = dist[i];
          if (!di || cand < *di) {
            di = std::move(cand);
            pred[i] = rows + j;
            changed = true;
          }
        }
      }
      if (!changed) return;
    }
    throw Error(Errc::kInvalidArgument, "negative cycle in transport residual graph");
  }
};

}  // namespace

TransportResult transport(const std::vector<Rational>& left, const std::vector<Rational>& right,
                          const std::vector<std::vector<Rational>>& cost) {
  check_marginal(left, "left");
  check_marginal(right, "right");
  const std::size_t rows = left.size();
  const std::size_t cols = right.size();
  if (cost.size() != rows) throw Error(Errc::kInvalidArgument, "cost matrix has wrong shape");
  for (const auto& row : cost) {
    if (row.size() != cols) throw Error(Errc::kInvalidArgument, "cost matrix has wrong shape");
    for (const auto& c : row) {
      if (sgn(c) < 0) throw Error(Errc::kInvalidArgument, "negative transport cost");
    }
  }

  TransportResult result;
  auto& plan = result.plan.mass;
  plan.assign(rows, std::vector<Rational>(cols));
  std::vector<Rational> supply = left;
  std::vector<Rational> demand = right;
  Residual residual{rows, cols, cost, plan};
  std::vector<std::optional<Rational>> dist;
  std::vector<std::size_t> pred;

  while (true) {
    // Sources: rows with remaining supply, all at distance zero.
    dist.assign(rows + cols, std::nullopt);
    bool any = false;
    for (std::size_t i = 0; i < rows; ++i) {
      if (sgn(supply[i]) > 0) {
        dist[i] = Rational(0);
        any = true;
      }
    }
    if (!any) break;
    residual.shortest(dist, pred);
    std::size_t target = SIZE_MAX;
    for (std::size_t j = 0; j < cols; ++j) {
      if (sgn(demand[j]) <= 0 || !dist[rows + j]) continue;
      if (target == SIZE_MAX || *dist[rows + j] < *dist[rows + target]) target = j;
    }
    if (target == SIZE_MAX) throw Error(Errc::kInvalidArgument, "transport is infeasible");

    // Walk back to the source row, collecting the bottleneck.
    std::vector<std::size_t> path{rows + target};
    while (pred[path.back()] != SIZE_MAX) path.push_back(pred[path.back()]);
    const std::size_t start = path.back();
    Rational amount = std::min(supply[start], demand[target]);
    for (std::size_t k = 0; k + 1 < path.size(); ++k) {
      const std::size_t to = path[k];
      const std::size_t from = path[k + 1];
      if (from >= rows) amount = std::min(amount, plan[to][from - rows]);
    }
    for (std::size_t k = 0; k + 1 < path.size(); ++k) {
      const std::size_t to = path[k];
      const std::size_t from = path[k + 1];
      if (from < rows) {
        plan[from][to - rows] += amount;
      } else {
        plan[to][from - rows] -= amount;
      }
    }
    supply[start] -= amount;
    demand[target] -= amount;
  }

  result.cost = 0;
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) result.cost += plan[i][j] * cost[i][j];
  }

  // Potentials from shortest distances with every node as a zero source.
  dist.assign(rows + cols, Rational(0));
  residual.shortest(dist, pred);
  result.row_potential.resize(rows);
  result.col_potential.resize(cols);
  for (std::size_t i = 0; i < rows; ++i) result.row_potential[i] = -*dist[i];
  for (std::size_t j = 0; j < cols; ++j) result.col_potential[j] = *dist[rows + j];
  return result;
}

bool certifies_optimality(const std::vector<Rational>& left, const std::vector<Rational>& right,
                          const std::vector<std::vector<Rational>>& cost,
                          const TransportResult& result) {
  const auto& plan = result.plan.mass;
  if (plan.size() != left.size() || result.row_potential.size() != left.size() ||
      result.col_potential.size() != right.size()) {
    return false;
  }
  Rational primal = 0;
  Rational dual = 0;
  std::vector<Rational> col_sum(right.size());
  for (std::size_t i = 0; i < left.size(); ++i) {
    if (plan[i].size() != right.size()) return false;
    Rational row_sum = 0;
    for (std::size_t j = 0; j < right.size(); ++j) {
      const Rational& m = plan[i][j];
      if (sgn(m) < 0) return false;
      const Rational slack = cost[i][j] - result.row_potential[i] - result.col_potential[j];
      if (sgn(slack) < 0) return false;
      if (sgn(m) > 0 && sgn(slack) != 0) return false;
      row_sum += m;
      col_sum[j] += m;
      primal += m * cost[i][j];
    }
    if (row_sum != left[i]) return false;
    dual += left[i] * result.row_potential[i];
  }
  for (std::size_t j = 0; j < right.size(); ++j) {
    if (col_sum[j] != right[j]) return false;
    dual += right[j] * result.col_potential[j];
  }
  return primal == result.cost && dual == primal;
}

NestedMetric::NestedMetric(std::shared_ptr<const StateSpace> states, GroundMetric ground)
    : states_(std::move(states)), ground_(ground) {
  if (!states_) throw Error(Errc::kInvalidArgument, "missing state space");
}

Rational NestedMetric::ground(NestedValue a, NestedValue b) const {
  const auto& la = a.labels();
  const auto& lb = b.labels();
  if (la.size() != lb.size()) {
    throw Error(Errc::kIncomparable, "points have different lengths");
  }
  if (ground_ == GroundMetric::kDiscrete) return a == b ? 0 : 1;
  Rational total = 0;
  for (std::size_t t = 0; t < la.size(); ++t) {
    const auto& pa = states_->at(la[t]).payload;
    const auto& pb = states_->at(lb[t]).payload;
    for (std::size_t i = 0; i < pa.size(); ++i) total += abs(pa[i] - pb[i]);
  }
  return total;
}

Rational NestedMetric::distance(NestedValue a, NestedValue b) {
  if (a == b) return 0;
  if (a.level() != b.level()) {
    throw Error(Errc::kIncomparable, "values of different levels");
  }
  if (a.level() == 0) return ground(a, b);
  if (a.timesteps() != b.timesteps()) {
    throw Error(Errc::kIncomparable, "values with different numbers of timesteps");
  }
  std::pair<const void*, const void*> key{a.id(), b.id()};
  if (std::less<const void*>{}(key.second, key.first)) std::swap(key.first, key.second);
  if (auto it = memo_.find(key); it != memo_.end()) return it->second;
  Rational total = 0;
  for (std::size_t t = 1; t <= a.timesteps(); ++t) {
    total += transport(a.coord(t), b.coord(t)).cost;
  }
  memo_.emplace(key, total);
  return total;
}

TransportResult NestedMetric::transport(const NestedDistribution& p,
                                        const NestedDistribution& q) {
  return w1(p, q, [this](NestedValue a, NestedValue b) { return distance(a, b); });
}

NestedDistanceResult nested_distance_detail(const FilteredRandomVariable& x,
                                            const FilteredRandomVariable& y, int n,
                                            GroundMetric ground) {
  if (x.timesteps() != y.timesteps()) {
    throw Error(Errc::kIncomparable, "processes have different numbers of timesteps");
  }
  if (!(x.states() == y.states())) {
    throw Error(Errc::kIncomparable, "processes live on different state spaces");
  }
  NestedDistanceResult out;
  out.left = adapted_distribution(x, n);
  out.right = adapted_distribution(y, n);
  NestedMetric metric(x.states_ptr(), ground);
  out.coupling = metric.transport(out.left.dist, out.right.dist);
  out.distance = out.coupling.cost;
  return out;
}

Rational nested_distance(const FilteredRandomVariable& x, const FilteredRandomVariable& y, int n,
                         GroundMetric ground) {
  return nested_distance_detail(x, y, n, ground).distance;
}

}  // namespace fpt
