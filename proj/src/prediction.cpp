#include "fpt/prediction.hpp"

#include <unordered_map>

namespace fpt {

namespace {

void check_labels(const StateSpace& states, NestedValue v) {
  for (const auto& label : v.labels()) {
    if (!states.contains(label)) {
      throw Error(Errc::kUnknownState, "unknown state '" + label + "'");
    }
  }
}

// Level sets of `values` within each block of `partition`, i.e. whether the
// value is constant on every block.
template <class V>
bool measurable(const Partition& partition, const std::vector<V>& values) {
  for (const auto& block : partition.blocks()) {
    for (std::size_t a : block) {
      if (!(values[a] == values[block.front()])) return false;
    }
  }
  return true;
}

}  // namespace

FilteredRandomVariable::FilteredRandomVariable(std::shared_ptr<const StateSpace> states,
                                               FiniteProbSpace space, Filtration filtration,
                                               std::vector<NestedValue> values)
    : states_(std::move(states)),
      space_(std::move(space)),
      filtration_(std::move(filtration)),
      values_(std::move(values)) {
  if (!states_) throw Error(Errc::kInvalidArgument, "missing state space");
  if (filtration_.universe() != space_.size()) {
    throw Error(Errc::kSpaceMismatch, "filtration and space have different atoms");
  }
  if (values_.size() != space_.size()) {
    throw Error(Errc::kMissingValue, "expected one value per atom");
  }
  const int lvl = values_.front().is_null() ? -1 : values_.front().level();
  for (NestedValue v : values_) {
    if (v.is_null()) throw Error(Errc::kMissingValue, "null value");
    if (v.level() != lvl) throw Error(Errc::kInvalidArgument, "values mix nested levels");
    if (lvl == 0) {
      check_labels(*states_, v);
    } else if (v.timesteps() != filtration_.timesteps()) {
      throw Error(Errc::kInvalidArgument, "nested value has the wrong number of timesteps");
    }
  }
  if (!measurable(filtration_.steps().back(), values_)) {
    throw Error(Errc::kNotAdapted, "value is not measurable with respect to the final step");
  }
}

NestedValue FilteredRandomVariable::value(const std::string& atom_id) const {
  return values_[space_.index_of(atom_id)];
}

FilteredRandomVariable FilteredRandomVariable::with_values(
    std::vector<NestedValue> values) const {
  return FilteredRandomVariable(states_, space_, filtration_, std::move(values));
}

FilteredProcess::FilteredProcess(std::shared_ptr<const StateSpace> states,
                                 FiniteProbSpace space, Filtration filtration,
                                 std::vector<std::vector<std::string>> paths)
    : states_(std::move(states)),
      space_(std::move(space)),
      filtration_(std::move(filtration)),
      paths_(std::move(paths)) {
  if (!states_) throw Error(Errc::kInvalidArgument, "missing state space");
  if (filtration_.universe() != space_.size()) {
    throw Error(Errc::kSpaceMismatch, "filtration and space have different atoms");
  }
  if (paths_.size() != space_.size()) {
    throw Error(Errc::kMissingValue, "expected one path per atom");
  }
  const std::size_t n = filtration_.timesteps();
  for (std::size_t a = 0; a < paths_.size(); ++a) {
    if (paths_[a].size() != n) {
      throw Error(Errc::kNotAPath, "path of atom '" + space_.id(a) + "' has " +
                                       std::to_string(paths_[a].size()) +
                                       " entries, expected " + std::to_string(n));
    }
    for (const auto& label : paths_[a]) {
      if (!states_->contains(label)) {
        throw Error(Errc::kUnknownState, "unknown state '" + label + "'");
      }
    }
  }
  for (std::size_t t = 1; t <= n; ++t) {
    const Partition& p = filtration_.step(t);
    for (const auto& block : p.blocks()) {
      for (std::size_t a : block) {
        if (paths_[a][t - 1] != paths_[block.front()][t - 1]) {
          throw Error(Errc::kNotAdapted, "state at time " + std::to_string(t) +
                                             " differs between atoms '" +
                                             space_.id(block.front()) + "' and '" +
                                             space_.id(a) + "' of one block");
        }
      }
    }
  }
}

FilteredRandomVariable FilteredProcess::as_frv() const {
  std::vector<NestedValue> values;
  values.reserve(paths_.size());
  for (const auto& path : paths_) values.push_back(NestedValue::point(path));
  return FilteredRandomVariable(states_, space_, filtration_, std::move(values));
}

namespace {

std::vector<NestedValue> next_level(const FilteredRandomVariable& x) {
  const FiniteProbSpace& space = x.space();
  const std::size_t n = x.timesteps();
  std::vector<std::vector<NestedDistribution>> laws;
  laws.reserve(n);
  for (std::size_t t = 1; t <= n; ++t) {
    laws.push_back(conditional_law_by_block(space, x.filtration().step(t),
                                            std::span<const NestedValue>(x.values())));
  }
  // Atoms with the same block at every time share their value.
  std::map<std::vector<std::size_t>, NestedValue> memo;
  std::vector<NestedValue> out;
  out.reserve(space.size());
  for (std::size_t a = 0; a < space.size(); ++a) {
    std::vector<std::size_t> key;
    key.reserve(n);
    for (std::size_t t = 1; t <= n; ++t) key.push_back(x.filtration().step(t).block_of(a));
    auto it = memo.find(key);
    if (it == memo.end()) {
      std::vector<NestedDistribution> coords;
      coords.reserve(n);
      for (std::size_t t = 0; t < n; ++t) coords.push_back(laws[t][key[t]]);
      it = memo.emplace(std::move(key), NestedValue::from_coords(std::move(coords))).first;
    }
    out.push_back(it->second);
  }
  return out;
}

}  // namespace

std::vector<FilteredRandomVariable> pp_levels(const FilteredRandomVariable& x, int n) {
  if (n < 0) throw Error(Errc::kInvalidArgument, "negative prediction rank");
  std::vector<FilteredRandomVariable> levels{x};
  levels.reserve(static_cast<std::size_t>(n) + 1);
  for (int k = 0; k < n; ++k) {
    levels.push_back(levels.back().with_values(next_level(levels.back())));
  }
  return levels;
}

FilteredRandomVariable pp(const FilteredRandomVariable& x, int n) {
  if (n < 0) throw Error(Errc::kInvalidArgument, "negative prediction rank");
  FilteredRandomVariable cur = x;
  for (int k = 0; k < n; ++k) cur = cur.with_values(next_level(cur));
  return cur;
}

NestedLaw adapted_distribution(const FilteredRandomVariable& x, int n) {
  FilteredRandomVariable z = pp(x, n);
  return NestedLaw{z.level(),
                   pushforward(z.space(), std::span<const NestedValue>(z.values()))};
}

namespace {

void require_comparable(const FilteredRandomVariable& x, const FilteredRandomVariable& y) {
  if (x.timesteps() != y.timesteps()) {
    throw Error(Errc::kIncomparable, "processes have " + std::to_string(x.timesteps()) +
                                         " and " + std::to_string(y.timesteps()) +
                                         " timesteps");
  }
  if (!(x.states() == y.states())) {
    throw Error(Errc::kIncomparable, "processes live on different state spaces");
  }
}

}  // namespace

bool equiv_rank(const FilteredRandomVariable& x, const FilteredRandomVariable& y, int n) {
  require_comparable(x, y);
  return adapted_distribution(x, n) == adapted_distribution(y, n);
}

namespace {

// Shape of the identity variable on the support of mu: z^k = R^{n,k}(z) for
// every atom and level, or a restriction failure.
struct Chain {
  // chain[k][a] = restrict(z_a, k).
  std::vector<std::vector<NestedValue>> levels;
  std::string failure;
};

Chain restriction_chain(const NestedLaw& mu) {
  Chain c;
  c.levels.assign(static_cast<std::size_t>(mu.rank) + 1, {});
  for (std::size_t a = 0; a < mu.dist.size(); ++a) {
    NestedValue z = mu.dist.entries()[a].first;
    c.levels[static_cast<std::size_t>(mu.rank)].push_back(z);
  }
  for (int k = mu.rank; k > 0; --k) {
    for (std::size_t a = 0; a < mu.dist.size(); ++a) {
      NestedValue z = c.levels[static_cast<std::size_t>(k)][a];
      const auto& last = z.coords().back();
      if (!last.is_dirac()) {
        c.failure = "terminal identity Z^" + std::to_string(k) + "_N = dirac(Z^" +
                    std::to_string(k - 1) + ") fails at support point " +
                    std::to_string(a + 1) + ": terminal coordinate has " +
                    std::to_string(last.size()) + " atoms";
        return c;
      }
      c.levels[static_cast<std::size_t>(k) - 1].push_back(last.entries().front().first);
    }
  }
  return c;
}

void validate_shape(const NestedLaw& mu) {
  if (mu.dist.size() == 0) throw Error(Errc::kMalformedDistribution, "empty law");
  std::size_t n = 0;
  for (const auto& [z, p] : mu.dist) {
    if (z.is_null() || z.level() != mu.rank) {
      throw Error(Errc::kMalformedDistribution,
                  "support point level differs from the law's rank");
    }
    if (mu.rank > 0) {
      if (n == 0) n = z.timesteps();
      if (z.timesteps() != n) {
        throw Error(Errc::kMalformedDistribution,
                    "support points have different numbers of timesteps");
      }
    }
  }
}

// Partition of the support indices by the prefix (z_1, ..., z_t).
Partition prefix_partition(const std::vector<NestedValue>& support, std::size_t t) {
  std::map<std::vector<NestedDistribution>, std::size_t> index;
  std::vector<std::vector<std::size_t>> blocks;
  for (std::size_t a = 0; a < support.size(); ++a) {
    const auto& coords = support[a].coords();
    std::vector<NestedDistribution> prefix(coords.begin(),
                                           coords.begin() + static_cast<std::ptrdiff_t>(t));
    auto [it, inserted] = index.emplace(std::move(prefix), blocks.size());
    if (inserted) blocks.emplace_back();
    blocks[it->second].push_back(a);
  }
  return Partition(support.size(), std::move(blocks));
}

FiniteProbSpace support_space(const NestedLaw& mu) {
  std::vector<std::pair<std::string, Rational>> atoms;
  atoms.reserve(mu.dist.size());
  for (std::size_t a = 0; a < mu.dist.size(); ++a) {
    atoms.emplace_back("z" + std::to_string(a + 1), mu.dist.entries()[a].second);
  }
  return FiniteProbSpace(std::move(atoms));
}

}  // namespace

ConsistencyReport check_consistently_terminating(const NestedLaw& mu) {
  validate_shape(mu);
  if (mu.rank == 0) return {};
  Chain chain = restriction_chain(mu);
  if (!chain.failure.empty()) return {false, chain.failure};

  const FiniteProbSpace space = support_space(mu);
  const auto& top = chain.levels[static_cast<std::size_t>(mu.rank)];
  const std::size_t n = top.front().timesteps();
  for (std::size_t t = 1; t < n; ++t) {
    const Partition g = prefix_partition(top, t);
    for (int k = 0; k < mu.rank; ++k) {
      const auto& zk1 = chain.levels[static_cast<std::size_t>(k) + 1];
      std::vector<NestedDistribution> next;
      next.reserve(zk1.size());
      for (NestedValue z : zk1) next.push_back(z.coord(t + 1));
      const auto laws =
          conditional_law_by_block(space, g, std::span<const NestedDistribution>(next));
      for (std::size_t b = 0; b < g.block_count(); ++b) {
        const NestedDistribution mean = intensity(laws[b]);
        const std::size_t a = g.block(b).front();
        const NestedDistribution& now = zk1[a].coord(t);
        if (mean == now) continue;
        // Name the first indicator bracket Z[1{v}] whose identity fails.
        std::vector<NestedValue> points;
        for (const auto& [v, p] : mean) points.push_back(v);
        for (const auto& [v, p] : now) points.push_back(v);
        std::sort(points.begin(), points.end());
        for (NestedValue v : points) {
          const Rational lhs = mean.mass(v);
          const Rational rhs = now.mass(v);
          if (lhs != rhs) {
            return {false, "martingale identity E[Z^" + std::to_string(k + 1) + "_" +
                               std::to_string(t + 1) + "[1{v}] | G_" + std::to_string(t) +
                               "] = Z^" + std::to_string(k + 1) + "_" + std::to_string(t) +
                               "[1{v}] fails on the block of support point " +
                               std::to_string(a + 1) + " for v = " + describe(v) +
                               ": " + to_string(lhs) + " != " + to_string(rhs)};
          }
        }
      }
    }
  }
  return {};
}

bool is_consistently_terminating(const NestedLaw& mu) {
  return check_consistently_terminating(mu).ok;
}

FilteredRandomVariable canonical_representative(const NestedLaw& mu,
                                                std::shared_ptr<const StateSpace> states) {
  ConsistencyReport report = check_consistently_terminating(mu);
  if (!report.ok) throw Error(Errc::kNotConsistent, report.diagnostic);
  FiniteProbSpace space = support_space(mu);
  Chain chain = restriction_chain(mu);
  const auto& top = chain.levels[static_cast<std::size_t>(mu.rank)];
  std::vector<Partition> steps;
  if (mu.rank == 0) {
    // A rank-0 law carries no time structure; use a single discrete step.
    steps.push_back(Partition::discrete(space.size()));
  } else {
    const std::size_t n = top.front().timesteps();
    for (std::size_t t = 1; t <= n; ++t) steps.push_back(prefix_partition(top, t));
  }
  return FilteredRandomVariable(std::move(states), std::move(space),
                                Filtration(std::move(steps)), chain.levels.front());
}

int saturation_rank(const FilteredRandomVariable& x) {
  return static_cast<int>(x.timesteps()) - 1;
}

NestedLaw stabilized(const FilteredRandomVariable& x, int k) {
  const int sat = saturation_rank(x);
  if (k < sat) {
    throw Error(Errc::kInvalidArgument, "rank " + std::to_string(k) +
                                            " is below the saturation rank " +
                                            std::to_string(sat));
  }
  auto levels = pp_levels(x, k);
  const auto& base = levels[static_cast<std::size_t>(sat)].values();
  const auto& high = levels[static_cast<std::size_t>(k)].values();
  std::unordered_map<NestedValue, NestedValue> image;
  for (std::size_t a = 0; a < base.size(); ++a) {
    auto [it, inserted] = image.emplace(base[a], high[a]);
    if (!inserted && !(it->second == high[a])) {
      throw Error(Errc::kInvalidArgument,
                  "rank " + std::to_string(k) + " separates atoms that agree at rank " +
                      std::to_string(sat));
    }
  }
  return NestedLaw{k, pushforward(x.space(), std::span<const NestedValue>(high))};
}

bool is_adapted(const FilteredRandomVariable& x) {
  const std::size_t n = x.timesteps();
  for (NestedValue v : x.values()) {
    if (v.level() != 0 || v.labels().size() != n) {
      throw Error(Errc::kNotAPath, "value is not a path with " + std::to_string(n) +
                                       " coordinates");
    }
  }
  const auto pp1 = pp(x, 1);
  for (std::size_t a = 0; a < x.space().size(); ++a) {
    for (std::size_t t = 1; t <= n; ++t) {
      const NestedDistribution& law = pp1.value(a).coord(t);
      const std::string& own = x.value(a).labels()[t - 1];
      for (const auto& [path, p] : law) {
        if (path.labels()[t - 1] != own) return false;
      }
    }
  }
  return true;
}

FilteredProcess iota(const FilteredRandomVariable& x, const std::string& s0) {
  if (!x.states().contains(s0)) {
    throw Error(Errc::kUnknownState, "unknown state '" + s0 + "'");
  }
  const std::size_t n = x.timesteps();
  std::vector<std::vector<std::string>> paths;
  paths.reserve(x.space().size());
  for (NestedValue v : x.values()) {
    if (v.level() != 0 || v.labels().size() != 1) {
      throw Error(Errc::kInvalidArgument, "iota needs a state-valued variable");
    }
    std::vector<std::string> path(n, s0);
    path.back() = v.labels().front();
    paths.push_back(std::move(path));
  }
  return FilteredProcess(x.states_ptr(), x.space(), x.filtration(), std::move(paths));
}

FilteredRandomVariable diamond(const FilteredRandomVariable& x,
                               const std::map<std::string, std::string>& f,
                               std::shared_ptr<const StateSpace> target) {
  if (x.level() != 0) throw Error(Errc::kInvalidArgument, "diamond needs level-0 values");
  std::vector<NestedValue> values;
  values.reserve(x.values().size());
  for (NestedValue v : x.values()) {
    std::vector<std::string> labels;
    for (const auto& label : v.labels()) {
      auto it = f.find(label);
      if (it == f.end()) {
        throw Error(Errc::kUnknownState, "map is undefined at state '" + label + "'");
      }
      labels.push_back(it->second);
    }
    values.push_back(NestedValue::point(std::move(labels)));
  }
  return FilteredRandomVariable(std::move(target), x.space(), x.filtration(),
                                std::move(values));
}

}  // namespace fpt
