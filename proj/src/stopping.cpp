#include "fpt/stopping.hpp"

#include <algorithm>
#include <functional>
#include <random>
#include <unordered_map>

namespace fpt {

RewardSpec RewardSpec::from_table(std::vector<std::map<std::string, Rational>> table) {
  if (table.empty()) throw Error(Errc::kBadTimestep, "reward table has no timesteps");
  RewardSpec g;
  g.table_ = std::move(table);
  return g;
}

RewardSpec RewardSpec::from_terms(std::vector<Term> terms) {
  if (terms.empty()) throw Error(Errc::kBadTimestep, "reward has no timesteps");
  for (const auto& t : terms) {
    if (!t) throw Error(Errc::kInvalidArgument, "null reward term");
    if (t->rank != 0) {
      throw Error(Errc::kInvalidArgument, "reward term " + print(t) + " has positive rank");
    }
  }
  RewardSpec g;
  g.terms_ = std::move(terms);
  return g;
}

RewardSpec RewardSpec::constant(std::size_t timesteps, Rational c) {
  return from_terms(std::vector<Term>(timesteps, fpt::constant(std::move(c))));
}

std::size_t RewardSpec::timesteps() const {
  return terms_.empty() ? table_.size() : terms_.size();
}

void RewardSpec::validate(const StateSpace& states, std::size_t timesteps) const {
  if (this->timesteps() != timesteps) {
    throw Error(Errc::kBadTimestep, "reward has " + std::to_string(this->timesteps()) +
                                        " timesteps, process has " + std::to_string(timesteps));
  }
  for (std::size_t t = 0; t < table_.size(); ++t) {
    for (const auto& s : states.states()) {
      if (!table_[t].contains(s.label)) {
        throw Error(Errc::kMissingValue, "reward at t=" + std::to_string(t + 1) +
                                             " misses state '" + s.label + "'");
      }
    }
  }
}

std::vector<std::map<std::string, Rational>> RewardSpec::tabulate(
    std::shared_ptr<const StateSpace> states) const {
  if (terms_.empty()) return table_;
  std::vector<std::map<std::string, Rational>> out(terms_.size());
  for (std::size_t t = 0; t < terms_.size(); ++t) {
    for (const auto& s : states->states()) {
      out[t][s.label] = eval_point(terms_[t], states, NestedValue::state(s.label));
    }
  }
  return out;
}

namespace {

SnellResult backward_induction(const std::shared_ptr<const StateSpace>& states,
                               const FiniteProbSpace& space, const Filtration& filtration,
                               const std::vector<std::vector<std::string>>& paths,
                               const RewardSpec& g) {
  const std::size_t n = filtration.timesteps();
  g.validate(*states, n);
  const auto table = g.tabulate(states);
  const std::size_t atoms = space.size();
  SnellResult r;
  r.envelope.assign(n, std::vector<Rational>(atoms));
  r.continuation.assign(n, std::vector<Rational>(atoms));
  r.stop.assign(n, std::vector<bool>(atoms));
  for (std::size_t t = n; t >= 1; --t) {
    auto& v = r.envelope[t - 1];
    auto& c = r.continuation[t - 1];
    if (t == n) {
      for (std::size_t a = 0; a < atoms; ++a) c[a] = table[t - 1].at(paths[a][t - 1]);
    } else {
      const auto& next = r.envelope[t];
      for (const auto& block : filtration.step(t).blocks()) {
        Rational mass = 0;
        Rational sum = 0;
        for (std::size_t a : block) {
          mass += space.weight(a);
          sum += space.weight(a) * next[a];
        }
        sum /= mass;
        for (std::size_t a : block) c[a] = sum;
      }
    }
    for (std::size_t a = 0; a < atoms; ++a) {
      const Rational& reward = table[t - 1].at(paths[a][t - 1]);
      r.stop[t - 1][a] = reward >= c[a];
      v[a] = r.stop[t - 1][a] ? reward : c[a];
    }
  }
  r.value = 0;
  for (std::size_t a = 0; a < atoms; ++a) r.value += space.weight(a) * r.envelope[0][a];
  r.tau.assign(atoms, n);
  for (std::size_t a = 0; a < atoms; ++a) {
    for (std::size_t t = 1; t <= n; ++t) {
      if (r.stop[t - 1][a]) {
        r.tau[a] = t;
        break;
      }
    }
  }
  return r;
}

}  // namespace

SnellResult snell(const FilteredProcess& x, const RewardSpec& g) {
  return backward_induction(x.states_ptr(), x.space(), x.filtration(), x.paths(), g);
}

SnellResult snell(const FilteredRandomVariable& x, const RewardSpec& g) {
  if (!is_adapted(x)) throw Error(Errc::kNotAdapted, "path is not adapted to the filtration");
  std::vector<std::vector<std::string>> paths;
  paths.reserve(x.values().size());
  for (NestedValue v : x.values()) paths.push_back(v.labels());
  return backward_induction(x.states_ptr(), x.space(), x.filtration(), paths, g);
}

bool separates(const FilteredProcess& x, const FilteredProcess& y, const RewardSpec& g) {
  return equiv_rank(x.as_frv(), y.as_frv(), 1) && snell(x, g).value != snell(y, g).value;
}

namespace {

// Set partitions of {0..m-1} via restricted growth strings.
std::vector<Partition> all_partitions(std::size_t m) {
  std::vector<Partition> out;
  std::vector<std::size_t> rgs(m, 0);
  std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t i, std::size_t used) {
    if (i == m) {
      std::vector<std::vector<std::size_t>> blocks(used);
      for (std::size_t a = 0; a < m; ++a) blocks[rgs[a]].push_back(a);
      out.emplace_back(m, std::move(blocks));
      return;
    }
    for (std::size_t b = 0; b <= used && b < m; ++b) {
      rgs[i] = b;
      rec(i + 1, std::max(used, b + 1));
    }
  };
  rec(0, 0);
  // Coarse first.
  std::stable_sort(out.begin(), out.end(), [](const Partition& a, const Partition& b) {
    return a.block_count() < b.block_count();
  });
  return out;
}

// Nonincreasing positive weight vectors of length m with denominators <= d.
std::vector<std::vector<Rational>> weight_vectors(std::size_t m, std::size_t d) {
  std::vector<Rational> fractions;
  for (std::size_t q = 1; q <= d; ++q) {
    for (std::size_t p = 1; p <= q; ++p) {
      Rational f = make_rational(static_cast<long>(p), static_cast<long>(q));
      if (std::find(fractions.begin(), fractions.end(), f) == fractions.end()) {
        fractions.push_back(f);
      }
    }
  }
  std::sort(fractions.begin(), fractions.end(), std::greater<>());
  std::vector<std::vector<Rational>> out;
  std::vector<Rational> cur;
  std::function<void(std::size_t, Rational)> rec = [&](std::size_t from, Rational left) {
    if (cur.size() == m) {
      if (left == 0) out.push_back(cur);
      return;
    }
    for (std::size_t i = from; i < fractions.size(); ++i) {
      const Rational& f = fractions[i];
      if (f > left) continue;
      // The remaining atoms get at most f each.
      if (f * static_cast<long>(m - cur.size()) < left) break;
      cur.push_back(f);
      rec(i, left - f);
      cur.pop_back();
    }
  };
  rec(0, Rational(1));
  return out;
}

struct Instance {
  std::size_t weights;
  std::vector<std::size_t> chain;
  std::uint64_t mask;
};

class Search {
 public:
  explicit Search(const SearchSpace& space)
      : space_(space), states_(binary()), rng_(space.seed) {}

  SeparationWitness run() {
    for (std::size_t n = 3; n <= space_.max_steps; ++n) {
      for (std::size_t m = 1; m <= space_.max_atoms; ++m) {
        if (auto w = scan(n, m)) return std::move(*w);
      }
    }
    throw Error(Errc::kNotFound, "no separating pair within the search budget (" +
                                     std::to_string(instances_) + " instances, " +
                                     std::to_string(candidates_) + " candidate pairs)");
  }

 private:
  static std::shared_ptr<const StateSpace> binary() {
    return std::make_shared<const StateSpace>(std::vector<State>{
        {"0", {Rational(0)}}, {"1", {Rational(1)}}});
  }

  FilteredProcess build(std::size_t n, std::size_t m, const Instance& inst) const {
    std::vector<std::pair<std::string, Rational>> atoms;
    for (std::size_t a = 0; a < m; ++a) {
      atoms.emplace_back("a" + std::to_string(a), weights_[inst.weights][a]);
    }
    std::vector<Partition> steps;
    for (std::size_t i : inst.chain) steps.push_back(partitions_[i]);
    std::vector<std::vector<std::string>> paths(m, std::vector<std::string>(n));
    std::size_t bit = 0;
    for (std::size_t t = 0; t < n; ++t) {
      for (const auto& block : steps[t].blocks()) {
        const char* label = (inst.mask >> bit++ & 1) ? "1" : "0";
        for (std::size_t a : block) paths[a][t] = label;
      }
    }
    return FilteredProcess(states_, FiniteProbSpace(std::move(atoms)),
                           Filtration(std::move(steps)), std::move(paths));
  }

  RewardSpec random_reward(std::size_t n) {
    std::uniform_int_distribution<long> pick(0, 12);
    std::vector<std::map<std::string, Rational>> table(n);
    for (auto& row : table) {
      row["0"] = make_rational(pick(rng_), 12);
      row["1"] = make_rational(pick(rng_), 12);
    }
    return RewardSpec::from_table(std::move(table));
  }

  std::optional<SeparationWitness> try_pair(const FilteredProcess& x, const FilteredProcess& y) {
    ++candidates_;
    for (std::size_t s = 0; s < space_.reward_samples; ++s) {
      RewardSpec g = random_reward(x.timesteps());
      Rational vx = snell(x, g).value;
      Rational vy = snell(y, g).value;
      if (vx != vy) {
        return SeparationWitness{x, y, std::move(g), std::move(vx), std::move(vy)};
      }
    }
    return std::nullopt;
  }

  std::optional<SeparationWitness> scan(std::size_t n, std::size_t m) {
    partitions_ = all_partitions(m);
    weights_ = weight_vectors(m, space_.max_denominator);
    std::vector<std::vector<std::size_t>> chains;
    std::vector<std::size_t> chain;
    std::function<void()> rec = [&] {
      if (chain.size() == n) {
        chains.push_back(chain);
        return;
      }
      for (std::size_t i = 0; i < partitions_.size(); ++i) {
        if (!chain.empty() && !refines(partitions_[i], partitions_[chain.back()])) continue;
        chain.push_back(i);
        rec();
        chain.pop_back();
      }
    };
    rec();

    // rank-1 law -> distinct saturated laws seen with it
    std::unordered_map<std::string, std::vector<std::pair<std::string, Instance>>> buckets;
    for (std::size_t w = 0; w < weights_.size(); ++w) {
      for (const auto& c : chains) {
        std::size_t bits = 0;
        for (std::size_t i : c) bits += partitions_[i].block_count();
        if (bits >= 63) continue;
        for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << bits); ++mask) {
          if (++instances_ > space_.max_instances) {
            throw Error(Errc::kNotFound, "search enumerated " +
                                             std::to_string(space_.max_instances) +
                                             " instances without a separating pair");
          }
          Instance inst{w, c, mask};
          const FilteredProcess x = build(n, m, inst);
          const auto levels = pp_levels(x.as_frv(), static_cast<int>(n) - 1);
          auto law = [&](int k) {
            const auto& vals = levels[static_cast<std::size_t>(k)].values();
            const auto bytes =
                encode(NestedLaw{k, pushforward(x.space(), std::span<const NestedValue>(vals))});
            return std::string(bytes.begin(), bytes.end());
          };
          auto& bucket = buckets[law(1)];
          const std::string full = law(static_cast<int>(n) - 1);
          bool seen = false;
          for (const auto& [key, other] : bucket) seen = seen || key == full;
          if (seen) continue;
          for (const auto& [key, other] : bucket) {
            if (candidates_ >= space_.max_candidates) {
              throw Error(Errc::kNotFound, "search tried " +
                                               std::to_string(space_.max_candidates) +
                                               " candidate pairs without separation");
            }
            if (auto w2 = try_pair(build(n, m, other), x)) return w2;
          }
          bucket.emplace_back(full, std::move(inst));
        }
      }
    }
    return std::nullopt;
  }

  SearchSpace space_;
  std::shared_ptr<const StateSpace> states_;
  std::mt19937 rng_;
  std::vector<Partition> partitions_;
  std::vector<std::vector<Rational>> weights_;
  std::size_t instances_ = 0;
  std::size_t candidates_ = 0;
};

}  // namespace

SeparationWitness find_rank_separation(const SearchSpace& space) {
  if (space.max_steps > 4 || space.max_atoms > 8 || space.max_denominator > 4 ||
      space.max_denominator == 0) {
    throw Error(Errc::kInvalidArgument,
                "search space must have N <= 4, at most 8 atoms and denominators in 1..4");
  }
  return Search(space).run();
}

}  // namespace fpt
