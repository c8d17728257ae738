#include "support/generators.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <set>

namespace fpt::testsupport {

std::shared_ptr<const StateSpace> make_states(const std::vector<std::string>& labels) {
  std::vector<State> states;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    states.push_back({labels[i], {Rational(static_cast<long>(i))}});
  }
  return std::make_shared<const StateSpace>(std::move(states));
}

std::shared_ptr<const StateSpace> binary_states() {
  static const auto states = make_states({"0", "1"});
  return states;
}

FiniteProbSpace weighted_space(const std::vector<Rational>& weights) {
  std::vector<std::pair<std::string, Rational>> atoms;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    atoms.emplace_back("w" + std::to_string(i), weights[i]);
  }
  return FiniteProbSpace(std::move(atoms));
}

FiniteProbSpace random_space(std::mt19937& rng, std::size_t atoms) {
  std::uniform_int_distribution<long> pick(1, 6);
  std::vector<Rational> w(atoms);
  Rational total = 0;
  for (auto& x : w) {
    x = pick(rng);
    total += x;
  }
  for (auto& x : w) x /= total;
  return weighted_space(w);
}

FiniteProbSpace uniform_space(std::size_t atoms) {
  return weighted_space(std::vector<Rational>(atoms, Rational(1, static_cast<long>(atoms))));
}

namespace {

Partition from_labels(const std::vector<std::size_t>& label) {
  std::map<std::size_t, std::vector<std::size_t>> groups;
  for (std::size_t a = 0; a < label.size(); ++a) groups[label[a]].push_back(a);
  std::vector<std::vector<std::size_t>> blocks;
  for (auto& [k, block] : groups) blocks.push_back(std::move(block));
  return Partition(label.size(), std::move(blocks));
}

}  // namespace

Filtration random_filtration(std::mt19937& rng, std::size_t atoms, std::size_t steps) {
  std::uniform_int_distribution<std::size_t> split(0, 1);
  std::vector<std::size_t> label(atoms, 0);
  std::vector<Partition> out;
  std::uniform_int_distribution<int> keep(0, 2);
  for (std::size_t t = 0; t < steps; ++t) {
    // Leave a third of the steps uninformative so coarse filtrations show up.
    if (keep(rng) != 0) {
      for (auto& l : label) l = 2 * l + split(rng);
    }
    out.push_back(from_labels(label));
  }
  return Filtration(std::move(out));
}

FilteredProcess random_process(std::mt19937& rng, std::shared_ptr<const StateSpace> states,
                               std::size_t atoms, std::size_t steps) {
  FiniteProbSpace space = random_space(rng, atoms);
  Filtration filtration = random_filtration(rng, atoms, steps);
  std::uniform_int_distribution<std::size_t> pick(0, states->size() - 1);
  std::vector<std::vector<std::string>> paths(atoms, std::vector<std::string>(steps));
  for (std::size_t t = 1; t <= steps; ++t) {
    for (const auto& block : filtration.step(t).blocks()) {
      const std::string& label = states->states()[pick(rng)].label;
      for (std::size_t a : block) paths[a][t - 1] = label;
    }
  }
  return FilteredProcess(std::move(states), std::move(space), std::move(filtration),
                         std::move(paths));
}

FilteredProcess random_process(std::mt19937& rng, std::size_t atoms, std::size_t steps) {
  return random_process(rng, binary_states(), atoms, steps);
}

Filtration filtration_of(std::size_t atoms,
                         const std::vector<std::vector<std::vector<std::size_t>>>& steps) {
  std::vector<Partition> out;
  for (const auto& blocks : steps) out.emplace_back(atoms, blocks);
  return Filtration(std::move(out));
}

FilteredProcess make_process(std::shared_ptr<const StateSpace> states, FiniteProbSpace space,
                             Filtration filtration,
                             std::vector<std::vector<std::string>> paths) {
  return FilteredProcess(std::move(states), std::move(space), std::move(filtration),
                         std::move(paths));
}

FilteredRandomVariable jump_variant(bool informed_early) {
  FiniteProbSpace space = uniform_space(2);
  Filtration filtration =
      informed_early ? filtration_of(2, {{{0}, {1}}, {{0}, {1}}})
                     : filtration_of(2, {{{0, 1}}, {{0}, {1}}});
  return FilteredRandomVariable(binary_states(), std::move(space), std::move(filtration),
                                {NestedValue::state("0"), NestedValue::state("1")});
}

std::pair<FilteredProcess, FilteredProcess> rank2_witness() {
  // Atoms (eta, xi) = 00, 01, 10, 11; the path is (0, 0, xi). Atoms with
  // eta = 0 learn xi at time 2. Only the first process tells eta at time 1.
  std::vector<std::vector<std::string>> paths = {
      {"0", "0", "0"}, {"0", "0", "1"}, {"0", "0", "0"}, {"0", "0", "1"}};
  const std::vector<std::vector<std::size_t>> second = {{0}, {1}, {2, 3}};
  const std::vector<std::vector<std::size_t>> third = {{0}, {1}, {2}, {3}};
  FilteredProcess informed = make_process(
      binary_states(), uniform_space(4),
      filtration_of(4, {{{0, 1}, {2, 3}}, second, third}), paths);
  FilteredProcess blind = make_process(binary_states(), uniform_space(4),
                                       filtration_of(4, {{{0, 1, 2, 3}}, second, third}),
                                       paths);
  return {std::move(informed), std::move(blind)};
}

}  // namespace fpt::testsupport

namespace fpt::testsupport {

namespace {

FilteredProcess reindexed(const FilteredProcess& x, const std::vector<std::size_t>& source,
                          const std::vector<Rational>& weights) {
  // New atom i copies old atom source[i].
  std::vector<std::vector<std::string>> paths;
  for (std::size_t s : source) paths.push_back(x.paths()[s]);
  std::vector<Partition> steps;
  for (const auto& p : x.filtration().steps()) {
    std::map<std::size_t, std::vector<std::size_t>> blocks;
    for (std::size_t i = 0; i < source.size(); ++i) blocks[p.block_of(source[i])].push_back(i);
    std::vector<std::vector<std::size_t>> out;
    for (auto& [b, block] : blocks) out.push_back(std::move(block));
    steps.emplace_back(source.size(), std::move(out));
  }
  std::vector<std::pair<std::string, Rational>> atoms;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    atoms.emplace_back("v" + std::to_string(i), weights[i]);
  }
  return FilteredProcess(x.states_ptr(),
                         FiniteProbSpace(std::move(atoms)), Filtration(std::move(steps)),
                         std::move(paths));
}

}  // namespace

FilteredProcess split_atom(const FilteredProcess& x, std::size_t atom) {
  std::vector<std::size_t> source;
  std::vector<Rational> weights;
  for (std::size_t a = 0; a < x.space().size(); ++a) {
    source.push_back(a);
    weights.push_back(a == atom ? x.space().weight(a) / 2 : x.space().weight(a));
  }
  source.push_back(atom);
  weights.push_back(x.space().weight(atom) / 2);
  return reindexed(x, source, weights);
}

FilteredProcess shuffle_atoms(std::mt19937& rng, const FilteredProcess& x) {
  std::vector<std::size_t> source(x.space().size());
  for (std::size_t a = 0; a < source.size(); ++a) source[a] = a;
  std::shuffle(source.begin(), source.end(), rng);
  std::vector<Rational> weights;
  for (std::size_t s : source) weights.push_back(x.space().weight(s));
  return reindexed(x, source, weights);
}

}  // namespace fpt::testsupport

namespace fpt::testsupport {

Term random_term(std::mt19937& rng, const std::vector<std::string>& labels, std::size_t steps,
                 int max_rank, int depth) {
  std::uniform_int_distribution<int> kind(0, depth <= 0 ? 1 : 6);
  auto small = [&](long lo, long hi) {
    return make_rational(std::uniform_int_distribution<long>(lo, hi)(rng), 4);
  };
  auto sub = [&](int rank) { return random_term(rng, labels, steps, rank, depth - 1); };
  switch (kind(rng)) {
    case 0: {
      std::vector<std::string> subset;
      for (const auto& l : labels) {
        if (rng() % 2) subset.push_back(l);
      }
      if (subset.empty()) subset.push_back(labels[rng() % labels.size()]);
      return ind(std::move(subset));
    }
    case 1:
      return poly({small(-2, 4), small(-4, 4)}, {0});
    case 2:
      return prod({sub(max_rank), sub(max_rank)});
    case 3:
      return rng() % 2 ? min_of({sub(max_rank), sub(max_rank)})
                       : max_of({sub(max_rank), sub(max_rank)});
    case 4:
      return affine({small(-2, 2), small(-4, 4), small(-4, 4)}, {sub(max_rank), sub(max_rank)});
    case 5:
      return constant(small(0, 4));
    default:
      if (max_rank <= 0) return sub(0);
      return cond(sub(max_rank - 1), 1 + rng() % steps);
  }
}

}  // namespace fpt::testsupport

namespace fpt::testsupport {

std::vector<std::map<std::string, Rational>> random_reward_table(std::mt19937& rng,
                                                                const StateSpace& states,
                                                                std::size_t steps) {
  std::uniform_int_distribution<long> pick(0, 12);
  std::vector<std::map<std::string, Rational>> table(steps);
  for (auto& row : table) {
    for (const auto& s : states.states()) row[s.label] = make_rational(pick(rng), 12);
  }
  return table;
}

}  // namespace fpt::testsupport

namespace fpt::testsupport {

StepFilteredProcess jump_at(const Rational& s) {
  return StepFilteredProcess::with_terminal(
      binary_states(), uniform_space(2), TimeGrid({Rational(0), s, Rational(1)}),
      {Partition::trivial(2), Partition::discrete(2), Partition::discrete(2)}, {"0", "1"});
}

namespace {

std::vector<Rational> random_times(std::mt19937& rng, std::size_t count) {
  std::set<Rational> picked{Rational(1)};
  std::uniform_int_distribution<long> num(0, 11);
  while (picked.size() < count) picked.insert(make_rational(num(rng), 12));
  return {picked.begin(), picked.end()};
}

}  // namespace

StepFilteredProcess random_step_process(std::mt19937& rng, std::size_t atoms,
                                        std::size_t events, bool paths) {
  const FilteredProcess p = random_process(rng, binary_states(), atoms, events);
  TimeGrid grid(random_times(rng, events));
  if (paths) return expand(p, grid);
  std::vector<std::string> terminal;
  for (const auto& path : p.paths()) terminal.push_back(path.back());
  return StepFilteredProcess::with_terminal(p.states_ptr(), p.space(), grid,
                                            p.filtration().steps(), terminal);
}

TimeGrid random_grid(std::mt19937& rng, const TimeGrid& events, std::size_t max_size) {
  std::set<Rational> picked{Rational(1)};
  const std::size_t size = 1 + rng() % max_size;
  std::uniform_int_distribution<long> num(0, 23);
  while (picked.size() < size) {
    if (rng() % 2) {
      picked.insert(events.times()[rng() % events.size()]);
    } else {
      picked.insert(make_rational(num(rng), 24));
    }
  }
  return TimeGrid({picked.begin(), picked.end()});
}

}  // namespace fpt::testsupport

namespace fpt::testsupport {

namespace {

std::vector<Partition> set_partitions(std::size_t m) {
  std::vector<Partition> out;
  std::vector<std::size_t> rgs(m, 0);
  std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t i, std::size_t used) {
    if (i == m) {
      std::vector<std::vector<std::size_t>> blocks(used);
      for (std::size_t a = 0; a < m; ++a) blocks[rgs[a]].push_back(a);
      out.emplace_back(m, std::move(blocks));
      return;
    }
    for (std::size_t b = 0; b <= used; ++b) {
      rgs[i] = b;
      rec(i + 1, std::max(used, b + 1));
    }
  };
  rec(0, 0);
  return out;
}

void ordered_weights(std::size_t m, std::size_t d, std::vector<Rational>& cur, const Rational& left,
                     std::vector<std::vector<Rational>>& out) {
  if (cur.size() + 1 == m) {
    // The last weight is forced; keep it if its denominator is allowed.
    if (sgn(left) > 0 && left.get_den() <= static_cast<long>(d)) {
      cur.push_back(left);
      out.push_back(cur);
      cur.pop_back();
    }
    return;
  }
  std::set<Rational> options;
  for (std::size_t q = 1; q <= d; ++q) {
    for (std::size_t p = 1; p < q; ++p) options.insert(make_rational(static_cast<long>(p), static_cast<long>(q)));
  }
  for (const auto& w : options) {
    if (w >= left) continue;
    cur.push_back(w);
    ordered_weights(m, d, cur, left - w, out);
    cur.pop_back();
  }
}

}  // namespace

std::vector<FilteredProcess> enumerate_binary_processes(std::size_t max_atoms, std::size_t steps,
                                                        std::size_t max_denominator) {
  std::vector<FilteredProcess> out;
  for (std::size_t m = 1; m <= max_atoms; ++m) {
    std::vector<std::vector<Rational>> weights;
    std::vector<Rational> cur;
    ordered_weights(m, max_denominator, cur, Rational(1), weights);
    const auto parts = set_partitions(m);
    std::vector<std::vector<std::size_t>> chains;
    std::vector<std::size_t> chain;
    std::function<void()> rec = [&] {
      if (chain.size() == steps) {
        chains.push_back(chain);
        return;
      }
      for (std::size_t i = 0; i < parts.size(); ++i) {
        if (!chain.empty() && !refines(parts[i], parts[chain.back()])) continue;
        chain.push_back(i);
        rec();
        chain.pop_back();
      }
    };
    rec();
    for (const auto& w : weights) {
      for (const auto& c : chains) {
        std::size_t bits = 0;
        for (std::size_t i : c) bits += parts[i].block_count();
        for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << bits); ++mask) {
          std::vector<std::vector<std::string>> paths(m, std::vector<std::string>(steps));
          std::size_t bit = 0;
          std::vector<Partition> filtration;
          for (std::size_t t = 0; t < steps; ++t) {
            const Partition& p = parts[c[t]];
            filtration.push_back(p);
            for (const auto& block : p.blocks()) {
              const char* label = (mask >> bit++ & 1) ? "1" : "0";
              for (std::size_t a : block) paths[a][t] = label;
            }
          }
          out.emplace_back(binary_states(), weighted_space(w), Filtration(std::move(filtration)),
                           std::move(paths));
        }
      }
    }
  }
  return out;
}

}  // namespace fpt::testsupport
