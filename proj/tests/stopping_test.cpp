#include <gtest/gtest.h>

#include <chrono>
#include <random>

#include "fpt/stopping.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

namespace fpt {
namespace {

using namespace testsupport;

Rational Q(long p, long q = 1) { return make_rational(p, q); }

std::vector<std::map<std::string, Rational>> witness_table() {
  return {{{"0", Q(2, 3)}, {"1", Q(0)}}, {{"0", Q(1, 2)}, {"1", Q(0)}}, {{"0", Q(0)}, {"1", Q(1)}}};
}

TEST(Snell, DeterministicPathTakesTheBestTime) {
  const auto x = make_process(binary_states(), uniform_space(1),
                              filtration_of(1, {{{0}}, {{0}}, {{0}}}), {{"0", "1", "0"}});
  std::vector<std::map<std::string, Rational>> table = {
      {{"0", Q(1, 3)}, {"1", Q(0)}}, {{"0", Q(0)}, {"1", Q(1, 4)}}, {{"0", Q(1, 2)}, {"1", Q(1)}}};
  EXPECT_EQ(snell(x, RewardSpec::from_table(table)).value, Q(1, 2));
}

TEST(Snell, ConstantReward) {
  std::mt19937 rng(71);
  for (int iter = 0; iter < 20; ++iter) {
    const auto x = random_process(rng, 1 + rng() % 5, 1 + rng() % 4);
    EXPECT_EQ(snell(x, RewardSpec::constant(x.timesteps(), Q(3, 7))).value, Q(3, 7));
  }
}

TEST(Snell, KnownRankTwoWitness) {
  const auto [informed, blind] = rank2_witness();
  const auto g = RewardSpec::from_table(witness_table());
  EXPECT_EQ(snell(informed, g).value, Q(17, 24));
  EXPECT_EQ(snell(blind, g).value, Q(2, 3));
  EXPECT_TRUE(separates(informed, blind, g));
  EXPECT_TRUE(separates(blind, informed, g));
}

TEST(Snell, MatchesStoppingTimeEnumeration) {
  std::mt19937 rng(72);
  for (int iter = 0; iter < 300; ++iter) {
    const std::size_t atoms = 1 + rng() % 4;
    const std::size_t steps = 1 + rng() % 3;
    const auto states = iter % 2 ? binary_states() : make_states({"a", "b", "c"});
    const auto x = random_process(rng, states, atoms, steps);
    const auto table = random_reward_table(rng, *states, steps);
    EXPECT_EQ(snell(x, RewardSpec::from_table(table)).value,
              stopping_enumeration_oracle(x, table));
  }
}

TEST(Snell, EnvelopeDominatesAndIsTight) {
  std::mt19937 rng(73);
  for (int iter = 0; iter < 100; ++iter) {
    const auto x = random_process(rng, 1 + rng() % 6, 1 + rng() % 4);
    const auto table = random_reward_table(rng, x.states(), x.timesteps());
    const auto r = snell(x, RewardSpec::from_table(table));
    const std::size_t n = x.timesteps();
    Rational achieved = 0;
    for (std::size_t a = 0; a < x.space().size(); ++a) {
      for (std::size_t t = 1; t <= n; ++t) {
        const Rational& g = table[t - 1].at(x.at(a, t));
        const Rational& v = r.envelope[t - 1][a];
        EXPECT_GE(v, g);
        EXPECT_GE(v, r.continuation[t - 1][a]);
        // No one-step improvement: V is exactly the larger of the two.
        EXPECT_EQ(v, std::max(g, r.continuation[t - 1][a]));
        EXPECT_EQ(r.stop[t - 1][a], g >= r.continuation[t - 1][a]);
      }
      achieved += x.space().weight(a) * table[r.tau[a] - 1].at(x.at(a, r.tau[a]));
    }
    EXPECT_EQ(achieved, r.value);
    // The rule is F_t-measurable.
    for (std::size_t t = 1; t <= n; ++t) {
      for (const auto& block : x.filtration().step(t).blocks()) {
        for (std::size_t a : block) EXPECT_EQ(r.stop[t - 1][a], r.stop[t - 1][block.front()]);
      }
    }
    EXPECT_TRUE(r.stop[n - 1] == std::vector<bool>(x.space().size(), true));
  }
}

TEST(Snell, InvariantUnderSplitAndShuffle) {
  std::mt19937 rng(74);
  for (int iter = 0; iter < 100; ++iter) {
    const auto x = random_process(rng, 1 + rng() % 5, 1 + rng() % 4);
    const auto y = shuffle_atoms(rng, split_atom(x, rng() % x.space().size()));
    ASSERT_TRUE(equiv_rank(x.as_frv(), y.as_frv(), static_cast<int>(x.timesteps())));
    const auto g = RewardSpec::from_table(random_reward_table(rng, x.states(), x.timesteps()));
    EXPECT_EQ(snell(x, g).value, snell(y, g).value);
  }
}

TEST(Snell, TermRewardsMatchTables) {
  std::mt19937 rng(75);
  const auto states = make_states({"a", "b", "c"});
  const std::vector<Term> terms = {parse_term("affine[1/4,1/2](ind{b,c})"),
                                   parse_term("poly[0,1/3;0]"),
                                   parse_term("max(ind{a},const[1/5])")};
  const auto g = RewardSpec::from_terms(terms);
  const auto table = g.tabulate(states);
  EXPECT_EQ(table[0].at("a"), Q(1, 4));
  EXPECT_EQ(table[0].at("b"), Q(3, 4));
  EXPECT_EQ(table[1].at("c"), Q(2, 3));
  EXPECT_EQ(table[2].at("b"), Q(1, 5));
  for (int iter = 0; iter < 30; ++iter) {
    const auto x = random_process(rng, states, 1 + rng() % 4, 3);
    EXPECT_EQ(snell(x, g).value, snell(x, RewardSpec::from_table(table)).value);
  }
}

TEST(Snell, Errors) {
  const auto x = jump_variant(false);
  try {
    (void)snell(x, RewardSpec::constant(2, Q(0)));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kNotAPath);
  }
  // The path (0, X) with X revealed only at t = 2 is adapted; (X, X) is not.
  const auto not_adapted = x.with_values({NestedValue::point({"0", "0"}), NestedValue::point({"1", "1"})});
  try {
    (void)snell(not_adapted, RewardSpec::constant(2, Q(0)));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kNotAdapted);
  }
  const auto adapted = x.with_values({NestedValue::point({"0", "0"}), NestedValue::point({"0", "1"})});
  EXPECT_EQ(snell(adapted, RewardSpec::constant(2, Q(1))).value, 1);
  std::mt19937 rng(76);
  const auto p = random_process(rng, 2, 2);
  EXPECT_THROW((void)snell(p, RewardSpec::constant(3, Q(0))), Error);
  EXPECT_THROW((void)snell(p, RewardSpec::from_table({{{"0", Q(0)}}, {{"0", Q(0)}, {"1", Q(0)}}})),
               Error);
  EXPECT_THROW((void)RewardSpec::from_terms({parse_term("(ind{0}|1)")}), Error);
}

TEST(RankSeparation, FindsCertifiedPair) {
  const auto start = std::chrono::steady_clock::now();
  const auto w = find_rank_separation();
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  RecordProperty("seconds", std::to_string(seconds));
  EXPECT_TRUE(equiv_rank(w.x.as_frv(), w.y.as_frv(), 1));
  EXPECT_FALSE(equiv_rank(w.x.as_frv(), w.y.as_frv(), 2));
  EXPECT_NE(w.value_x, w.value_y);
  EXPECT_EQ(snell(w.x, w.reward).value, w.value_x);
  EXPECT_EQ(snell(w.y, w.reward).value, w.value_y);
  EXPECT_TRUE(separates(w.x, w.y, w.reward));
  EXPECT_TRUE(separates(w.y, w.x, w.reward));
  EXPECT_GE(w.x.timesteps(), 3u);
  EXPECT_LE(w.x.space().size(), 8u);
  // Deterministic.
  const auto again = find_rank_separation();
  EXPECT_EQ(again.value_x, w.value_x);
  EXPECT_EQ(again.value_y, w.value_y);
}

TEST(RankSeparation, BudgetAndBounds) {
  SearchSpace tiny;
  tiny.max_atoms = 2;
  tiny.max_steps = 3;
  try {
    (void)find_rank_separation(tiny);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kNotFound);
  }
  SearchSpace big;
  big.max_steps = 5;
  EXPECT_THROW((void)find_rank_separation(big), Error);
}

}  // namespace
}  // namespace fpt
