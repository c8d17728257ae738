#include <gtest/gtest.h>

#include <random>

#include "fpt/prediction.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

namespace fpt {
namespace {

using namespace testsupport;

Rational Q(long p, long q = 1) { return make_rational(p, q); }

NestedValue S(const std::string& label) { return NestedValue::state(label); }

bool fully_dirac(NestedValue v) {
  if (v.level() == 0) return true;
  for (const auto& d : v.coords()) {
    if (!d.is_dirac() || !fully_dirac(d.entries().front().first)) return false;
  }
  return true;
}

FilteredRandomVariable deterministic() {
  return make_process(binary_states(), uniform_space(1), filtration_of(1, {{{0}}, {{0}}}),
                      {{"0", "1"}})
      .as_frv();
}

TEST(PP, DeterministicIsFullyDirac) {
  const auto x = deterministic();
  for (int n = 0; n <= 4; ++n) {
    const auto z = pp(x, n);
    EXPECT_EQ(z.level(), n);
    EXPECT_TRUE(fully_dirac(z.value(0)));
    const auto law = adapted_distribution(x, n);
    EXPECT_TRUE(law.dist.is_dirac());
  }
  EXPECT_EQ(pp(x, 0).values(), x.values());
}

TEST(PP, JumpVariantsFirstStep) {
  const auto blind = jump_variant(false);
  const auto informed = jump_variant(true);
  const auto uniform = NestedDistribution::from_entries({{S("0"), Q(1, 2)}, {S("1"), Q(1, 2)}});
  for (std::size_t a = 0; a < 2; ++a) {
    EXPECT_EQ(pp(blind, 1).value(a).coord(1), uniform);
    EXPECT_EQ(pp(informed, 1).value(a).coord(1), dirac(informed.value(a)));
  }
}

TEST(PP, MatchesStringOracleAtRankTwo) {
  std::mt19937 rng(31);
  for (int iter = 0; iter < 100; ++iter) {
    const auto x = random_process(rng, 4, 3).as_frv();
    const auto oracle = plain_pp(x, 2);
    const auto z = pp(x, 2);
    for (std::size_t a = 0; a < 4; ++a) EXPECT_EQ(plain(z.value(a)), oracle[a]);
  }
}

TEST(PP, MatchesStringOracleAcrossShapes) {
  std::mt19937 rng(32);
  for (int iter = 0; iter < 100; ++iter) {
    const auto x = random_process(rng, make_states({"a", "b", "c"}), 1 + rng() % 6,
                                  1 + rng() % 4)
                       .as_frv();
    const int n = static_cast<int>(rng() % 4);
    EXPECT_EQ(plain_law(adapted_distribution(x, n)), plain_law(x, n));
  }
}

TEST(PP, LevelsAgreeWithDirectComputation) {
  std::mt19937 rng(33);
  const auto x = random_process(rng, 5, 3).as_frv();
  const auto levels = pp_levels(x, 3);
  for (int n = 0; n <= 3; ++n) EXPECT_EQ(levels[n].values(), pp(x, n).values());
}

TEST(AdaptedDistribution, RankZeroIsLaw) {
  const auto x = jump_variant(false);
  const auto law = adapted_distribution(x, 0);
  EXPECT_EQ(law.rank, 0);
  EXPECT_EQ(law.dist, NestedDistribution::from_entries({{S("0"), Q(1, 2)}, {S("1"), Q(1, 2)}}));
}

TEST(AdaptedDistribution, JumpVariantsDifferAtRankOne) {
  EXPECT_FALSE(adapted_distribution(jump_variant(false), 1) ==
               adapted_distribution(jump_variant(true), 1));
}

TEST(EquivRank, Reflexive) {
  std::mt19937 rng(34);
  for (int iter = 0; iter < 20; ++iter) {
    const auto x = random_process(rng, 1 + rng() % 5, 1 + rng() % 3).as_frv();
    for (int n = 0; n <= 3; ++n) EXPECT_TRUE(equiv_rank(x, x, n));
  }
}

TEST(EquivRank, JumpVariants) {
  EXPECT_TRUE(equiv_rank(jump_variant(false), jump_variant(true), 0));
  EXPECT_FALSE(equiv_rank(jump_variant(false), jump_variant(true), 1));
}

TEST(EquivRank, RankTwoWitness) {
  const auto [a, b] = rank2_witness();
  EXPECT_TRUE(equiv_rank(a.as_frv(), b.as_frv(), 0));
  EXPECT_TRUE(equiv_rank(a.as_frv(), b.as_frv(), 1));
  EXPECT_FALSE(equiv_rank(a.as_frv(), b.as_frv(), 2));
}

TEST(EquivRank, Incomparable) {
  std::mt19937 rng(35);
  const auto x = random_process(rng, 3, 2).as_frv();
  const auto y = random_process(rng, 3, 3).as_frv();
  try {
    (void)equiv_rank(x, y, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kIncomparable);
  }
  const auto z = random_process(rng, make_states({"0", "1", "2"}), 3, 2).as_frv();
  EXPECT_THROW((void)equiv_rank(x, z, 1), Error);
}

TEST(EquivRank, InvariantUnderSplittingAndShuffling) {
  std::mt19937 rng(36);
  for (int iter = 0; iter < 50; ++iter) {
    const auto p = random_process(rng, 1 + rng() % 5, 1 + rng() % 3);
    const auto q = shuffle_atoms(rng, split_atom(p, rng() % p.space().size()));
    for (int n = 0; n <= 3; ++n) EXPECT_TRUE(equiv_rank(p.as_frv(), q.as_frv(), n));
  }
}

TEST(EquivRank, MonotoneInRank) {
  std::mt19937 rng(37);
  for (int iter = 0; iter < 300; ++iter) {
    const std::size_t n = 1 + rng() % 4;
    const std::size_t steps = 1 + rng() % 3;
    const auto x = random_process(rng, n, steps).as_frv();
    const auto y = random_process(rng, n, steps).as_frv();
    bool prev = true;
    for (int k = 0; k <= 3; ++k) {
      const bool now = equiv_rank(x, y, k);
      if (!prev) EXPECT_FALSE(now);
      prev = now;
    }
  }
}

TEST(Consistency, DeterministicDiracPasses) {
  EXPECT_TRUE(is_consistently_terminating(adapted_distribution(deterministic(), 3)));
  NestedValue path = NestedValue::point({"0", "1"});
  NestedValue z = NestedValue::from_coords({dirac(path), dirac(path)});
  EXPECT_TRUE(is_consistently_terminating(NestedLaw{1, dirac(z)}));
}

TEST(Consistency, AdaptedDistributionsPass) {
  std::mt19937 rng(38);
  for (int iter = 0; iter < 200; ++iter) {
    const auto x = random_process(rng, 1 + rng() % 6, 1 + rng() % 3).as_frv();
    for (int n = 0; n <= 3; ++n) {
      const auto mu = adapted_distribution(x, n);
      const auto report = check_consistently_terminating(mu);
      EXPECT_TRUE(report.ok) << report.diagnostic;
      EXPECT_TRUE(martingale_oracle(mu));
    }
  }
}

TEST(Consistency, NonTerminalDiracFails) {
  NestedValue z = NestedValue::from_coords(
      {dirac(S("0")), NestedDistribution::from_entries({{S("0"), Q(1, 2)}, {S("1"), Q(1, 2)}})});
  const auto report = check_consistently_terminating(NestedLaw{1, dirac(z)});
  EXPECT_FALSE(report.ok);
  EXPECT_NE(report.diagnostic.find("terminal"), std::string::npos);
}

// Moves mass between the first two atoms of one interior coordinate of one
// support point of mu.
std::optional<NestedLaw> perturb(const NestedLaw& mu, std::mt19937& rng) {
  const auto& support = mu.dist.entries();
  std::vector<std::pair<std::size_t, std::size_t>> spots;
  for (std::size_t a = 0; a < support.size(); ++a) {
    const auto& coords = support[a].first.coords();
    for (std::size_t t = 0; t + 1 < coords.size(); ++t) {
      if (coords[t].size() >= 2) spots.emplace_back(a, t);
    }
  }
  if (spots.empty()) return std::nullopt;
  const auto [a, t] = spots[rng() % spots.size()];
  auto coords = support[a].first.coords();
  auto entries = coords[t].entries();
  const Rational delta = std::min(entries[0].second, entries[1].second) / 2;
  entries[0].second += delta;
  entries[1].second -= delta;
  coords[t] = NestedDistribution::from_entries(entries);
  std::vector<NestedDistribution::Entry> law = support;
  law[a].first = NestedValue::from_coords(coords);
  return NestedLaw{mu.rank, NestedDistribution::from_entries(law)};
}

TEST(Consistency, PerturbationsAgreeWithOracle) {
  std::mt19937 rng(39);
  int failures = 0;
  for (int iter = 0; iter < 300; ++iter) {
    const auto x = random_process(rng, 2 + rng() % 4, 2 + rng() % 2).as_frv();
    const int n = 1 + static_cast<int>(rng() % 2);
    const auto mu = adapted_distribution(x, n);
    auto bent = perturb(mu, rng);
    if (!bent) continue;
    const bool ok = is_consistently_terminating(*bent);
    EXPECT_EQ(ok, martingale_oracle(*bent));
    if (!ok) ++failures;
  }
  EXPECT_GT(failures, 50);
}

TEST(Consistency, PerturbationOfKnownInstanceFails) {
  const auto mu = adapted_distribution(jump_variant(false), 1);
  std::mt19937 rng(1);
  const auto bent = perturb(mu, rng);
  ASSERT_TRUE(bent.has_value());
  const auto report = check_consistently_terminating(*bent);
  EXPECT_FALSE(report.ok);
  EXPECT_NE(report.diagnostic.find("martingale"), std::string::npos);
  EXPECT_FALSE(martingale_oracle(*bent));
}

TEST(Consistency, MalformedShape) {
  NestedLaw mixed{1, NestedDistribution::from_entries(
                         {{S("0"), Q(1, 2)}, {NestedValue::from_coords({dirac(S("0"))}), Q(1, 2)}})};
  try {
    (void)check_consistently_terminating(mixed);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kMalformedDistribution);
  }
}

TEST(CanonicalRepresentative, Deterministic) {
  const auto x = deterministic();
  const auto rep = canonical_representative(adapted_distribution(x, 1), x.states_ptr());
  EXPECT_EQ(rep.space().size(), 1u);
  EXPECT_EQ(rep.value(0), x.value(0));
}

TEST(CanonicalRepresentative, JumpVariantsRoundTrip) {
  for (bool informed : {false, true}) {
    const auto x = jump_variant(informed);
    const auto rep = canonical_representative(adapted_distribution(x, 1), x.states_ptr());
    EXPECT_TRUE(equiv_rank(rep, x, 1));
    EXPECT_EQ(plain_law(rep, 1), plain_law(x, 1));
  }
}

TEST(CanonicalRepresentative, RoundTripAtSaturation) {
  std::mt19937 rng(40);
  for (int iter = 0; iter < 100; ++iter) {
    const auto x = random_process(rng, 1 + rng() % 6, 1 + rng() % 3).as_frv();
    const int n = saturation_rank(x);
    const auto mu = adapted_distribution(x, n);
    const auto rep = canonical_representative(mu, x.states_ptr());
    EXPECT_EQ(adapted_distribution(rep, n), mu);
    for (int k = 0; k <= n; ++k) {
      const auto z = pp(rep, k);
      for (std::size_t a = 0; a < rep.space().size(); ++a) {
        EXPECT_EQ(z.value(a), restrict(mu.dist.entries()[a].first, k));
      }
    }
  }
}

TEST(CanonicalRepresentative, RejectsInconsistent) {
  std::mt19937 rng(1);
  const auto bent = perturb(adapted_distribution(jump_variant(false), 1), rng);
  try {
    (void)canonical_representative(*bent, binary_states());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kNotConsistent);
  }
}

TEST(Saturation, SingleStep) {
  std::mt19937 rng(41);
  for (int iter = 0; iter < 50; ++iter) {
    const auto x = random_process(rng, 1 + rng() % 4, 1).as_frv();
    const auto y = random_process(rng, x.space().size(), 1).as_frv();
    EXPECT_EQ(saturation_rank(x), 0);
    EXPECT_EQ(equiv_rank(x, y, 0), equiv_rank(x, y, 5));
    EXPECT_EQ(stabilized(x, 5), adapted_distribution(x, 5));
  }
}

void saturation_agreement(std::size_t steps, int high, unsigned seed) {
  std::mt19937 rng(seed);
  int equivalent = 0;
  for (int iter = 0; iter < 100; ++iter) {
    const auto p = random_process(rng, 1 + rng() % 4, steps);
    // Mix unrelated pairs with resampled equivalent ones.
    const auto q = iter % 2 ? shuffle_atoms(rng, split_atom(p, 0))
                            : random_process(rng, p.space().size(), steps);
    const auto x = p.as_frv();
    const auto y = q.as_frv();
    const int sat = saturation_rank(x);
    const bool base = equiv_rank(x, y, sat);
    for (int k = sat + 1; k <= high; ++k) {
      EXPECT_EQ(base, stabilized(x, k) == stabilized(y, k));
    }
    equivalent += base;
  }
  EXPECT_GE(equivalent, 50);
}

TEST(Saturation, TwoSteps) { saturation_agreement(2, 3, 42); }

TEST(Saturation, ThreeSteps) { saturation_agreement(3, 4, 43); }

TEST(Saturation, BelowSaturationRejected) {
  const auto [a, b] = rank2_witness();
  EXPECT_THROW((void)stabilized(a.as_frv(), 1), Error);
}

TEST(IsAdapted, ProcessesPass) {
  std::mt19937 rng(44);
  for (int iter = 0; iter < 50; ++iter) {
    EXPECT_TRUE(is_adapted(random_process(rng, 1 + rng() % 5, 1 + rng() % 3).as_frv()));
  }
}

TEST(IsAdapted, IotaPasses) {
  std::mt19937 rng(45);
  for (int iter = 0; iter < 50; ++iter) {
    const std::size_t n = 1 + rng() % 5;
    const auto f = random_filtration(rng, n, 1 + rng() % 3);
    std::vector<NestedValue> values(n);
    for (const auto& block : f.steps().back().blocks()) {
      const auto v = S(rng() % 2 ? "1" : "0");
      for (std::size_t a : block) values[a] = v;
    }
    FilteredRandomVariable x(binary_states(), random_space(rng, n), f, values);
    const auto embedded = iota(x, "0");
    EXPECT_TRUE(is_adapted(embedded.as_frv()));
  }
}

TEST(IsAdapted, EarlyRevealFails) {
  FilteredRandomVariable x(binary_states(), uniform_space(2),
                           filtration_of(2, {{{0, 1}}, {{0}, {1}}}),
                           {NestedValue::point({"0", "0"}), NestedValue::point({"1", "1"})});
  EXPECT_FALSE(is_adapted(x));
  try {
    (void)is_adapted(jump_variant(false));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kNotAPath);
  }
}

TEST(FilteredProcess, RejectsNonAdapted) {
  try {
    (void)make_process(binary_states(), uniform_space(2), filtration_of(2, {{{0, 1}}, {{0}, {1}}}),
                       {{"0", "0"}, {"1", "1"}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kNotAdapted);
  }
  EXPECT_THROW((void)make_process(binary_states(), uniform_space(1), filtration_of(1, {{{0}}}),
                                  {{"2"}}),
               Error);
}

TEST(Diamond, ConstantMapCollapsesInformation) {
  const auto states = make_states({"u"});
  const auto collapsed = diamond(jump_variant(true), {{"0", "u"}, {"1", "u"}}, states);
  const auto other = diamond(jump_variant(false), {{"0", "u"}, {"1", "u"}}, states);
  EXPECT_TRUE(equiv_rank(collapsed, other, 3));
  EXPECT_THROW((void)diamond(jump_variant(true), {{"0", "u"}}, states), Error);
}

// Invariants over random instances.

TEST(Invariant, RestrictionConsistency) {
  std::mt19937 rng(46);
  for (int iter = 0; iter < 100; ++iter) {
    const auto x = random_process(rng, 1 + rng() % 5, 1 + rng() % 4).as_frv();
    const int top = std::max(saturation_rank(x), 1);
    const auto levels = pp_levels(x, top);
    for (std::size_t a = 0; a < x.space().size(); ++a) {
      for (int k = 0; k <= top; ++k) {
        for (int l = 0; l <= k; ++l) {
          EXPECT_EQ(restrict(levels[k].value(a), l), levels[l].value(a));
        }
      }
    }
  }
}

TEST(Invariant, TerminalDirac) {
  std::mt19937 rng(47);
  for (int iter = 0; iter < 100; ++iter) {
    const auto x = random_process(rng, 1 + rng() % 4, 1 + rng() % 3).as_frv();
    const auto levels = pp_levels(x, 3);
    for (int n = 1; n <= 3; ++n) {
      for (std::size_t a = 0; a < x.space().size(); ++a) {
        EXPECT_EQ(terminal_eval(levels[n].value(a), x.timesteps()),
                  dirac(levels[n - 1].value(a)));
      }
    }
  }
}

TEST(Invariant, SelfAwareness) {
  std::mt19937 rng(48);
  for (int iter = 0; iter < 100; ++iter) {
    const auto x = random_process(rng, 1 + rng() % 6, 1 + rng() % 3).as_frv();
    const auto levels = pp_levels(x, 2);
    for (int n = 1; n <= 2; ++n) {
      const auto& prev = levels[n - 1].values();
      for (std::size_t t = 1; t <= x.timesteps(); ++t) {
        std::vector<NestedDistribution> current;
        for (NestedValue v : levels[n].values()) current.push_back(v.coord(t));
        const Partition g =
            generated_partition(x.space(), std::span<const NestedDistribution>(current));
        EXPECT_EQ(conditional_law(x.space(), g, std::span<const NestedValue>(prev)),
                  conditional_law(x.space(), x.filtration().step(t),
                                  std::span<const NestedValue>(prev)));
      }
    }
  }
}

// Both directions at rank N-1 on a sweep of small instances: adapted
// distributions pass the check, and every law that passes (including the
// perturbed ones that still pass) is reproduced by its representative.
TEST(Invariant, ConsistencyCharacterizesAdaptedDistributions) {
  std::mt19937 rng(49);
  for (std::size_t atoms = 1; atoms <= 4; ++atoms) {
    for (std::size_t steps = 1; steps <= 3; ++steps) {
      for (int iter = 0; iter < 40; ++iter) {
        const auto x = random_process(rng, atoms, steps).as_frv();
        const int n = saturation_rank(x);
        const auto mu = adapted_distribution(x, n);
        ASSERT_TRUE(is_consistently_terminating(mu));
        std::vector<NestedLaw> candidates{mu};
        if (auto bent = perturb(mu, rng)) candidates.push_back(*bent);
        for (const auto& nu : candidates) {
          if (!is_consistently_terminating(nu)) continue;
          const auto rep = canonical_representative(nu, x.states_ptr());
          EXPECT_EQ(adapted_distribution(rep, n), nu);
        }
      }
    }
  }
}

}  // namespace
}  // namespace fpt
