#include <gtest/gtest.h>

#include <random>

#include "toposforge/errors.hpp"
#include "toposforge/presheaf.hpp"

using namespace tf;

namespace {

std::vector<FiniteCategory> corpus() {
  return {terminal_category(), interval_category(), parallel_pair(), span_category(), commuting_square()};
}

// Maps X -> Y commuting with x : X -> B and y : Y -> B.
std::size_t maps_over(const FiniteCategory& C, const Presheaf& X, const PshMap& x, const Presheaf& Y,
                      const PshMap& y) {
  std::size_t n = 0;
  for_each_map(C, X, Y, [&](const PshMap& h) {
    n += compose(y, h) == x;
    return true;
  });
  return n;
}

Family family_with_fibers(const std::vector<int>& sizes) {
  auto T = terminal_category();
  Family f;
  f.base = constant_presheaf(T, static_cast<int>(sizes.size()));
  f.proj.at.assign(1, {});
  for (std::size_t i = 0; i < sizes.size(); ++i)
    for (int k = 0; k < sizes[i]; ++k) f.proj.at[0].push_back(static_cast<int>(i));
  f.total = constant_presheaf(T, static_cast<int>(f.proj.at[0].size()));
  return f;
}

}  // namespace

TEST(Topos, OmegaSizes) {
  auto O1 = subobject_classifier(terminal_category());
  EXPECT_EQ(O1.omega.size, (std::vector<int>{2}));
  auto O2 = subobject_classifier(interval_category());
  EXPECT_EQ(O2.omega.size, (std::vector<int>{2, 3}));
  for (const auto& C : corpus()) {
    auto O = subobject_classifier(C);
    EXPECT_FALSE(check_presheaf(C, O.omega).has_value());
    for (Ob c = 0; c < C.num_objects(); ++c) EXPECT_EQ(O.omega.size[c], static_cast<int>(enumerate_subobjects(C, yoneda(C, c)).size()));
  }
}

TEST(Topos, CharacteristicMapClassifies) {
  std::mt19937_64 rng(11);
  for (const auto& C : corpus()) {
    auto O = subobject_classifier(C);
    for (int t = 0; t < 10; ++t) {
      auto X = random_presheaf(C, 3, rng);
      auto S = random_subobject(C, X, rng);
      auto chi = characteristic(C, O, S.sub, S.incl, X);
      EXPECT_FALSE(check_map(C, X, O.omega, chi).has_value());
      Square sq{S.sub, terminal_presheaf(C), X, O.omega, to_terminal(S.sub), S.incl, O.truth, chi};
      auto r = is_cartesian_square(C, sq);
      EXPECT_TRUE(r.cartesian) << r.witness;
    }
    auto X = random_presheaf(C, 2, rng);
    auto chi = characteristic(C, O, X, identity_map(X), X);
    for (Ob c = 0; c < C.num_objects(); ++c)
      for (int v : chi.at[c]) EXPECT_EQ(v, O.truth.at[c][0]);
  }
  auto T = terminal_category();
  auto two = constant_presheaf(T, 2);
  EXPECT_THROW(characteristic(T, subobject_classifier(T), two, PshMap{{{0, 0}}}, two), LawViolation);
}

TEST(Topos, PartialMapClassifier) {
  for (const auto& C : corpus()) {
    auto P = partial_map_classifier(C, initial_presheaf(C));
    EXPECT_EQ(P.plus, terminal_presheaf(C));
  }
  auto T = terminal_category();
  EXPECT_EQ(partial_map_classifier(T, terminal_presheaf(T)).plus.size[0], 2);
  std::mt19937_64 rng(12);
  for (const auto& C : corpus())
    for (int t = 0; t < 5; ++t) {
      auto X = random_presheaf(C, 2, rng);
      auto P = partial_map_classifier(C, X);
      EXPECT_FALSE(check_presheaf(C, P.plus).has_value());
      EXPECT_FALSE(check_map(C, X, P.plus, P.unit).has_value());
      EXPECT_TRUE(is_mono(P.unit, P.plus));
    }
}

TEST(Topos, DependentProductExamples) {
  auto T = terminal_category();
  // I = 1, A = 1 ⊔ 1, B with fibers (2, 3)
  Family f{constant_presheaf(T, 2), terminal_presheaf(T), PshMap{{{0, 0}}}};
  Family g = family_with_fibers({2, 3});
  auto D = dependent_product(T, f, g);
  EXPECT_EQ(D.family.total.size[0], 6);

  std::mt19937_64 rng(13);
  for (const auto& C : corpus())
    for (int t = 0; t < 6; ++t) {
      auto I = random_presheaf(C, 2, rng);
      auto ff = random_family(C, I, 3, rng);
      // singleton fibers stay singleton
      Family ids{ff.total, ff.total, identity_map(ff.total)};
      auto Dp = dependent_product(C, ff, ids);
      for (Ob c = 0; c < C.num_objects(); ++c) EXPECT_EQ(Dp.family.total.size[c], I.size[c]);
      // along the identity, f_*g ≅ g
      auto gg = random_family(C, I, 3, rng);
      Family idf{I, I, identity_map(I)};
      auto Di = dependent_product(C, idf, gg);
      EXPECT_EQ(Di.family.total.size, gg.total.size);
      EXPECT_FALSE(check_family(C, Di.family).has_value());
    }
}

TEST(Topos, DependentProductUniversalProperty) {
  // Maps Z -> f_*g over I biject with maps f^*Z -> g over A.
  std::mt19937_64 rng(14);
  for (const auto& C : corpus())
    for (int t = 0; t < 4; ++t) {
      auto I = random_presheaf(C, 2, rng);
      auto f = random_family(C, I, 3, rng);
      auto g = random_family(C, f.total, 3, rng);
      auto D = dependent_product(C, f, g);
      auto Z = random_presheaf(C, 2, rng);
      auto z = random_map(C, Z, I, rng);
      if (!z) continue;
      std::size_t lhs = maps_over(C, Z, *z, D.family.total, D.family.proj);
      auto fz = pull_back(C, Family{Z, I, *z}, f.total, f.proj);
      std::size_t rhs = maps_over(C, fz.family.total, fz.family.proj, g.total, g.proj);
      EXPECT_EQ(lhs, rhs);
    }
}

TEST(Topos, SubobjectCounts) {
  auto T = terminal_category();
  EXPECT_EQ(enumerate_subobjects(T, terminal_presheaf(T)).size(), 2u);
  EXPECT_EQ(enumerate_subobjects(T, initial_presheaf(T)).size(), 1u);
  auto I = interval_category();
  EXPECT_EQ(enumerate_subobjects(I, yoneda(I, 1)).size(), 3u);
  std::mt19937_64 rng(15);
  for (const auto& C : corpus()) {
    auto X = random_presheaf(C, 2, rng);
    for (const auto& S : enumerate_subobjects(C, X)) {
      EXPECT_FALSE(check_map(C, S.sub, X, S.incl).has_value());
      EXPECT_TRUE(is_mono(S.incl, X));
    }
  }
}

TEST(Topos, CongruenceCounts) {
  auto T = terminal_category();
  EXPECT_EQ(enumerate_congruences(T, constant_presheaf(T, 2)).size(), 2u);
  EXPECT_EQ(enumerate_congruences(T, constant_presheaf(T, 3)).size(), 5u);
  auto I = interval_category();
  EXPECT_EQ(enumerate_congruences(I, yoneda(I, 1)).size(), 1u);
  std::mt19937_64 rng(16);
  for (const auto& C : corpus()) {
    EXPECT_EQ(enumerate_congruences(C, terminal_presheaf(C)).size(), 1u);
    auto X = random_presheaf(C, 2, rng);
    for (const auto& R : enumerate_congruences(C, X)) {
      auto Q = quotient(C, X, R);
      EXPECT_FALSE(check_presheaf(C, Q.quotient).has_value());
      EXPECT_FALSE(check_map(C, X, Q.quotient, Q.epi).has_value());
      EXPECT_TRUE(is_epi(Q.epi, Q.quotient));
    }
  }
}

TEST(Topos, SievesAreClosed) {
  for (const auto& C : corpus())
    for (Ob c = 0; c < C.num_objects(); ++c) {
      auto all = sieves_on(C, c);
      EXPECT_EQ(all.front(), SieveMask{0});
      for (SieveMask s : all)
        for (Mor f : C.into[c]) EXPECT_TRUE(is_sieve(C, C.src(f), pullback_sieve(C, s, f)));
      EXPECT_EQ(pullback_sieve(C, maximal_sieve(C, c), C.id(c)), maximal_sieve(C, c));
    }
}
