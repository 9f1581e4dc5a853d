#include <gtest/gtest.h>

#include <random>

#include "toposforge/errors.hpp"
#include "toposforge/site.hpp"

using namespace tf;

namespace {

struct NamedSite {
  FiniteCategory C;
  Topology J;
};

std::vector<NamedSite> sites() {
  std::vector<NamedSite> out;
  for (auto C : {terminal_category(), interval_category(), parallel_pair(), span_category(), commuting_square()})
    out.push_back({C, trivial_topology(C)});
  auto I = interval_category();
  out.push_back({I, topology_from_generators(I, {{"1", {{"u"}}}})});
  auto P = parallel_pair();
  out.push_back({P, topology_from_generators(P, {{"1", {{"s", "t"}}}})});
  return out;
}

std::size_t hom_count(const FiniteCategory& C, const Presheaf& X, const Presheaf& Y) {
  return for_each_map(C, X, Y, [](const PshMap&) { return true; });
}

}  // namespace

TEST(Site, TopologyExamples) {
  auto I = interval_category();
  EXPECT_TRUE(trivial_topology(I).is_trivial(I));
  auto J = topology_from_generators(I, {{"1", {{"u"}}}});
  Mor u = *I.find_morphism("u");
  EXPECT_TRUE(J.covering(1, SieveMask{1} << u));
  EXPECT_EQ(J.minimal[1], SieveMask{1} << u);
  // ∅ covers 1 but nothing else is added
  std::vector<std::vector<SieveMask>> bad = {{maximal_sieve(I, 0)}, {0, maximal_sieve(I, 1)}};
  auto v = topology_violations(I, bad);
  bool transitivity = false;
  for (const auto& e : v) transitivity |= e.axiom == "transitivity";
  EXPECT_TRUE(transitivity);
  EXPECT_THROW(validate_topology(I, bad), LawViolation);
  try {
    validate_topology(I, bad);
  } catch (const LawViolation& e) {
    EXPECT_NE(std::string(e.what()).find("transitivity"), std::string::npos);
  }
}

TEST(Site, ValidatedTopologiesAreIntersectionClosed) {
  for (const auto& [C, J] : sites()) {
    EXPECT_TRUE(topology_violations(C, J.covers).empty());
    for (Ob c = 0; c < C.num_objects(); ++c) EXPECT_TRUE(J.covering(c, J.minimal[c]));
  }
}

TEST(Site, SheafExamples) {
  auto I = interval_category();
  auto J = topology_from_generators(I, {{"1", {{"u"}}}});
  EXPECT_TRUE(is_sheaf(I, J, yoneda(I, 1)).sheaf);
  auto r = is_sheaf(I, J, yoneda(I, 0));
  EXPECT_FALSE(r.sheaf);
  EXPECT_FALSE(r.witness.empty());
  std::mt19937_64 rng(31);
  for (int t = 0; t < 20; ++t) EXPECT_TRUE(is_sheaf(I, trivial_topology(I), random_presheaf(I, 3, rng)).sheaf);
}

TEST(Site, SheafificationExamples) {
  auto I = interval_category();
  auto J = topology_from_generators(I, {{"1", {{"u"}}}});
  auto s0 = sheafify(I, J, yoneda(I, 0));
  EXPECT_EQ(s0.sheaf, terminal_presheaf(I));
  auto e = sheafify(I, J, initial_presheaf(I));
  EXPECT_EQ(e.sheaf, initial_presheaf(I));
  auto s1 = sheafify(I, J, yoneda(I, 1));
  EXPECT_TRUE(is_iso(s1.unit, s1.sheaf));
  // the unique map y(0) -> y(1) becomes an isomorphism
  PshMap incl{{{0}, {}}};
  ASSERT_FALSE(check_map(I, yoneda(I, 0), yoneda(I, 1), incl).has_value());
  auto m = sheafify_map(I, J, yoneda(I, 0), yoneda(I, 1), incl);
  EXPECT_TRUE(is_iso(m, s1.sheaf));
}

TEST(Site, TrivialTopologyPlusIsIdentity) {
  std::mt19937_64 rng(32);
  for (const auto& [C, J] : sites()) {
    if (!J.is_trivial(C)) continue;
    for (int t = 0; t < 5; ++t) {
      auto X = random_presheaf(C, 2, rng);
      auto s = sheafify(C, J, X);
      EXPECT_EQ(s.sheaf, X);
      EXPECT_EQ(s.unit, identity_map(X));
    }
  }
}

TEST(Site, SheafificationProperties) {
  std::mt19937_64 rng(33);
  for (const auto& [C, J] : sites())
    for (int t = 0; t < 8; ++t) {
      auto X = random_presheaf(C, 2, rng);
      auto s = sheafify(C, J, X);
      EXPECT_FALSE(check_presheaf(C, s.sheaf).has_value());
      EXPECT_FALSE(check_map(C, X, s.sheaf, s.unit).has_value());
      EXPECT_TRUE(is_sheaf(C, J, s.sheaf).sheaf) << is_sheaf(C, J, s.sheaf).witness;
      // idempotence
      auto ss = sheafify(C, J, s.sheaf);
      EXPECT_TRUE(is_iso(ss.unit, ss.sheaf));
      // functoriality on identities and composites
      EXPECT_EQ(sheafify_map(C, J, X, X, identity_map(X)), identity_map(s.sheaf));
      auto Y = random_presheaf(C, 2, rng), Z = random_presheaf(C, 2, rng);
      auto a = random_map(C, X, Y, rng);
      auto b = random_map(C, Y, Z, rng);
      if (a && b) {
        auto lhs = sheafify_map(C, J, X, Z, compose(*b, *a));
        auto rhs = compose(sheafify_map(C, J, Y, Z, *b), sheafify_map(C, J, X, Y, *a));
        EXPECT_EQ(lhs, rhs);
        // naturality of the unit
        auto sY = sheafify(C, J, Y);
        EXPECT_EQ(compose(sheafify_map(C, J, X, Y, *a), s.unit), compose(sY.unit, *a));
      }
    }
}

TEST(Site, UnitIsUniversalAmongSheaves) {
  std::mt19937_64 rng(34);
  for (const auto& [C, J] : sites())
    for (int t = 0; t < 5; ++t) {
      auto X = random_presheaf(C, 2, rng);
      auto F = sheafify(C, J, random_presheaf(C, 2, rng)).sheaf;
      auto s = sheafify(C, J, X);
      EXPECT_EQ(hom_count(C, s.sheaf, F), hom_count(C, X, F));
      auto g = random_map(C, X, F, rng);
      if (!g) continue;
      auto ext = extend_to_sheafification(C, J, X, F, *g);
      EXPECT_EQ(compose(ext, s.unit), *g);
    }
}

TEST(Site, SheafificationIsLeftExact) {
  std::mt19937_64 rng(35);
  for (const auto& [C, J] : sites())
    for (int t = 0; t < 6; ++t) {
      auto Z = random_presheaf(C, 2, rng);
      auto X = random_presheaf(C, 2, rng), Y = random_presheaf(C, 2, rng);
      auto a = random_map(C, X, Z, rng);
      auto b = random_map(C, Y, Z, rng);
      if (!a || !b) continue;
      auto P = pullback(C, X, *a, Y, *b, Z);
      auto sP = sheafify(C, J, P.apex).sheaf;
      auto sX = sheafify(C, J, X).sheaf, sY = sheafify(C, J, Y).sheaf, sZ = sheafify(C, J, Z).sheaf;
      auto sa = sheafify_map(C, J, X, Z, *a), sb = sheafify_map(C, J, Y, Z, *b);
      Square sq{sP, sY, sX, sZ, sheafify_map(C, J, P.apex, Y, P.legs[1]), sheafify_map(C, J, P.apex, X, P.legs[0]),
                sb, sa};
      auto r = is_cartesian_square(C, sq);
      EXPECT_TRUE(r.commutes);
      EXPECT_TRUE(r.cartesian) << r.witness;
      // terminal object
      EXPECT_EQ(sheafify(C, J, terminal_presheaf(C)).sheaf, terminal_presheaf(C));
    }
}

TEST(Site, SheafificationPreservesSmallness) {
  std::mt19937_64 rng(36);
  for (const auto& [C, J] : sites())
    for (int N = 2; N <= 3; ++N)
      for (int t = 0; t < 8; ++t) {
        auto Y = random_presheaf(C, 2, rng);
        auto f = random_family(C, Y, N, rng);
        auto g = sheafify_family(C, J, f);
        EXPECT_FALSE(check_family(C, g).has_value());
        EXPECT_LT(max_fiber(g), sheafified_fiber_bound(C, J, N));
        if (N == 2) EXPECT_LT(max_fiber(g), N);
      }
}

TEST(Site, CoverWidth) {
  auto I = interval_category();
  auto dense = topology_from_generators(I, {{"1", {{"u"}}}});
  EXPECT_EQ(cover_width(I, dense, 1), 1);
  EXPECT_EQ(sheafified_fiber_bound(I, dense, 3), 3);
  auto P = parallel_pair();
  auto joint = topology_from_generators(P, {{"1", {{"s", "t"}}}});
  EXPECT_EQ(cover_width(P, joint, 1), 2);
  EXPECT_EQ(sheafified_fiber_bound(P, joint, 3), 17);
}

TEST(Site, JointCoverMultipliesFibers) {
  // X(0) = 2, X(1) = 1 over the terminal presheaf: the sheafified fiber at 1 is X(0)^2.
  auto P = parallel_pair();
  auto joint = topology_from_generators(P, {{"1", {{"s", "t"}}}});
  Presheaf X{{2, 1}, {}};
  X.act.assign(P.num_morphisms(), {});
  X.act[P.id(0)] = {0, 1};
  X.act[P.id(1)] = {0};
  X.act[*P.find_morphism("s")] = {0};
  X.act[*P.find_morphism("t")] = {0};
  ASSERT_FALSE(check_presheaf(P, X).has_value());
  Family f{X, terminal_presheaf(P), to_terminal(X)};
  EXPECT_EQ(max_fiber(f), 2);
  auto g = sheafify_family(P, joint, f);
  EXPECT_EQ(g.total.size[1], 4);
  EXPECT_EQ(max_fiber(g), 4);
}
