#include <gtest/gtest.h>

#include <random>

#include "toposforge/errors.hpp"
#include "toposforge/gluing.hpp"

using namespace tf;

TEST(Gluing, ConeOfThePoint) {
  auto g = build_gluing(terminal_category());
  EXPECT_EQ(g.cone.num_objects(), 2);
  EXPECT_EQ(g.J.size, (std::vector<int>{1, 0}));
  Presheaf X = constant_presheaf(g.C, 3);
  Presheaf E = j_push(g, X);
  EXPECT_EQ(E.size, (std::vector<int>{3, 3}));
  EXPECT_EQ(j_shriek(g, X).size, (std::vector<int>{3, 0}));
}

TEST(Gluing, PushforwardOnTheIntervalIsTheValueAtOne) {
  // 1 is terminal in the interval, so the limit of X is X(1).
  auto g = build_gluing(interval_category());
  std::mt19937_64 rng(2);
  for (int i = 0; i < 30; ++i) {
    Presheaf X = random_presheaf(g.C, 3, rng);
    Presheaf E = j_push(g, X);
    EXPECT_EQ(E.size[g.top], X.size[1]);
    EXPECT_FALSE(check_presheaf(g.cone, E).has_value());
  }
}

TEST(Gluing, CounitIsIdentityOnTheOpenPart) {
  auto g = build_gluing(interval_category());
  std::mt19937_64 rng(4);
  for (int i = 0; i < 20; ++i) {
    Presheaf E = random_presheaf(g.cone, 2, rng);
    PshMap eps = open_counit(g, E);
    EXPECT_EQ(j_pull(g, eps), identity_map(j_pull(g, E)));
    EXPECT_TRUE(eps.at[g.top].empty());
    EXPECT_TRUE(is_mono(eps, E));
  }
}

TEST(Gluing, LawsHoldOnSamples) {
  for (auto C : {terminal_category(), interval_category(), parallel_pair(), span_category()}) {
    auto g = build_gluing(C);
    auto r = check_gluing_laws(g, 40, 2, 17);
    EXPECT_GT(r.checks, 0u);
    EXPECT_TRUE(r.failures.empty()) << r.failures.front();
  }
}

TEST(Gluing, FractureSquares) {
  auto g = build_gluing(interval_category());
  std::mt19937_64 rng(8);
  // empty top part
  Presheaf open_only = j_shriek(g, random_presheaf(g.C, 2, rng));
  auto f1 = recollement_fracture(g, open_only);
  EXPECT_TRUE(f1.report.commutes && f1.report.cartesian);
  EXPECT_EQ(f1.square.tr.size[g.top], 0);
  // pushed forward: the closed leg is the identity at top
  Presheaf pushed = j_push(g, random_presheaf(g.C, 2, rng));
  auto f2 = recollement_fracture(g, pushed);
  EXPECT_TRUE(f2.report.commutes && f2.report.cartesian);
  EXPECT_EQ(f2.square.left, identity_map(pushed));
  for (int i = 0; i < 50; ++i) {
    Presheaf E = random_presheaf(g.cone, 2, rng);
    auto f = recollement_fracture(g, E);
    EXPECT_TRUE(f.report.commutes && f.report.cartesian) << f.report.witness;
    EXPECT_TRUE(is_connected(g, f.square.tr));
    EXPECT_EQ(f.square.tr.size[g.top], E.size[g.top]);
  }
}

TEST(Gluing, ClosedInclusionNeedsConnectedObjects) {
  auto g = build_gluing(interval_category());
  EXPECT_NO_THROW(i_push(g, terminal_presheaf(g.cone)));
  EXPECT_THROW(i_push(g, j_push(g, constant_presheaf(g.C, 2))), InputError);
}

TEST(Gluing, GluedUniverseOverThePoint) {
  auto g = build_gluing(terminal_category());
  auto G = glued_universe(g, 2, 4);
  EXPECT_EQ(G.pi_U.base.size[0], 2);
  EXPECT_EQ(j_pull(g, G.pi_U.base), G.mt.ty);
  EXPECT_EQ(j_pull(g, G.pi_U), G.mt.el);
  EXPECT_FALSE(check_glued_universe(G).has_value());
}

TEST(Gluing, GluedUniverseInvariants) {
  for (auto C : {terminal_category(), interval_category()})
    for (auto [N, M] : {std::pair{2, 2}, {2, 4}, {3, 3}, {3, 4}}) {
      auto G = glued_universe(build_gluing(C), N, M);
      auto e = check_glued_universe(G);
      EXPECT_FALSE(e.has_value()) << *e;
    }
}

TEST(Gluing, OuterBoundOverflowReportsRequiredBound) {
  for (auto C : {terminal_category(), interval_category()}) {
    auto g = build_gluing(C);
    try {
      glued_universe(g, 3, 2);
      ADD_FAILURE() << "expected overflow";
    } catch (const BoundOverflow& e) {
      // C has a terminal object, so the top fibers of j_*π_T are the fibers of π_T there
      EXPECT_EQ(e.required, 3);
    }
  }
}

TEST(Gluing, RealignAtSyntaxExamples) {
  auto g = build_gluing(interval_category());
  auto G = glued_universe(g, 3, 4);
  // empty top part: the result is x0 with nothing added
  Presheaf B = j_shriek(g, terminal_presheaf(g.C));
  Family f{B, B, identity_map(B)};
  auto x0 = classify_in_inner(G, j_pull(g, f), nullptr);
  auto x = realign_at_syntax(G, f, x0);
  EXPECT_EQ(j_pull(g, x.base), x0.base);
  EXPECT_TRUE(x.base.at[g.top].empty());
  // identity family on the terminal presheaf of the cone
  Presheaf one = terminal_presheaf(g.cone);
  Family id{one, one, identity_map(one)};
  auto y0 = classify_in_inner(G, j_pull(g, id), nullptr);
  auto y = realign_at_syntax(G, id, y0);
  EXPECT_FALSE(check_glued_solution(G, id, y0, y).has_value());
  EXPECT_EQ(j_pull(g, y.total), y0.total);
}

TEST(Gluing, RealignAtSyntaxHonoursNonCanonicalX0) {
  std::mt19937_64 rng(21);
  for (auto C : {terminal_category(), interval_category()}) {
    auto G = glued_universe(build_gluing(C), 3, 4);
    int non_canonical = 0, naive_failures = 0;
    for (int i = 0; i < 150; ++i) {
      auto P = random_glued_problem(G, 2, rng);
      auto x = realign_at_syntax(G, P.f, P.x0);
      auto e = check_glued_solution(G, P.f, P.x0, x);
      ASSERT_FALSE(e.has_value()) << *e;
      if (!P.canonical) {
        ++non_canonical;
        naive_failures += !naive_glued_mismatch(G, P.f, P.x0).empty();
      } else {
        EXPECT_EQ(naive_glued_mismatch(G, P.f, P.x0), "");
      }
    }
    EXPECT_GT(non_canonical, 10);
    EXPECT_GT(naive_failures, 0);
  }
}

TEST(Gluing, CheckerRejectsBrokenSolutions) {
  std::mt19937_64 rng(6);
  auto G = glued_universe(build_gluing(terminal_category()), 3, 4);
  int tampered = 0;
  for (int i = 0; i < 40 && tampered < 10; ++i) {
    auto P = random_glued_problem(G, 2, rng);
    auto x = realign_at_syntax(G, P.f, P.x0);
    if (x.base.at[G.ctx.top].empty()) continue;
    auto bad = x;
    int& v = bad.base.at[G.ctx.top][0];
    v = (v + 1) % G.pi_U.base.size[G.ctx.top];
    EXPECT_TRUE(check_glued_solution(G, P.f, P.x0, bad).has_value());
    ++tampered;
  }
  EXPECT_GT(tampered, 0);
}

TEST(Gluing, RejectsNonCartesianX0) {
  auto g = build_gluing(terminal_category());
  auto G = glued_universe(g, 3, 4);
  Presheaf two = constant_presheaf(g.cone, 2);
  Presheaf one = terminal_presheaf(g.cone);
  Family f{two, one, to_terminal(two)};
  auto x0 = classify_in_inner(G, j_pull(g, f), nullptr);
  auto bad = x0;
  bad.total.at[0][1] = bad.total.at[0][0];
  EXPECT_THROW(realign_at_syntax(G, f, bad), InputError);
}
