#include <gtest/gtest.h>

#include <algorithm>

#include "toposforge/errors.hpp"
#include "toposforge/universe.hpp"

using namespace tf;

namespace {

std::vector<FiniteCategory> corpus() {
  return {terminal_category(), interval_category(), parallel_pair(), span_category(), commuting_square()};
}

bool in_level(const HsUniverse& U, const CodePair& P) {
  if (!pair_fits(P, U.N)) return false;
  try {
    pi_code(U, P);
  } catch (const BoundOverflow&) {
    return false;
  }
  return true;
}

// Elements of the larger formation data that are formation data of the smaller level.
Subobject level_part(const HsUniverse& small, const FormationData& D) {
  std::vector<std::vector<char>> member(D.pairs.size());
  for (std::size_t c = 0; c < D.pairs.size(); ++c)
    for (const CodePair& P : D.pairs[c]) member[c].push_back(in_level(small, P));
  return subobject_from_membership(small.C, D.data, member);
}

}  // namespace

TEST(Hierarchy, InclusionIsVerbatim) {
  for (const auto& C : corpus()) {
    auto U2 = hs_universe(C, 2), U3 = hs_universe(C, 3);
    for (Ob c = 0; c < C.num_objects(); ++c)
      for (const Code& code : U2.materialize(c)) {
        Code up = hierarchy_include(U2, U3, code);
        EXPECT_EQ(up, code);
        EXPECT_FALSE(U3.check_code(up).has_value());
        for (Mor u : C.into[c]) EXPECT_EQ(U3.restrict(up, u), hierarchy_include(U2, U3, U2.restrict(code, u)));
      }
  }
}

TEST(Hierarchy, InclusionRejectsBadLevels) {
  auto I = interval_category();
  auto U2 = hs_universe(I, 2), U3 = hs_universe(I, 3);
  EXPECT_THROW(hierarchy_include(U3, U2, U2.constant_code(0, 1)), InputError);
  EXPECT_THROW(hierarchy_include(U2, U2, U2.constant_code(0, 1)), InputError);
  EXPECT_THROW(hierarchy_include(U2, U3, U3.constant_code(0, 2)), InputError);
  EXPECT_THROW(hierarchy_include(U2, hs_universe(parallel_pair(), 3), U2.constant_code(0, 1)), InputError);
}

TEST(Hierarchy, CodePairEnumerationIsExhaustive) {
  for (const auto& C : corpus())
    for (int N = 2; N <= 3; ++N) {
      if (N == 3 && C.num_objects() > 3) continue;
      auto U = hs_universe(C, N);
      for (Ob c = 0; c < C.num_objects(); ++c) {
        auto pairs = enumerate_code_pairs(U, c);
        EXPECT_EQ(pairs.size(), count_code_pairs(U, c)) << C.object_names[c] << " N=" << N;
        for (const auto& P : pairs) EXPECT_FALSE(check_code_pair(U, P).has_value());
        auto sorted = pairs;
        std::sort(sorted.begin(), sorted.end());
        EXPECT_EQ(std::adjacent_find(sorted.begin(), sorted.end()), sorted.end());
      }
    }
}

TEST(Hierarchy, TerminalCodePairCount) {
  // a < 3 and b : a -> {0,1,2}: 1 + 3 + 9
  auto U = hs_universe(terminal_category(), 3);
  EXPECT_EQ(enumerate_code_pairs(U, 0).size(), 13u);
}

TEST(Hierarchy, FormersCommuteWithInclusion) {
  for (const auto& C : corpus()) {
    auto U2 = hs_universe(C, 2), U4 = hs_universe(C, 4);
    for (Ob c = 0; c < C.num_objects(); ++c)
      for (const CodePair& P : enumerate_code_pairs(U2, c)) {
        EXPECT_EQ(pi_code(U4, P), pi_code(U2, P));
        EXPECT_EQ(ordered_pi(U4, P, SectionOrder::Lexicographic), pi_code(U2, P));
        try {
          Code s = sigma_code(U2, P);
          EXPECT_EQ(sigma_code(U4, P), s);
        } catch (const BoundOverflow& e) {
          EXPECT_GT(e.required, 2);
        }
      }
  }
}

TEST(Hierarchy, ReversedFormerNeedsStrictification) {
  auto T = terminal_category();
  auto U2 = hs_universe(T, 2), U3 = hs_universe(T, 3);
  // a = 1, b = {1}: a single section, reversal is invisible
  CodePair one{U2.constant_code(0, 1), {{U2.constant_code(0, 1)}}};
  EXPECT_EQ(ordered_pi(U3, one, SectionOrder::Reversed), pi_code(U2, one));
  int naive = 0, strict = 0, total = 0;
  for (const auto& C : {terminal_category(), interval_category()}) {
    auto S = hs_universe(C, 3), L = hs_universe(C, 6);
    for (Ob c = 0; c < C.num_objects(); ++c)
      for (const CodePair& P : enumerate_code_pairs(S, c)) {
        Code lex;
        try {
          lex = pi_code(S, P);
        } catch (const BoundOverflow&) {
          continue;
        }
        ++total;
        naive += !(ordered_pi(L, P, SectionOrder::Reversed) == lex);
        strict += !(strictified_pi(S, L, P, SectionOrder::Reversed) == lex);
      }
  }
  EXPECT_GT(total, 0);
  EXPECT_GT(naive, 0);
  EXPECT_EQ(strict, 0);
}

TEST(Hierarchy, StrictifiedFormerIsStableUnderSubstitution) {
  for (const auto& C : corpus()) {
    if (C.num_objects() > 3) continue;
    auto S = hs_universe(C, 2), L = hs_universe(C, 3);
    for (Ob c = 0; c < C.num_objects(); ++c)
      for (const CodePair& P : enumerate_code_pairs(L, c)) {
        Code q;
        try {
          q = strictified_pi(S, L, P, SectionOrder::Reversed);
        } catch (const BoundOverflow&) {
          continue;
        }
        EXPECT_FALSE(L.check_code(q).has_value());
        for (Mor u : C.into[c])
          EXPECT_EQ(L.restrict(q, u), strictified_pi(S, L, restrict_pair(L, P, u), SectionOrder::Reversed));
        if (pair_fits(P, 2)) EXPECT_EQ(q, pi_code(S, P));
      }
  }
}

TEST(Hierarchy, FormationDataIsAFamily) {
  for (const auto& C : corpus()) {
    if (C.num_objects() > 3) continue;
    auto U = hs_universe(C, 3);
    for (auto order : {SectionOrder::Lexicographic, SectionOrder::Reversed}) {
      auto D = formation_data(U, order);
      EXPECT_FALSE(check_presheaf(C, D.data).has_value());
      EXPECT_FALSE(check_family(C, D.pi_family).has_value());
    }
    auto D = formation_data(U);
    auto k = classify_family(U, D.pi_family);
    for (Ob c = 0; c < C.num_objects(); ++c)
      for (std::size_t i = 0; i < D.pairs[c].size(); ++i) EXPECT_EQ(k.code[c][i], pi_code(U, D.pairs[c][i]));
  }
}

TEST(Hierarchy, RealignedFormerMatchesStrictification) {
  struct Case {
    FiniteCategory C;
    int n, m;
  };
  for (const auto& [C, n, m] : {Case{terminal_category(), 3, 5}, Case{interval_category(), 2, 3},
                                Case{parallel_pair(), 2, 3}}) {
    auto S = hs_universe(C, n), L = hs_universe(C, m);
    auto D = formation_data(L, SectionOrder::Reversed);
    Subobject A = level_part(S, D);
    RealignmentProblem P{D.pi_family, A.sub, A.incl, {}};
    auto pb = pull_back(C, D.pi_family, A.sub, A.incl);
    // lexicographic positions over the level-n part
    std::vector<std::vector<int>> beta(C.num_objects());
    for (Ob c = 0; c < C.num_objects(); ++c)
      for (int z = 0; z < pb.family.total.size[c]; ++z) {
        int x = pb.top.at[c][z];
        int i = D.pi_family.proj.at[c][x];
        int first = x;
        while (first > 0 && D.pi_family.proj.at[c][first - 1] == i) --first;
        int n = static_cast<int>(fiber(D.pi_family, c, i).size());
        beta[c].push_back(n - 1 - (x - first));
      }
    P.partial = classify_aligned(L, pb.family, beta);
    ASSERT_FALSE(check_problem(L, P).has_value());
    auto chi = realign_presheaf(L, P);
    EXPECT_EQ(boundary_mismatch(L, P, chi), "");
    for (Ob c = 0; c < C.num_objects(); ++c)
      for (std::size_t i = 0; i < D.pairs[c].size(); ++i) {
        EXPECT_EQ(chi.code[c][i], strictified_pi(S, L, D.pairs[c][i], SectionOrder::Reversed));
        if (in_level(S, D.pairs[c][i])) EXPECT_EQ(chi.code[c][i], pi_code(S, D.pairs[c][i]));
      }
  }
}
