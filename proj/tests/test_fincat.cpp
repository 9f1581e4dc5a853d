#include <gtest/gtest.h>

#include <random>

#include "toposforge/errors.hpp"
#include "toposforge/fincat.hpp"

using namespace tf;

namespace {

std::vector<FiniteCategory> corpus() {
  return {empty_category(), terminal_category(), interval_category(), parallel_pair(), span_category(),
          commuting_square()};
}

// Independent count of morphisms into c.
int count_into(const FiniteCategory& C, Ob c) {
  int n = 0;
  for (Mor m = 0; m < C.num_morphisms(); ++m) n += C.dst(m) == c;
  return n;
}

}  // namespace

TEST(FinCat, CatalogSatisfiesLaws) {
  for (const auto& C : corpus()) EXPECT_FALSE(check_category_laws(C).has_value());
}

TEST(FinCat, TerminalAndInterval) {
  auto T = terminal_category();
  EXPECT_EQ(T.num_objects(), 1);
  EXPECT_EQ(T.num_morphisms(), 1);
  auto I = interval_category();
  EXPECT_EQ(I.num_morphisms(), 3);
  Mor u = *I.find_morphism("u");
  EXPECT_EQ(I.comp(u, I.id(0)), u);
  EXPECT_EQ(I.comp(I.id(1), u), u);
}

TEST(FinCat, NonAssociativeTableNamesTriple) {
  // Two objects with endomorphisms a on x; a∘a = a and a∘a = id would conflict, so build a
  // table by hand that is well typed but not associative.
  FiniteCategory C;
  C.object_names = {"x"};
  C.morphism_names = {"id_x", "a", "b"};
  C.source = {0, 0, 0};
  C.target = {0, 0, 0};
  C.identity = {0};
  // a∘a = b, a∘b = a, b∘a = b, b∘b = b
  C.table = {0, 1, 2, 1, 2, 1, 2, 2, 2};
  C.finalize();
  auto err = check_category_laws(C);
  ASSERT_TRUE(err.has_value());
  EXPECT_NE(err->find("associativity fails at"), std::string::npos);

  // Oracle: exhaustive scan for the first violated triple.
  bool found = false;
  for (Mor h = 0; h < 3 && !found; ++h)
    for (Mor g = 0; g < 3 && !found; ++g)
      for (Mor f = 0; f < 3 && !found; ++f)
        if (C.comp(C.comp(h, g), f) != C.comp(h, C.comp(g, f))) {
          found = true;
          std::string triple = "(" + C.morphism_names[h] + ", " + C.morphism_names[g] + ", " +
                               C.morphism_names[f] + ")";
          EXPECT_NE(err->find(triple), std::string::npos) << *err;
        }
  EXPECT_TRUE(found);
}

TEST(FinCat, ValidateRejectsBadInput) {
  EXPECT_THROW(validate_category({{"x", "x"}, {}, {}}), InputError);
  EXPECT_THROW(validate_category({{"x"}, {{"f", "x", "y"}}, {}}), InputError);
  EXPECT_THROW(validate_category({{"x", "y"}, {{"f", "x", "y"}}, {{"f", "f", "f"}}}), LawViolation);
  // missing composite for a composable pair
  EXPECT_THROW(validate_category({{"x", "y", "z"}, {{"f", "x", "y"}, {"g", "y", "z"}}, {}}), LawViolation);
}

TEST(FinCat, SliceOfTerminalIsTerminal) {
  auto S = slice_category(terminal_category(), 0);
  EXPECT_EQ(S.cat.num_objects(), 1);
  EXPECT_EQ(S.cat.num_morphisms(), 1);
}

TEST(FinCat, SliceOfInterval) {
  auto I = interval_category();
  auto S1 = slice_category(I, 1);
  EXPECT_EQ(S1.cat.num_objects(), count_into(I, 1));
  EXPECT_EQ(S1.cat.num_morphisms(), 3);
  EXPECT_FALSE(check_category_laws(S1.cat).has_value());
  auto S0 = slice_category(I, 0);
  EXPECT_EQ(S0.cat.num_objects(), 1);
  EXPECT_EQ(S0.cat.num_morphisms(), 1);
  EXPECT_THROW(slice_category(I, 5), InputError);
}

TEST(FinCat, SliceProjectionIsFunctorOntoMorphismsInto) {
  for (const auto& C : corpus())
    for (Ob c = 0; c < C.num_objects(); ++c) {
      auto S = slice_category(C, c);
      EXPECT_FALSE(check_category_laws(S.cat).has_value());
      EXPECT_FALSE(check_functor(S.cat, C, S.projection).has_value());
      EXPECT_EQ(S.cat.num_objects(), count_into(C, c));
      for (int k = 0; k < S.cat.num_objects(); ++k) EXPECT_EQ(C.dst(S.objects[k]), c);
      // triangles commute
      for (int a = 0; a < S.cat.num_morphisms(); ++a) {
        Mor u = S.objects[S.cat.dst(a)];
        EXPECT_EQ(C.comp(u, S.arrow_base[a]), S.objects[S.cat.src(a)]);
      }
    }
}

TEST(FinCat, AdjoinTerminal) {
  auto E = adjoin_terminal(empty_category());
  EXPECT_EQ(E.num_objects(), 1);
  EXPECT_EQ(E.num_morphisms(), 1);
  auto T = adjoin_terminal(terminal_category());
  EXPECT_EQ(T.num_objects(), 2);
  EXPECT_EQ(T.num_morphisms(), 3);
  auto I = adjoin_terminal(interval_category());
  EXPECT_EQ(I.num_objects(), 3);
  EXPECT_EQ(I.num_morphisms(), 6);
  for (const auto& C : corpus()) {
    auto D = adjoin_terminal(C);
    EXPECT_FALSE(check_category_laws(D).has_value());
    EXPECT_EQ(D.num_morphisms(), C.num_morphisms() + C.num_objects() + 1);
    Ob top = D.num_objects() - 1;
    for (Ob x = 0; x < D.num_objects(); ++x) {
      int to_top = 0;
      for (Mor m : D.out_of[x]) to_top += D.dst(m) == top;
      EXPECT_EQ(to_top, 1);
    }
  }
}

TEST(FinCat, AdjoinTerminalAvoidsNameClash) {
  auto C = validate_category({{"top"}, {}, {}});
  auto D = adjoin_terminal(C);
  EXPECT_EQ(D.object_names.back(), "top'");
}

TEST(FinCat, RandomPreordersSatisfyLaws) {
  // Property: any random preorder on up to 5 points presented as a category is lawful.
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    int n = 1 + static_cast<int>(rng() % 5);
    std::vector<std::vector<char>> le(n, std::vector<char>(n, 0));
    for (int i = 0; i < n; ++i) le[i][i] = 1;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) le[i][j] = (rng() % 3 == 0);
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          if (le[i][k] && le[k][j]) le[i][j] = 1;
    RawCategory raw;
    for (int i = 0; i < n; ++i) raw.objects.push_back("p" + std::to_string(i));
    auto name = [](int i, int j) { return "m" + std::to_string(i) + "_" + std::to_string(j); };
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (i != j && le[i][j]) raw.morphisms.push_back({name(i, j), raw.objects[i], raw.objects[j]});
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          if (i != j && j != k && le[i][j] && le[j][k] && i != k)
            raw.compose.push_back({name(j, k), name(i, j), name(i, k)});
    FiniteCategory C;
    ASSERT_NO_THROW(C = validate_category(raw));
    for (Ob c = 0; c < C.num_objects(); ++c)
      EXPECT_FALSE(check_functor(slice_category(C, c).cat, C, slice_category(C, c).projection).has_value());
  }
}
