#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <set>

#include "toposforge/canonical.hpp"

using namespace tf;

namespace {

std::vector<FiniteCategory> corpus() {
  return {terminal_category(), interval_category(), parallel_pair(), span_category(), commuting_square()};
}

// X with every carrier shuffled.
Presheaf relabelled(const FiniteCategory& C, const Presheaf& X, std::mt19937_64& rng) {
  std::vector<std::vector<int>> p(C.num_objects());
  for (Ob c = 0; c < C.num_objects(); ++c) {
    p[c].resize(X.size[c]);
    std::iota(p[c].begin(), p[c].end(), 0);
    std::shuffle(p[c].begin(), p[c].end(), rng);
  }
  Presheaf Y = X;
  for (Mor u = 0; u < C.num_morphisms(); ++u)
    for (int x = 0; x < X.size[C.dst(u)]; ++x) Y.act[u][p[C.dst(u)][x]] = p[C.src(u)][X.act[u][x]];
  return Y;
}

// Brute force: some family of bijections is natural.
bool iso_by_search(const FiniteCategory& C, const Presheaf& X, const Presheaf& Y) {
  if (X.size != Y.size) return false;
  bool found = false;
  for_each_map(C, X, Y, [&](const PshMap& a) {
    found = is_iso(a, Y);
    return !found;
  });
  return found;
}

}  // namespace

TEST(Canonical, InvariantUnderRelabelling) {
  std::mt19937_64 rng(71);
  for (const auto& C : corpus())
    for (int t = 0; t < 20; ++t) {
      auto X = random_presheaf(C, 3, rng);
      auto Y = relabelled(C, X, rng);
      ASSERT_FALSE(check_presheaf(C, Y).has_value());
      EXPECT_EQ(canonical_form(C, X).encoding, canonical_form(C, Y).encoding);
    }
}

TEST(Canonical, ClassesMatchBruteForce) {
  for (const auto& C : {interval_category(), parallel_pair(), span_category()}) {
    auto all = enumerate_presheaves(C, 2);
    std::vector<Presheaf> reps;
    for (const auto& X : all) {
      bool seen = false;
      for (const auto& R : reps)
        if (iso_by_search(C, X, R)) {
          seen = true;
          break;
        }
      if (!seen) reps.push_back(X);
    }
    std::set<std::vector<int>> forms;
    for (const auto& X : all) forms.insert(canonical_form(C, X).encoding);
    EXPECT_EQ(forms.size(), reps.size());
  }
}

TEST(Canonical, RelabelIsAnIsomorphism) {
  std::mt19937_64 rng(72);
  auto C = commuting_square();
  for (int t = 0; t < 10; ++t) {
    auto X = random_presheaf(C, 3, rng);
    auto F = canonical_form(C, X);
    Presheaf Y = X;
    for (Mor u = 0; u < C.num_morphisms(); ++u)
      for (int x = 0; x < X.size[C.dst(u)]; ++x) Y.act[u][F.relabel[C.dst(u)][x]] = F.relabel[C.src(u)][X.act[u][x]];
    ASSERT_FALSE(check_presheaf(C, Y).has_value());
    PshMap r{F.relabel};
    EXPECT_FALSE(check_map(C, X, Y, r).has_value());
    EXPECT_TRUE(is_iso(r, Y));
    EXPECT_EQ(canonical_form(C, Y).encoding, F.encoding);
  }
}

TEST(Canonical, ArrowCategoryRoundTrip) {
  std::mt19937_64 rng(73);
  for (const auto& C : corpus()) {
    auto A = arrow_category(C);
    EXPECT_FALSE(check_category_laws(A.cat).has_value());
    for (int t = 0; t < 5; ++t) {
      auto f = random_family(C, random_presheaf(C, 2, rng), 3, rng);
      auto P = family_as_presheaf(A, C, f);
      EXPECT_FALSE(check_presheaf(A.cat, P).has_value());
      EXPECT_EQ(presheaf_as_family(A, C, P), f);
      auto k = family_as_presheaf(A, C, f);
      EXPECT_TRUE(families_isomorphic(C, f, presheaf_as_family(A, C, relabelled(A.cat, k, rng))));
    }
  }
}

TEST(Canonical, DistinguishesFamiliesWithEqualTotals) {
  auto I = interval_category();
  auto Y = yoneda(I, 1);
  Presheaf two = constant_presheaf(I, 2);
  // two copies of y(1) over y(1) versus the identity on y(1) + y(1)
  Family f{coproduct(I, {Y, Y}).apex, Y, PshMap{{{0, 0}, {0, 0}}}};
  ASSERT_FALSE(check_family(I, f).has_value());
  Family g{f.total, f.total, identity_map(f.total)};
  EXPECT_FALSE(families_isomorphic(I, f, g));
  EXPECT_TRUE(families_isomorphic(I, f, f));
  EXPECT_FALSE(isomorphic(I, Y, two));
}
