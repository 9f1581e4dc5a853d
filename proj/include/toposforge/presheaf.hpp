#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "toposforge/fincat.hpp"

namespace tf {

// Finite presheaf: carrier X(c) = {0..size[c]-1}; for u : c' -> c,
// act[u][x] = X(u)(x) in X(c').
struct Presheaf {
  std::vector<int> size;
  std::vector<std::vector<int>> act;

  bool operator==(const Presheaf&) const = default;
  std::size_t total() const;
  int at(Mor u, int x) const { return act[u][x]; }
};

// Natural transformation, at[c][x] in Y(c).
struct PshMap {
  std::vector<std::vector<int>> at;
  bool operator==(const PshMap&) const = default;
};

// A map regarded as an object of the arrow category: total -> base.
struct Family {
  Presheaf total;
  Presheaf base;
  PshMap proj;
  bool operator==(const Family&) const = default;
};

std::optional<std::string> check_presheaf(const FiniteCategory& C, const Presheaf& X);
std::optional<std::string> check_map(const FiniteCategory& C, const Presheaf& X, const Presheaf& Y,
                                     const PshMap& a);
std::optional<std::string> check_family(const FiniteCategory& C, const Family& f);

Presheaf initial_presheaf(const FiniteCategory& C);
Presheaf terminal_presheaf(const FiniteCategory& C);
Presheaf constant_presheaf(const FiniteCategory& C, int n);
Presheaf yoneda(const FiniteCategory& C, Ob c);

PshMap identity_map(const Presheaf& X);
PshMap compose(const PshMap& b, const PshMap& a);  // b∘a
PshMap to_terminal(const Presheaf& X);
PshMap from_initial(const FiniteCategory& C);

bool is_mono(const PshMap& a, const Presheaf& Y);
bool is_epi(const PshMap& a, const Presheaf& Y);
bool is_iso(const PshMap& a, const Presheaf& Y);
PshMap inverse(const PshMap& a, const Presheaf& Y);

// Elements of the fiber of f over y in base(c), ascending.
std::vector<int> fiber(const Family& f, Ob c, int y);
// Largest fiber over any element, 0 for an empty base.
int max_fiber(const Family& f);
// Position of each total element inside its fiber.
std::vector<std::vector<int>> fiber_positions(const Family& f);

// ---------------------------------------------------------------------------
// finite limits and colimits, computed pointwise

struct Diagram {
  struct Edge {
    int from;
    int to;
    PshMap map;
  };
  std::vector<Presheaf> nodes;
  std::vector<Edge> edges;
};

struct Cone {
  Presheaf apex;
  std::vector<PshMap> legs;  // one per node; apex -> node for limits, node -> apex for colimits
};

Cone finite_limit(const FiniteCategory& C, const Diagram& D);
Cone finite_colimit(const FiniteCategory& C, const Diagram& D);

Cone product(const FiniteCategory& C, const Presheaf& X, const Presheaf& Y);
// Apex elements are pairs (x, y) with a(x) = b(y) in lexicographic order.
Cone pullback(const FiniteCategory& C, const Presheaf& X, const PshMap& a, const Presheaf& Y,
              const PshMap& b, const Presheaf& Z);
Cone equalizer(const FiniteCategory& C, const Presheaf& X, const PshMap& a, const PshMap& b,
               const Presheaf& Y);
Cone coproduct(const FiniteCategory& C, const std::vector<Presheaf>& Xs);
// legs = {into Y, into Z} for Y <-a- X -b-> Z.
Cone pushout(const FiniteCategory& C, const Presheaf& X, const PshMap& a, const Presheaf& Y,
             const PshMap& b, const Presheaf& Z);
Cone coequalizer(const FiniteCategory& C, const Presheaf& X, const PshMap& a, const PshMap& b,
                 const Presheaf& Y);

// Pullback of f along g : Z -> base(f). Returns the family and the top map
// into total(f); total elements are pairs (z, x) in lexicographic order.
struct PulledBack {
  Family family;
  PshMap top;
};
PulledBack pull_back(const FiniteCategory& C, const Family& f, const Presheaf& Z, const PshMap& g);

// tl -top-> tr
//  |left     | right
// bl -bottom-> br
struct Square {
  Presheaf tl, tr, bl, br;
  PshMap top, left, right, bottom;
};

struct CartesianReport {
  bool commutes = true;
  bool cartesian = false;
  PshMap comparison;  // tl -> bl ×_br tr (pairs in lexicographic order)
  std::string witness;
};

CartesianReport is_cartesian_square(const FiniteCategory& C, const Square& sq);

// Square of a map of families (top on totals, bottom on bases).
Square family_square(const Family& src, const Family& dst, const PshMap& top, const PshMap& bottom);

// ---------------------------------------------------------------------------
// sieves, subobject classifier, partial maps, dependent products

using SieveMask = std::uint64_t;  // bit m set iff morphism m is in the sieve

bool is_sieve(const FiniteCategory& C, Ob c, SieveMask s);
SieveMask maximal_sieve(const FiniteCategory& C, Ob c);
SieveMask pullback_sieve(const FiniteCategory& C, SieveMask s, Mor f);
std::vector<SieveMask> sieves_on(const FiniteCategory& C, Ob c);
// Members of s with the identity first, then ascending.
std::vector<Mor> sieve_members(const FiniteCategory& C, Ob c, SieveMask s);
std::string sieve_to_string(const FiniteCategory& C, SieveMask s);

struct Omega {
  Presheaf omega;
  std::vector<std::vector<SieveMask>> sieves;  // sieves[c][k] is element k of Ω(c)
  PshMap truth;                                // 1 -> Ω, the maximal sieves
  int index(Ob c, SieveMask s) const;
};

Omega subobject_classifier(const FiniteCategory& C);
// Characteristic map of a mono m : A -> X. Throws LawViolation on a non-mono.
PshMap characteristic(const FiniteCategory& C, const Omega& O, const Presheaf& A, const PshMap& m,
                      const Presheaf& X);

// Matching families for s in X, indexed by sieve_members(s), lexicographic.
std::vector<std::vector<int>> matching_families(const FiniteCategory& C, const Presheaf& X, Ob c,
                                                SieveMask s);

struct PartialMapClassifier {
  Presheaf plus;
  PshMap unit;
  // elements[c][k] = (sieve, family indexed by sieve_members)
  std::vector<std::vector<std::pair<SieveMask, std::vector<int>>>> elements;
};

PartialMapClassifier partial_map_classifier(const FiniteCategory& C, const Presheaf& X);

// f_*g for f : A -> I and g : B -> A.
struct DependentProduct {
  Family family;  // over I
  // sections[c][k]: the base element and the chosen B-element for each index
  struct Index {
    Mor u;
    int a;
  };
  std::vector<std::vector<std::vector<Index>>> indices;  // indices[c][i]
  std::vector<std::vector<std::vector<int>>> sections;   // sections[c][k]
};

DependentProduct dependent_product(const FiniteCategory& C, const Family& f, const Family& g);

struct ImageFactorization {
  Presheaf image;
  PshMap epi;
  PshMap mono;
};

ImageFactorization image_factorization(const FiniteCategory& C, const Presheaf& X, const PshMap& a,
                                       const Presheaf& Y);

struct Subobject {
  Presheaf sub;
  PshMap incl;
  std::vector<std::vector<char>> member;  // member[c][x]
};

std::vector<Subobject> enumerate_subobjects(const FiniteCategory& C, const Presheaf& X);
Subobject subobject_from_membership(const FiniteCategory& C, const Presheaf& X,
                                    const std::vector<std::vector<char>>& member);
// Image of a mono as a subobject of its codomain.
Subobject image_subobject(const FiniteCategory& C, const Presheaf& A, const PshMap& m,
                          const Presheaf& X);

// Per object, class[c][x] = index of the class of x, classes numbered by
// first occurrence.
struct Congruence {
  std::vector<std::vector<int>> cls;
  bool operator==(const Congruence&) const = default;
};

std::vector<Congruence> enumerate_congruences(const FiniteCategory& C, const Presheaf& X);

struct Quotient {
  Presheaf quotient;
  PshMap epi;
};

Quotient quotient(const FiniteCategory& C, const Presheaf& X, const Congruence& R);

// ---------------------------------------------------------------------------
// enumeration and random generation

// Visits every natural map X -> Y extending `fixed` (entries -1 are free).
// The visitor returns false to stop. With rng set, candidate values are
// tried in random order. Returns the number of maps visited.
std::size_t for_each_map(const FiniteCategory& C, const Presheaf& X, const Presheaf& Y,
                         const std::function<bool(const PshMap&)>& visit,
                         const PshMap* fixed = nullptr, std::mt19937_64* rng = nullptr);

std::vector<PshMap> enumerate_maps(const FiniteCategory& C, const Presheaf& X, const Presheaf& Y);
std::optional<PshMap> random_map(const FiniteCategory& C, const Presheaf& X, const Presheaf& Y,
                                 std::mt19937_64& rng);

// Visits every presheaf with the given carrier sizes.
std::size_t for_each_presheaf(const FiniteCategory& C, const std::vector<int>& sizes,
                              const std::function<bool(const Presheaf&)>& visit,
                              std::mt19937_64* rng = nullptr);

// All presheaves with every carrier of size <= max_size, sizes in
// lexicographic order.
std::vector<Presheaf> enumerate_presheaves(const FiniteCategory& C, int max_size);

std::optional<Presheaf> random_presheaf_with_sizes(const FiniteCategory& C, const std::vector<int>& sizes,
                                                   std::mt19937_64& rng);
Presheaf random_presheaf(const FiniteCategory& C, int max_size, std::mt19937_64& rng);

// Category of elements ∫Y: object k is (c, y); morphisms (u, y) : (c', Y(u)y) -> (c, y).
// Families over Y are exactly presheaves on ∫Y.
struct Elements {
  FiniteCategory cat;
  std::vector<std::pair<Ob, int>> objects;
  std::vector<std::vector<int>> object_of;  // object_of[c][y]
};

Elements category_of_elements(const FiniteCategory& C, const Presheaf& Y);
// Total elements are ordered by (base element, index in the fiber).
Family family_from_elements(const FiniteCategory& C, const Elements& E, const Presheaf& Y,
                            const Presheaf& P);
// Inverse direction; fibers keep the order of the total carrier.
Presheaf elements_from_family(const FiniteCategory& C, const Elements& E, const Family& f);

// Random family over base whose fibers have size < bound (bound >= 1).
Family random_family(const FiniteCategory& C, const Presheaf& base, int bound, std::mt19937_64& rng);
Subobject random_subobject(const FiniteCategory& C, const Presheaf& X, std::mt19937_64& rng);

// Random fiberwise permutation: perm[c][x] is the new position of x in its
// fiber; the assignment is arbitrary, not natural.
std::vector<std::vector<int>> random_fiber_alignment(const Family& f, std::mt19937_64& rng);

}  // namespace tf
