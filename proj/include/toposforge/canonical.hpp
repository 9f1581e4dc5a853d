#pragma once

#include <vector>

#include "toposforge/presheaf.hpp"

namespace tf {

// Least encoding of X over the carrier permutations that respect an
// iso-invariant colouring. Equal encodings iff isomorphic presheaves.
struct CanonicalForm {
  std::vector<int> encoding;
  std::vector<std::vector<int>> relabel;  // relabel[c][x] = position of x in the canonical copy
};

CanonicalForm canonical_form(const FiniteCategory& C, const Presheaf& X);
bool isomorphic(const FiniteCategory& C, const Presheaf& X, const Presheaf& Y);

// C × (0 -> 1); a family f : X -> Y is a presheaf with X at (c,1) and Y at (c,0).
struct ArrowCategory {
  FiniteCategory cat;
  std::vector<Ob> total_object;  // (c,1)
  std::vector<Ob> base_object;   // (c,0)
  std::vector<Mor> on_total;     // (u, id_1)
  std::vector<Mor> on_base;      // (u, id_0)
  std::vector<Mor> proj;         // (id_c, 0 -> 1)
};

ArrowCategory arrow_category(const FiniteCategory& C);
Presheaf family_as_presheaf(const ArrowCategory& A, const FiniteCategory& C, const Family& f);
Family presheaf_as_family(const ArrowCategory& A, const FiniteCategory& C, const Presheaf& P);

// Isomorphic as objects of the arrow category.
bool families_isomorphic(const FiniteCategory& C, const Family& f, const Family& g);
// Isomorphic over a shared base.
bool isomorphic_over_base(const FiniteCategory& C, const Family& f, const Family& g);

}  // namespace tf
