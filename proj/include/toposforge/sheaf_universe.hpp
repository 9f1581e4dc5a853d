#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "toposforge/site.hpp"
#include "toposforge/universe.hpp"

namespace tf {

// TY and El of a Hofmann–Streicher universe as finite presheaves.
struct MaterializedUniverse {
  std::vector<std::vector<Code>> codes;  // codes[c][y] is element y of TY(c)
  std::vector<std::map<Code, int>> index;
  std::vector<std::vector<int>> offset;  // first El element over each code
  Presheaf ty;
  Family el;  // el_pullback over ty
};

MaterializedUniverse materialize_universe(const HsUniverse& U);
// Index of a code in codes[code.base]; throws InputError if absent.
int code_index(const MaterializedUniverse& M, const Code& code);

// A classification as maps into the materialized TY and El, and back.
std::pair<PshMap, PshMap> classifying_maps(const MaterializedUniverse& M, const Family& f, const Classification& k);
Classification classification_from_maps(const MaterializedUniverse& M, const Family& f, const PshMap& base,
                                        const PshMap& total);

// Streicher's universe: the sheafified generic family.
struct SheafUniverse {
  FiniteCategory C;
  Topology J;
  int N = 1;
  HsUniverse hs;
  MaterializedUniverse plain;
  PshMap ty_unit;  // TY -> i*TY
  PshMap el_unit;  // EL -> i*EL
  Family el;       // i*El
};

SheafUniverse sheaf_universe(const FiniteCategory& C, const Topology& J, int N);

// Cartesian map from a sheaf family into i*El.
struct SheafClassification {
  PshMap base;     // f.base -> i*TY
  PshMap total;    // f.total -> i*EL
  PshMap witness;  // f.total -> pullback of i*El along base, an isomorphism
};

// Throws InputError if f is not a map of sheaves and BoundOverflow if a
// fiber reaches the bound.
SheafClassification classify_sheaf_family(const SheafUniverse& U, const Family& f);
std::optional<std::string> check_sheaf_classification(const SheafUniverse& U, const Family& f,
                                                      const SheafClassification& k);

// Visits the isomorphisms f.total -> g.total over their common base that
// agree with `fixed` where it is not -1.
std::size_t for_each_iso_over(const FiniteCategory& C, const Family& f, const Family& g,
                              const std::function<bool(const PshMap&)>& visit, const PshMap* fixed = nullptr);

// Map out of a colimit determined by maps out of its nodes; throws
// LawViolation if they disagree or leave an element unreached.
PshMap colimit_map(const Cone& L, const std::vector<PshMap>& from_nodes);

// Families over B with fibers < N and sheaf totals, one per isomorphism class over B.
std::vector<Family> small_families_over(const FiniteCategory& C, const Topology& J, const Presheaf& B, int N);

// Sheaves with every carrier of size <= max_size.
std::vector<Presheaf> enumerate_sheaves(const FiniteCategory& C, const Topology& J, int max_size);

// ---------------------------------------------------------------------------
// generating monomorphisms

struct GeneratingMono {
  Family mono;  // total A >-> base B
  Ob representable = 0;
  int congruence = 0;
  int subobject = 0;
};

// Sheafified inclusions A₀ >-> y(c)/R, deduplicated up to isomorphism of
// arrows. Throws CapExceeded beyond `limit` candidates.
std::vector<GeneratingMono> generating_monos(const FiniteCategory& C, const Topology& J, std::size_t limit = 100000);

// ---------------------------------------------------------------------------
// U8 against the plain sheafified universe

struct U8SearchConfig {
  int max_size = 1;             // carriers of the bases searched
  std::size_t max_problems = 2000;
};

struct U8Failure {
  std::string witness;
};

struct U8SearchResult {
  std::size_t problems = 0;
  std::size_t extension_candidates = 0;
  bool truncated = false;
  std::vector<U8Failure> failures;
};

// Enumerates sheaf families over small sheaves, closed subsheaves and every
// cartesian partial map into i*El, then searches for a strict extension.
U8SearchResult u8_search(const SheafUniverse& U, const U8SearchConfig& cfg);

}  // namespace tf
