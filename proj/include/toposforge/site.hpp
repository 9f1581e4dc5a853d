#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "toposforge/presheaf.hpp"

namespace tf {

struct Topology {
  std::vector<std::vector<SieveMask>> covers;  // per object, ascending
  std::vector<SieveMask> minimal;              // intersection of the covers on each object

  bool covering(Ob c, SieveMask s) const;
  bool is_trivial(const FiniteCategory& C) const;
};

struct TopologyViolation {
  std::string axiom;  // "maximal", "stability", "transitivity", "intersection"
  std::string witness;
};

// Every violated axiom with a witness; an empty result means a topology.
std::vector<TopologyViolation> topology_violations(const FiniteCategory& C,
                                                   const std::vector<std::vector<SieveMask>>& covers);

// Throws LawViolation listing every violation.
Topology validate_topology(const FiniteCategory& C, std::vector<std::vector<SieveMask>> covers);

Topology trivial_topology(const FiniteCategory& C);

// Covering sieves given by generating members per object name; each is closed
// under precomposition and maximal sieves are added before validation.
using RawCoverage = std::map<std::string, std::vector<std::vector<std::string>>>;
Topology topology_from_generators(const FiniteCategory& C, const RawCoverage& raw);

// Smallest sieve on c containing the given morphisms.
SieveMask generated_sieve(const FiniteCategory& C, Ob c, const std::vector<Mor>& gens);

struct SheafReport {
  bool sheaf = true;
  std::string witness;
};

SheafReport is_sheaf(const FiniteCategory& C, const Topology& J, const Presheaf& X);

struct Sheafified {
  Presheaf sheaf;
  PshMap unit;
};

// X⁺(c) = matching families for the minimal covering sieve of c.
Sheafified plus_construction(const FiniteCategory& C, const Topology& J, const Presheaf& X);
PshMap plus_map(const FiniteCategory& C, const Topology& J, const Presheaf& X, const Presheaf& Y,
                const PshMap& a);

Sheafified sheafify(const FiniteCategory& C, const Topology& J, const Presheaf& X);
PshMap sheafify_map(const FiniteCategory& C, const Topology& J, const Presheaf& X, const Presheaf& Y,
                    const PshMap& a);
Family sheafify_family(const FiniteCategory& C, const Topology& J, const Family& f);

// Fewest morphisms generating the minimal cover of c.
int cover_width(const FiniteCategory& C, const Topology& J, Ob c);

// Strict bound on the fibers of a sheafified family whose fibers are < N:
// (N-1)^(w*w) + 1 for the largest cover width w. Equals N when every minimal
// cover is generated by one morphism.
long long sheafified_fiber_bound(const FiniteCategory& C, const Topology& J, int N);

// The unique map X♯ -> F through which g : X -> F factors, for a sheaf F.
PshMap extend_to_sheafification(const FiniteCategory& C, const Topology& J, const Presheaf& X,
                                const Presheaf& F, const PshMap& g);

}  // namespace tf
