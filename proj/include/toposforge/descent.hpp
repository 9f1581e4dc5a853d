#pragma once

#include <random>
#include <string>
#include <vector>

#include "toposforge/presheaf.hpp"

namespace tf {

// Outcome of a sampled property check. Instances whose hypothesis did not
// hold are counted as vacuous and are not failures.
struct PropertyReport {
  explicit PropertyReport(std::string n = {}) : name(std::move(n)) {}
  std::string name;
  int instances = 0;
  int vacuous = 0;
  int failures = 0;
  std::vector<std::string> witnesses;  // at most a few

  void fail(std::string w);
};

// A natural transformation K -> J given by a family over each node of J and
// maps of totals along each edge of J.
struct OverDiagram {
  std::vector<Family> families;
  std::vector<PshMap> edge_maps;
};

// Descent of J (with colimit L) for one transformation K -> J: if every edge
// square of K over J is cartesian, each node square into the colimit of K
// must be cartesian. Returns a witness on failure, "" on success.
std::string check_descent(const FiniteCategory& C, const Diagram& J, const Cone& L, const OverDiagram& K);

// Pulls F back to every node and checks descent, then checks that the map
// from the colimit of the pullbacks to F is cartesian.
std::string check_descent_for(const FiniteCategory& C, const Diagram& J, const Cone& L, const Family& F);

// Random diagrams of the shapes that enjoy descent.
Diagram random_coproduct_diagram(const FiniteCategory& C, int max_size, std::mt19937_64& rng);
Diagram random_mono_pushout_span(const FiniteCategory& C, int max_size, std::mt19937_64& rng);
// Directed diamond 0 -> {1, 2} -> 3 of monos, or a chain of monos.
Diagram random_directed_monos(const FiniteCategory& C, int max_size, std::mt19937_64& rng);

PropertyReport check_disjointness(const FiniteCategory& C, int instances, std::mt19937_64& rng);
PropertyReport check_adhesivity(const FiniteCategory& C, int instances, std::mt19937_64& rng);
PropertyReport check_filtered_descent(const FiniteCategory& C, int instances, std::mt19937_64& rng);
PropertyReport check_ideal_injections(const FiniteCategory& C, int instances, std::mt19937_64& rng);
PropertyReport check_colimit_preserves_monos(const FiniteCategory& C, int instances, std::mt19937_64& rng);
PropertyReport check_cover_reflects_monos(const FiniteCategory& C, int instances, std::mt19937_64& rng);
PropertyReport check_cartesian_colimits(const FiniteCategory& C, int instances, std::mt19937_64& rng);

}  // namespace tf
