#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "toposforge/sheaf_universe.hpp"

namespace tf {

// Presheaves on the cone C⊤: a presheaf on C together with a set over its limit.
struct GluingContext {
  FiniteCategory C;
  FiniteCategory cone;
  Ob top = 0;
  Presheaf J;  // 1 on C, empty at top
};

// Checks the gluing laws on a seeded sample and throws LawViolation on failure.
GluingContext build_gluing(const FiniteCategory& C);

// Restriction to C.
Presheaf j_pull(const GluingContext& g, const Presheaf& E);
PshMap j_pull(const GluingContext& g, const PshMap& h);
Family j_pull(const GluingContext& g, const Family& f);

// Extension by the empty set at top.
Presheaf j_shriek(const GluingContext& g, const Presheaf& X);
PshMap j_shriek(const GluingContext& g, const PshMap& h);

// Top gets the cones 1 -> X, in enumeration order.
std::vector<std::vector<int>> cones_of(const FiniteCategory& C, const Presheaf& X);
Presheaf j_push(const GluingContext& g, const Presheaf& X);
PshMap j_push(const GluingContext& g, const Presheaf& X, const Presheaf& Y, const PshMap& h);
Family j_push(const GluingContext& g, const Family& f);

PshMap open_unit(const GluingContext& g, const Presheaf& E);    // E -> j_*j^*E
PshMap open_counit(const GluingContext& g, const Presheaf& E);  // j_!j^*E -> E

// The join E ⋆ J as a pushout of E <- j_!j^*E -> J, with its unit leg.
struct ClosedPart {
  Cone join;
  Presheaf value;  // i^*E, which is J-connected
  PshMap unit;     // E -> i_*i^*E
};
ClosedPart i_pull(const GluingContext& g, const Presheaf& E);
PshMap i_pull(const GluingContext& g, const Presheaf& E, const Presheaf& F, const PshMap& h);
bool is_connected(const GluingContext& g, const Presheaf& X);
// Throws InputError unless X is J-connected.
Presheaf i_push(const GluingContext& g, const Presheaf& X);

struct Fracture {
  Square square;  // E, i_*i^*E over j_*j^*E, i_*i^*j_*j^*E
  CartesianReport report;
};
Fracture recollement_fracture(const GluingContext& g, const Presheaf& E);

struct GluingLawReport {
  std::size_t checks = 0;
  std::vector<std::string> failures;
};
GluingLawReport check_gluing_laws(const GluingContext& g, int samples, int max_size, std::uint64_t seed);

// ---------------------------------------------------------------------------
// the glued universe

struct GluedUniverse {
  GluingContext ctx;
  int N = 1, M = 1;
  HsUniverse T, S;
  MaterializedUniverse mt, ms;
  PshMap q, q_el;      // π_T -> j^*π_S, cartesian
  Family pi_U;         // E_U -> U_U
  PshMap qbar, qbar_el;  // π_U -> π_S, cartesian
  std::vector<std::vector<int>> cones;           // cones of U_T
  std::vector<std::pair<int, int>> top_codes;    // U_U(top): (code of S, cone index)
  std::vector<std::pair<int, int>> top_elements; // E_U(top): (element of U_U(top), element of El_S)
};

// Throws BoundOverflow with the least M classifying j_*π_T when M is too small.
GluedUniverse glued_universe(const GluingContext& g, int N, int M);
std::optional<std::string> check_glued_universe(const GluedUniverse& G);

// A cartesian map into π_T or π_U.
struct CartesianMap {
  PshMap base, total;
  bool operator==(const CartesianMap&) const = default;
};

// The unique extension of x0 lying over it: j^*(x) = x0 bitwise.
CartesianMap realign_at_syntax(const GluedUniverse& G, const Family& f, const CartesianMap& x0);
std::optional<std::string> check_glued_solution(const GluedUniverse& G, const Family& f, const CartesianMap& x0,
                                                const CartesianMap& x);

// Empty when the canonical classifier of f happens to restrict to q∘x0,
// otherwise a description of the first disagreement.
std::string naive_glued_mismatch(const GluedUniverse& G, const Family& f, const CartesianMap& x0);

struct GluedProblem {
  Family f;
  CartesianMap x0;
  bool canonical = true;  // x0 is the canonical classifier of j^*f
};
// Family over a random base with carriers <= max_size and fibers < N, and x0
// transported along a random fiber alignment.
GluedProblem random_glued_problem(const GluedUniverse& G, int max_size, std::mt19937_64& rng);
CartesianMap classify_in_inner(const GluedUniverse& G, const Family& jf, const std::vector<std::vector<int>>* beta);

}  // namespace tf
