#pragma once

#include <optional>
#include <random>
#include <string>
#include <vector>

#include "toposforge/descent.hpp"
#include "toposforge/presheaf.hpp"

namespace tf {

// ---------------------------------------------------------------------------
// finite sets of size < N; the code k stands for {0..k-1}

struct SetRealignment {
  std::vector<int> code;      // per element of B
  std::vector<int> position;  // per element of Q, its place in code[f(q)]
};

// f : Q -> B as a function into {0..nB-1}, m : A >-> B injective. The partial
// classifier gives a code per element of A and a position for every q over
// the image of m (-1 elsewhere). Off the image, code = fiber size and
// positions follow the order of Q.
SetRealignment realign_set(int N, const std::vector<int>& f, int nB, const std::vector<int>& m,
                           const std::vector<int>& partial_code, const std::vector<int>& partial_position);

// ---------------------------------------------------------------------------
// Hofmann–Streicher universe

// A presheaf on C/base whose carriers have size < N.
struct Code {
  Ob base = 0;
  Presheaf p;
  bool operator==(const Code&) const = default;
};
bool operator<(const Code& a, const Code& b);

struct HsUniverse {
  FiniteCategory C;
  int N = 1;
  std::vector<Slice> slices;

  std::optional<std::string> check_code(const Code& code) const;
  // Precomposition with C/u : C/c' -> C/c.
  Code restrict(const Code& code, Mor u) const;
  int el_size(const Code& code) const;
  // El(u) on the element e of the identity carrier.
  int el_restrict(const Code& code, Mor u, int e) const;
  Code constant_code(Ob c, int k) const;
  // Every code over c; throws CapExceeded past the size cap.
  std::vector<Code> materialize(Ob c) const;
};

HsUniverse hs_universe(const FiniteCategory& C, int N);

// Size of the carrier at the identity slice object.
int el_fiber(const HsUniverse& U, const Code& code);

// A cartesian map from a family into El: a code per base element and, per
// total element, its position in the identity carrier of that code.
struct Classification {
  std::vector<std::vector<Code>> code;
  std::vector<std::vector<int>> elem;
  bool operator==(const Classification&) const = default;
};

// Complete cartesianness check without materializing TY or EL.
std::optional<std::string> check_classification(const HsUniverse& U, const Family& f, const Classification& k);

// Classification transported along beta, a bijection of every fiber onto an
// initial segment. beta need not be natural.
Classification classify_aligned(const HsUniverse& U, const Family& f, const std::vector<std::vector<int>>& beta);
// beta = positions in the carrier order.
Classification classify_family(const HsUniverse& U, const Family& f);

// Pullback of El along codes on Y; total elements (y, e) in lexicographic order.
Family el_pullback(const HsUniverse& U, const Presheaf& Y, const std::vector<std::vector<Code>>& codes);
// x |-> (f(x), elem(x)), an isomorphism over the base when k is cartesian.
PshMap classification_witness(const HsUniverse& U, const Family& f, const Classification& k);

struct RealignmentProblem {
  Family f;
  Presheaf A;
  PshMap m;                 // A >-> f.base
  Classification partial;   // of the pullback of f along m, as built by pull_back
};

std::optional<std::string> check_problem(const HsUniverse& U, const RealignmentProblem& P);
// Restriction of a classification of f along m, in the layout of RealignmentProblem::partial.
Classification restrict_classification(const FiniteCategory& C, const Family& f, const Presheaf& A, const PshMap& m,
                                       const Classification& k);
Classification realign_presheaf(const HsUniverse& U, const RealignmentProblem& P);
// Empty string when the boundary agrees bitwise.
std::string boundary_mismatch(const HsUniverse& U, const RealignmentProblem& P, const Classification& k);

// Random problem over a base with carriers <= max_size whose partial
// classifier is transported along a random fiber alignment.
RealignmentProblem random_problem(const HsUniverse& U, int max_size, std::mt19937_64& rng);

// ---------------------------------------------------------------------------
// Σ and Π codes

// A code a over c and, for each slice object k and element e of a(k), a code
// b[k][e] over the domain of k, natural along slice arrows.
struct CodePair {
  Code a;
  std::vector<std::vector<Code>> b;
  bool operator==(const CodePair&) const = default;
};
bool operator<(const CodePair& x, const CodePair& y);

std::optional<std::string> check_code_pair(const HsUniverse& U, const CodePair& P);
CodePair restrict_pair(const HsUniverse& U, const CodePair& P, Mor u);

// Throw BoundOverflow with the least sufficient bound.
Code sigma_code(const HsUniverse& U, const CodePair& P);
Code pi_code(const HsUniverse& U, const CodePair& P);

// Sections of pi_code(P) at the identity, lexicographic in the index order.
std::vector<std::vector<int>> pi_sections(const HsUniverse& U, const CodePair& P);

// Codes over a context Γ: a on Γ, b on the comprehension el_pullback(Γ, a).
CodePair pair_at(const HsUniverse& U, const Presheaf& G, const std::vector<std::vector<Code>>& a,
                 const std::vector<std::vector<Code>>& b, Ob c, int g);
std::vector<std::vector<Code>> code_sigma(const HsUniverse& U, const Presheaf& G,
                                          const std::vector<std::vector<Code>>& a,
                                          const std::vector<std::vector<Code>>& b);
std::vector<std::vector<Code>> code_pi(const HsUniverse& U, const Presheaf& G, const std::vector<std::vector<Code>>& a,
                                       const std::vector<std::vector<Code>>& b);

// ---------------------------------------------------------------------------
// cumulative hierarchy

// Level-N codes are level-M codes verbatim. Throws InputError unless M > N
// over the same category.
Code hierarchy_include(const HsUniverse& small, const HsUniverse& large, const Code& code);

std::vector<CodePair> enumerate_code_pairs(const HsUniverse& U, Ob c);
std::size_t count_code_pairs(const HsUniverse& U, Ob c);
bool pair_fits(const CodePair& P, int N);

// How a Π former orders the sections in each fiber.
enum class SectionOrder { Lexicographic, Reversed };

// The Π code induced by ordering sections as given.
Code ordered_pi(const HsUniverse& U, const CodePair& P, SectionOrder order);
// The Π former at the larger level realigned so that it agrees with the
// lexicographic former of the smaller level wherever that former is defined.
Code strictified_pi(const HsUniverse& small, const HsUniverse& large, const CodePair& P, SectionOrder order);

// The generic Π family over the presheaf of formation data whose Π code
// lies in U; elements of data(c) are `pairs[c]`. Restrictions of such data
// stay inside since their Π fibers are among the original ones.
struct FormationData {
  Presheaf data;
  std::vector<std::vector<CodePair>> pairs;
  Family pi_family;  // total elements (datum, section) in lexicographic order
};
FormationData formation_data(const HsUniverse& U, SectionOrder order = SectionOrder::Lexicographic);

// ---------------------------------------------------------------------------
// axioms

struct AxiomReport {
  std::string axiom;
  PropertyReport checks;
  int required_bound = 0;  // least N that would make the failing instances pass, 0 if none
  int overflow = 0;        // instances outside the class at this bound
  int exhaustive = 0;      // instances drawn from the exhaustive scan
  bool passed() const { return checks.failures == 0 && required_bound == 0; }
  bool bound_limited() const { return checks.failures == 0 && required_bound > 0; }
};

struct AxiomConfig {
  int samples = 200;
  int max_size = 2;
  bool exhaustive = false;
  std::size_t exhaustive_limit = 4000;
  std::uint64_t seed = 1;
};

AxiomReport check_axiom(const HsUniverse& U, int which, const AxiomConfig& cfg);

}  // namespace tf
