#pragma once

#include <optional>
#include <random>
#include <string>
#include <vector>

#include "toposforge/universe.hpp"

namespace tf {

using CodeMap = std::vector<std::vector<Code>>;  // a map from a presheaf into TY

// B over Γ, a support φ : Γ -> Ω and, on Γ_φ, a code A with El(A) ≅ El(B)|φ.
struct PartialIsomorph {
  Presheaf context;
  CodeMap B;
  PshMap support;
  Subobject restricted;  // Γ_φ, read off from the support
  CodeMap A;             // over restricted.sub
  PshMap iso;            // el_pullback(A) -> el_pullback(B restricted), over Γ_φ
};

// Fills in `restricted` from the support.
PartialIsomorph make_partial_isomorph(const HsUniverse& U, const Omega& O, const Presheaf& context, const CodeMap& B,
                                      const PshMap& support, const CodeMap& A, const PshMap& iso);
std::optional<std::string> check_partial_isomorph(const HsUniverse& U, const Omega& O, const PartialIsomorph& D);
std::optional<std::string> check_code_map(const HsUniverse& U, const Presheaf& X, const CodeMap& codes);

struct RealignedType {
  CodeMap G;   // over Γ, equal to A on Γ_φ
  PshMap iso;  // el_pullback(G) -> el_pullback(B), extending the given iso
};

RealignedType realignment_structure_apply(const HsUniverse& U, const Omega& O, const PartialIsomorph& D);
std::optional<std::string> check_realigned_type(const HsUniverse& U, const PartialIsomorph& D, const RealignedType& r);

// ---------------------------------------------------------------------------
// Glue

struct GlueInput {
  Presheaf context;
  PshMap J;   // Γ -> Ω
  CodeMap O;  // over Γ_J
  CodeMap K;  // over the total of J ⇒ El(O), J-connected
};

struct GlueResult {
  Subobject support;        // Γ_J
  DependentProduct pi;      // J ⇒ El(O) over Γ
  Family sigma;             // Σ over J ⇒ El(O) of K, as a family over Γ
  CodeMap glue;             // Glue over Γ
  PshMap glue_iso;          // sigma.total -> el_pullback(glue)
  Family glue_family;       // el_pullback(glue)
};

// Throws InputError when K is not J-connected.
GlueResult glue_type(const HsUniverse& U, const Omega& O, const GlueInput& in);
// Glue equals O on Γ_J as raw codes and the iso is evaluation there.
std::optional<std::string> check_glue(const HsUniverse& U, const GlueInput& in, const GlueResult& g);
GlueInput random_glue_input(const HsUniverse& U, const Omega& O, int max_size, std::mt19937_64& rng);

// ---------------------------------------------------------------------------
// external <-> internal

PartialIsomorph to_partial_isomorph(const HsUniverse& U, const Omega& O, const RealignmentProblem& P);
RealignmentProblem to_problem(const HsUniverse& U, const PartialIsomorph& D);
// The realigned type read back as a classification of P.f.
Classification to_classification(const HsUniverse& U, const RealignmentProblem& P, const RealignedType& r);

struct RoundtripReport {
  int instances = 0;
  int agree = 0;       // both directions strict on the same boundary
  int identical = 0;   // and equal as classifications
  std::vector<std::string> failures;
};

RoundtripReport external_internal_roundtrip(const HsUniverse& U, const std::vector<RealignmentProblem>& problems);

}  // namespace tf
