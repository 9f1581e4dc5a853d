#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "toposforge/sheaf_universe.hpp"

namespace tf {

// A span f|A -> π^stage adjoined by the small object argument.
struct SoaDatum {
  int mono = 0;        // index into SoaState::monos
  int family = 0;      // index into SoaState::families[mono]
  PshMap a;            // A -> U^stage
  PshMap phi;          // total of pull_back(f, A, m) -> E^stage, least in its Aut(f)-orbit
  PshMap into_base;    // B -> U^(stage+1)
  PshMap into_total;   // f.total -> E^(stage+1)
};

struct SoaStage {
  Family pi;                      // E^n -> U^n
  PshMap link_base, link_total;   // from the previous stage, empty at stage 0
  std::vector<SoaDatum> ledger;   // data adjoined against this stage
  std::map<std::vector<int>, int> index;
  bool truncated = false;         // ledger enumeration hit the cap
};

struct SoaCaps {
  std::size_t max_data = 4000;  // per stage
  std::size_t mono_limit = 100000;
};

struct SoaState {
  FiniteCategory C;
  Topology J;
  int N = 2;
  std::vector<GeneratingMono> monos;
  std::vector<std::vector<Family>> families;      // small families over each mono's codomain
  std::vector<std::vector<std::vector<PshMap>>> automorphisms;  // of each family over its base
  std::vector<SoaStage> stages;
  int stage() const { return static_cast<int>(stages.size()) - 1; }
};

// Stage 0 is the empty family.
SoaState soa_initial(const FiniteCategory& C, const Topology& J, int N, const SoaCaps& caps = {});
SoaState soa_extend_stage(const SoaState& state, const SoaCaps& caps = {});

// Composite link from stage `from` to stage `to` (from <= to).
std::pair<PshMap, PshMap> stage_link(const SoaState& S, int from, int to);

// Links are cartesian monos and stage families are small. The fiber bound
// is N, or the sheafified bound when covers are wider than one generator.
std::optional<std::string> check_soa_state(const SoaState& S);

// A realignment problem against stage `stage`: phi maps the total of
// pull_back(f, A, m) into E^stage over a.
struct StageProblem {
  Family f;
  Presheaf A;
  PshMap m;
  int stage = 0;
  PshMap a;
  PshMap phi;
};

struct StageSolution {
  bool solved = false;
  std::string reason;
  int via_stage = -1;
  PshMap chi;  // f.base -> U^n at the last stage
  PshMap top;  // f.total -> E^n
};

// Cartesian into the last stage and bitwise equal to the linked partial map on A.
std::optional<std::string> check_stage_solution(const SoaState& S, const StageProblem& P, const StageSolution& sol);
std::optional<std::string> check_stage_problem(const SoaState& S, const StageProblem& P);

// Solves a problem along a generating mono by locating its datum in the
// ledger; a miss is reported as unresolved rather than thrown.
StageSolution soa_solve(const SoaState& S, const StageProblem& P);

// The problem whose datum is ledger entry `index` of stage `stage`.
StageProblem datum_problem(const SoaState& S, int stage, int index);

enum class SaturationMode { Pushout, Composition, Retract };

struct SaturationReport {
  SaturationMode mode = SaturationMode::Pushout;
  int instances = 0;
  int solved = 0;
  int unresolved = 0;
  int failures = 0;
  std::vector<std::string> witnesses;
};

// Builds problems along pushouts, composites and retracts of generating
// monos from ledger data and solves each by gluing solutions along the
// generating monos.
SaturationReport saturation_check(const SoaState& S, SaturationMode mode, int instances, std::uint64_t seed);

std::string to_string(SaturationMode mode);

}  // namespace tf
