#include <gtest/gtest.h>

#include <numeric>
#include <random>

#include "toposforge/errors.hpp"
#include "toposforge/soa.hpp"

using namespace tf;

namespace {

struct NamedSite {
  std::string name;
  FiniteCategory C;
  Topology J;
};

std::vector<NamedSite> sites() {
  auto T = terminal_category(), I = interval_category(), P = parallel_pair();
  return {{"terminal", T, trivial_topology(T)},
          {"interval", I, trivial_topology(I)},
          {"dense interval", I, topology_from_generators(I, {{"1", {{"u"}}}})},
          {"parallel pair", P, trivial_topology(P)},
          {"joint pair", P, topology_from_generators(P, {{"1", {{"s", "t"}}}})}};
}

SoaState build(const NamedSite& s, int N, int stages) {
  SoaState S = soa_initial(s.C, s.J, N);
  for (int k = 0; k < stages; ++k) S = soa_extend_stage(S);
  return S;
}

// The problem with the family's total carriers permuted.
StageProblem relabelled(const FiniteCategory& C, const StageProblem& P, std::mt19937_64& rng) {
  std::vector<std::vector<int>> perm(C.num_objects());
  for (Ob c = 0; c < C.num_objects(); ++c) {
    perm[c].resize(P.f.total.size[c]);
    std::iota(perm[c].begin(), perm[c].end(), 0);
    std::shuffle(perm[c].begin(), perm[c].end(), rng);
  }
  StageProblem Q = P;
  for (Mor u = 0; u < C.num_morphisms(); ++u)
    for (int x = 0; x < P.f.total.size[C.dst(u)]; ++x)
      Q.f.total.act[u][perm[C.dst(u)][x]] = perm[C.src(u)][P.f.total.act[u][x]];
  for (Ob c = 0; c < C.num_objects(); ++c)
    for (int x = 0; x < P.f.total.size[c]; ++x) Q.f.proj.at[c][perm[c][x]] = P.f.proj.at[c][x];
  PulledBack old_pb = pull_back(C, P.f, P.A, P.m), new_pb = pull_back(C, Q.f, Q.A, Q.m);
  for (Ob c = 0; c < C.num_objects(); ++c)
    for (int w = 0; w < old_pb.family.total.size[c]; ++w) {
      int z = old_pb.family.proj.at[c][w], x = perm[c][old_pb.top.at[c][w]];
      for (int v = 0; v < new_pb.family.total.size[c]; ++v)
        if (new_pb.family.proj.at[c][v] == z && new_pb.top.at[c][v] == x) Q.phi.at[c][v] = P.phi.at[c][w];
    }
  return Q;
}

}  // namespace

TEST(Soa, InitialStageIsEmpty) {
  for (const auto& s : sites()) {
    SoaState S = soa_initial(s.C, s.J, 2);
    EXPECT_EQ(S.stage(), 0);
    EXPECT_EQ(S.stages[0].pi.base.total(), 0u);
    EXPECT_EQ(S.stages[0].pi.total.total(), 0u);
    EXPECT_EQ(S.families.size(), S.monos.size());
  }
}

TEST(Soa, FirstStageIsTheSumOverEmptyDomains) {
  // U^1 is the coproduct of the codomains of data with empty domain, one per family, sheafified.
  for (const auto& s : sites()) {
    SoaState S = build(s, 2, 1);
    std::vector<int> base(s.C.num_objects(), 0), total(s.C.num_objects(), 0);
    for (std::size_t i = 0; i < S.monos.size(); ++i) {
      if (S.monos[i].mono.total.total() != 0) continue;
      for (const Family& f : S.families[i])
        for (Ob c = 0; c < s.C.num_objects(); ++c) {
          base[c] += f.base.size[c];
          total[c] += f.total.size[c];
        }
    }
    // sheafification fixes the covered object from object 0
    if (s.name == "dense interval") base[1] = base[0], total[1] = total[0];
    if (s.name == "joint pair") base[1] = base[0] * base[0], total[1] = total[0] * total[0];
    EXPECT_EQ(S.stages[1].pi.base.size, base) << s.name;
    EXPECT_EQ(S.stages[1].pi.total.size, total) << s.name;
  }
}

TEST(Soa, InitialStageCountsOnTheInterval) {
  SoaState S = build(sites()[1], 2, 1);
  EXPECT_EQ(S.monos.size(), 5u);
  EXPECT_EQ(S.stages[0].ledger.size(), 5u);
  EXPECT_EQ(S.stages[1].pi.base.size, (std::vector<int>{5, 3}));
  EXPECT_EQ(S.stages[1].pi.total.size, (std::vector<int>{3, 1}));
}

TEST(Soa, StatesAreValid) {
  for (const auto& s : sites()) {
    SoaState S = build(s, 2, 2);
    auto e = check_soa_state(S);
    EXPECT_FALSE(e.has_value()) << s.name << ": " << *e;
    for (const auto& st : S.stages) EXPECT_FALSE(st.truncated) << s.name;
  }
  SoaState S = build(sites()[2], 3, 3);
  EXPECT_FALSE(check_soa_state(S).has_value());
}

TEST(Soa, CorruptedLinkIsReported) {
  SoaState S = build(sites()[1], 2, 2);
  S.stages[2].link_base.at[1][0] = S.stages[2].link_base.at[1][1];
  EXPECT_TRUE(check_soa_state(S).has_value());
}

TEST(Soa, EveryDatumSolvesAtItsOwnStage) {
  for (const auto& s : sites()) {
    SoaState S = build(s, 2, 2);
    for (int j = 0; j < S.stage(); ++j)
      for (int k = 0; k < static_cast<int>(S.stages[j].ledger.size()); ++k) {
        StageProblem P = datum_problem(S, j, k);
        ASSERT_FALSE(check_stage_problem(S, P).has_value());
        StageSolution sol = soa_solve(S, P);
        ASSERT_TRUE(sol.solved) << s.name << ": " << sol.reason;
        EXPECT_EQ(sol.via_stage, j);
        auto e = check_stage_solution(S, P, sol);
        EXPECT_FALSE(e.has_value()) << s.name << ": " << *e;
      }
  }
}

TEST(Soa, RelabelledAndLinkedProblemsSolve) {
  std::mt19937_64 rng(5);
  for (const auto& s : sites()) {
    SoaState S = build(s, 2, 2);
    for (int k = 0; k < static_cast<int>(S.stages[0].ledger.size()); ++k) {
      StageProblem P = relabelled(s.C, datum_problem(S, 0, k), rng);
      ASSERT_FALSE(check_stage_problem(S, P).has_value());
      auto sol = soa_solve(S, P);
      ASSERT_TRUE(sol.solved) << sol.reason;
      EXPECT_FALSE(check_stage_solution(S, P, sol).has_value());
      // the same datum posed one stage later resolves to stage 0
      auto [lb, lt] = stage_link(S, 0, 1);
      StageProblem L = P;
      L.stage = 1;
      L.a = compose(lb, P.a);
      L.phi = compose(lt, P.phi);
      auto later = soa_solve(S, L);
      ASSERT_TRUE(later.solved) << later.reason;
      EXPECT_EQ(later.via_stage, 0);
      EXPECT_FALSE(check_stage_solution(S, L, later).has_value());
    }
  }
}

TEST(Soa, TamperedSolutionIsRejected) {
  SoaState S = build(sites()[1], 2, 2);
  for (int k = 0; k < static_cast<int>(S.stages[1].ledger.size()); ++k) {
    StageProblem P = datum_problem(S, 1, k);
    auto sol = soa_solve(S, P);
    ASSERT_TRUE(sol.solved);
    for (Ob c = 0; c < 2; ++c) {
      if (P.f.base.size[c] == 0) continue;
      auto bad = sol;
      bad.chi.at[c][0] = (bad.chi.at[c][0] + 1) % S.stages[2].pi.base.size[c];
      EXPECT_TRUE(check_stage_solution(S, P, bad).has_value());
    }
  }
}

TEST(Soa, NonGeneratingMonoIsUnresolved) {
  SoaState S = build(sites()[1], 2, 1);
  StageProblem P = datum_problem(S, 0, 0);
  // the empty subobject of a non-representable presheaf
  Presheaf two = constant_presheaf(S.C, 2);
  StageProblem Q{Family{two, two, identity_map(two)}, initial_presheaf(S.C), from_initial(S.C), 0, P.a, P.phi};
  auto sol = soa_solve(S, Q);
  EXPECT_FALSE(sol.solved);
  EXPECT_NE(sol.reason.find("generating"), std::string::npos);
}

TEST(Soa, SaturationUnderPushoutCompositionAndRetract) {
  for (const auto& s : sites()) {
    SoaState S = build(s, 2, 2);
    for (auto mode : {SaturationMode::Pushout, SaturationMode::Composition, SaturationMode::Retract}) {
      auto r = saturation_check(S, mode, 50, 99);
      EXPECT_EQ(r.instances, 50) << s.name << " " << to_string(mode);
      EXPECT_EQ(r.solved, r.instances) << s.name << " " << to_string(mode);
      EXPECT_EQ(r.failures, 0) << s.name << " " << to_string(mode) << ": "
                               << (r.witnesses.empty() ? "" : r.witnesses[0]);
    }
  }
}

TEST(Soa, ConstructionIsDeterministic) {
  auto s = sites()[3];
  SoaState A = build(s, 2, 2), B = build(s, 2, 2);
  for (int j = 0; j <= A.stage(); ++j) {
    EXPECT_EQ(A.stages[j].pi, B.stages[j].pi);
    ASSERT_EQ(A.stages[j].ledger.size(), B.stages[j].ledger.size());
    for (std::size_t k = 0; k < A.stages[j].ledger.size(); ++k) EXPECT_EQ(A.stages[j].ledger[k].phi, B.stages[j].ledger[k].phi);
  }
  auto r1 = saturation_check(A, SaturationMode::Retract, 20, 3), r2 = saturation_check(B, SaturationMode::Retract, 20, 3);
  EXPECT_EQ(r1.solved, r2.solved);
}

TEST(Soa, LedgerCapTruncates) {
  SoaCaps caps;
  caps.max_data = 3;
  SoaState S = soa_initial(interval_category(), trivial_topology(interval_category()), 2, caps);
  S = soa_extend_stage(S, caps);
  EXPECT_TRUE(S.stages[0].truncated);
  EXPECT_EQ(S.stages[0].ledger.size(), 3u);
}
