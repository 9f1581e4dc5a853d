#include "toposforge/soa.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include "toposforge/errors.hpp"

namespace tf {

namespace {

using PairIndex = std::vector<std::map<std::pair<int, int>, int>>;

// (base element, top element) -> pullback element.
PairIndex pair_index(const PulledBack& pb) {
  PairIndex idx(pb.family.total.size.size());
  for (std::size_t c = 0; c < idx.size(); ++c)
    for (int w = 0; w < pb.family.total.size[c]; ++w) idx[c][{pb.family.proj.at[c][w], pb.top.at[c][w]}] = w;
  return idx;
}

int lookup(const PairIndex& idx, std::size_t c, int z, int x) {
  auto it = idx[c].find({z, x});
  if (it == idx[c].end()) throw LawViolation("element missing from a pullback");
  return it->second;
}

bool trivial(const SoaState& S) { return S.J.is_trivial(S.C); }

std::vector<int> datum_key(int mono, int family, const PshMap& a, const PshMap& phi) {
  std::vector<int> k{mono, family};
  for (const PshMap* m : {&a, &phi})
    for (const auto& row : m->at) {
      k.push_back(static_cast<int>(row.size()));
      k.insert(k.end(), row.begin(), row.end());
    }
  return k;
}

// σ acting on the pullback along m: (z, x) -> (z, σ x).
PshMap along_pullback(const PulledBack& pb, const PairIndex& idx, const PshMap& sigma) {
  PshMap out;
  out.at.assign(pb.family.total.size.size(), {});
  for (std::size_t c = 0; c < out.at.size(); ++c)
    for (int w = 0; w < pb.family.total.size[c]; ++w)
      out.at[c].push_back(lookup(idx, c, pb.family.proj.at[c][w], sigma.at[c][pb.top.at[c][w]]));
  return out;
}

// g = mono∘h, or nothing if g leaves the image.
std::optional<PshMap> factor_through(const PshMap& g, const PshMap& mono) {
  PshMap out;
  out.at.assign(g.at.size(), {});
  for (std::size_t c = 0; c < g.at.size(); ++c) {
    std::map<int, int> inv;
    for (std::size_t x = 0; x < mono.at[c].size(); ++x) inv[mono.at[c][x]] = static_cast<int>(x);
    for (int v : g.at[c]) {
      auto it = inv.find(v);
      if (it == inv.end()) return std::nullopt;
      out.at[c].push_back(it->second);
    }
  }
  return out;
}

PshMap identity_on(const Presheaf& X) { return identity_map(X); }

struct Hit {
  int stage = -1, index = -1;
  PshMap sigma;
};

// Ledger entry for (mono, family, a, phi) posed against stage k, searched over stages < limit.
std::optional<Hit> find_datum(const SoaState& S, int mono, int family, int k, const PshMap& a, const PshMap& phi,
                              int limit) {
  const GeneratingMono& G = S.monos[mono];
  const Family& rep = S.families[mono][family];
  PulledBack pb = pull_back(S.C, rep, G.mono.total, G.mono.proj);
  PairIndex idx = pair_index(pb);
  for (int alpha = 0; alpha <= std::min(k, limit - 1); ++alpha) {
    auto [lb, lt] = stage_link(S, alpha, k);
    auto a0 = factor_through(a, lb);
    if (!a0) continue;
    auto phi0 = factor_through(phi, lt);
    if (!phi0) continue;
    for (const PshMap& sigma : S.automorphisms[mono][family]) {
      PshMap cand = compose(*phi0, along_pullback(pb, idx, sigma));
      auto it = S.stages[alpha].index.find(datum_key(mono, family, *a0, cand));
      if (it != S.stages[alpha].index.end()) return Hit{alpha, it->second, sigma};
    }
  }
  return std::nullopt;
}

std::vector<int> random_permutation(int n, std::mt19937_64& rng) {
  std::vector<int> p(n);
  std::iota(p.begin(), p.end(), 0);
  std::shuffle(p.begin(), p.end(), rng);
  return p;
}

// Y with carriers permuted and the isomorphism X -> Y.
std::pair<Presheaf, PshMap> permuted(const FiniteCategory& C, const Presheaf& X, std::mt19937_64& rng) {
  PshMap p;
  for (Ob c = 0; c < C.num_objects(); ++c) p.at.push_back(random_permutation(X.size[c], rng));
  Presheaf Y = X;
  for (Mor u = 0; u < C.num_morphisms(); ++u)
    for (int x = 0; x < X.size[C.dst(u)]; ++x) Y.act[u][p.at[C.dst(u)][x]] = p.at[C.src(u)][X.act[u][x]];
  return {Y, p};
}

// Family with its total relabelled; returns the isomorphism old -> new.
std::pair<Family, PshMap> relabel_total(const FiniteCategory& C, const Family& f, std::mt19937_64& rng) {
  auto [T, p] = permuted(C, f.total, rng);
  Family g{T, f.base, compose(f.proj, inverse(p, T))};
  return {g, p};
}

// The pushout Y <- X -> Z, sheafified when the topology is not trivial.
struct Glued {
  Cone pre;            // presheaf pushout
  Presheaf apex;
  PshMap unit;         // pre.apex -> apex
  PshMap into_y, into_z;
};

Glued glue(const SoaState& S, const Presheaf& X, const PshMap& a, const Presheaf& Y, const PshMap& b,
           const Presheaf& Z) {
  Glued g;
  g.pre = pushout(S.C, X, a, Y, b, Z);
  if (trivial(S)) {
    g.apex = g.pre.apex;
    g.unit = identity_on(g.apex);
  } else {
    Sheafified sh = sheafify(S.C, S.J, g.pre.apex);
    g.apex = sh.sheaf;
    g.unit = sh.unit;
  }
  g.into_y = compose(g.unit, g.pre.legs[0]);
  g.into_z = compose(g.unit, g.pre.legs[1]);
  return g;
}

// The map out of a glued object determined on the presheaf pushout.
PshMap out_of(const SoaState& S, const Glued& g, const PshMap& on_y, const PshMap& on_z, const Presheaf& target) {
  PshMap pre = colimit_map(g.pre, {on_y, on_z});
  if (trivial(S)) return pre;
  return extend_to_sheafification(S.C, S.J, g.pre.apex, target, pre);
}

}  // namespace

std::string to_string(SaturationMode mode) {
  switch (mode) {
    case SaturationMode::Pushout:
      return "pushout";
    case SaturationMode::Composition:
      return "composition";
    case SaturationMode::Retract:
      return "retract";
  }
  return "?";
}

std::pair<PshMap, PshMap> stage_link(const SoaState& S, int from, int to) {
  if (from < 0 || to > S.stage() || from > to) throw InputError("stage link out of range");
  PshMap b = identity_map(S.stages[from].pi.base), t = identity_map(S.stages[from].pi.total);
  for (int j = from + 1; j <= to; ++j) {
    b = compose(S.stages[j].link_base, b);
    t = compose(S.stages[j].link_total, t);
  }
  return {b, t};
}

SoaState soa_initial(const FiniteCategory& C, const Topology& J, int N, const SoaCaps& caps) {
  if (N < 1) throw InputError("bound must be at least 1");
  SoaState S;
  S.C = C;
  S.J = J;
  S.N = N;
  S.monos = generating_monos(C, J, caps.mono_limit);
  for (const GeneratingMono& G : S.monos) {
    S.families.push_back(small_families_over(C, J, G.mono.base, N));
    std::vector<std::vector<PshMap>> auts;
    for (const Family& f : S.families.back()) {
      std::vector<PshMap> group;
      for_each_iso_over(C, f, f, [&](const PshMap& s) {
        group.push_back(s);
        return true;
      });
      auts.push_back(std::move(group));
    }
    S.automorphisms.push_back(std::move(auts));
  }
  SoaStage s0;
  Presheaf empty = initial_presheaf(C);
  s0.pi = Family{empty, empty, from_initial(C)};
  S.stages.push_back(std::move(s0));
  return S;
}

SoaState soa_extend_stage(const SoaState& state, const SoaCaps& caps) {
  SoaState S = state;
  const FiniteCategory& C = S.C;
  const int n = S.stage();
  SoaStage& cur = S.stages[n];
  cur.ledger.clear();
  cur.index.clear();
  cur.truncated = false;

  // enumerate new data against stage n
  for (int i = 0; i < static_cast<int>(S.monos.size()) && !cur.truncated; ++i) {
    const Family& G = S.monos[i].mono;
    for (int r = 0; r < static_cast<int>(S.families[i].size()) && !cur.truncated; ++r) {
      const Family& rep = S.families[i][r];
      PulledBack pb = pull_back(C, rep, G.total, G.proj);
      PairIndex idx = pair_index(pb);
      std::vector<PshMap> on_pb;
      for (const PshMap& s : S.automorphisms[i][r]) on_pb.push_back(along_pullback(pb, idx, s));
      for_each_map(C, G.total, cur.pi.base, [&](const PshMap& a) {
        PulledBack g = pull_back(C, cur.pi, G.total, a);
        for_each_iso_over(C, pb.family, g.family, [&](const PshMap& iso) {
          PshMap phi = compose(g.top, iso);
          for (const PshMap& s : on_pb)
            if (compose(phi, s).at < phi.at) return true;
          if (n > 0 && find_datum(S, i, r, n, a, phi, n)) return true;
          auto key = datum_key(i, r, a, phi);
          if (cur.index.count(key)) return true;
          if (cur.ledger.size() >= caps.max_data) {
            cur.truncated = true;
            return false;
          }
          cur.index[key] = static_cast<int>(cur.ledger.size());
          cur.ledger.push_back(SoaDatum{i, r, a, phi, {}, {}});
          return true;
        });
        return !cur.truncated;
      });
    }
  }

  // pushout of π^n along the coproduct of the data
  std::vector<Presheaf> As, Bs, Ps, Fs;
  std::vector<PulledBack> pbs;
  for (const SoaDatum& d : cur.ledger) {
    const Family& G = S.monos[d.mono].mono;
    const Family& rep = S.families[d.mono][d.family];
    As.push_back(G.total);
    Bs.push_back(G.base);
    pbs.push_back(pull_back(C, rep, G.total, G.proj));
    Ps.push_back(pbs.back().family.total);
    Fs.push_back(rep.total);
  }
  Cone cA = coproduct(C, As), cB = coproduct(C, Bs), cP = coproduct(C, Ps), cF = coproduct(C, Fs);
  std::vector<PshMap> mA, aA, tP, pP, prF;
  for (std::size_t k = 0; k < cur.ledger.size(); ++k) {
    const SoaDatum& d = cur.ledger[k];
    const Family& G = S.monos[d.mono].mono;
    const Family& rep = S.families[d.mono][d.family];
    mA.push_back(compose(cB.legs[k], G.proj));
    aA.push_back(d.a);
    tP.push_back(compose(cF.legs[k], pbs[k].top));
    pP.push_back(d.phi);
    prF.push_back(compose(cB.legs[k], rep.proj));
  }
  PshMap mono_sum = colimit_map(cA, mA), a_sum = colimit_map(cA, aA);
  PshMap top_sum = colimit_map(cP, tP), phi_sum = colimit_map(cP, pP), proj_sum = colimit_map(cF, prF);
  Glued base = glue(S, cA.apex, mono_sum, cB.apex, a_sum, cur.pi.base);
  Glued total = glue(S, cP.apex, top_sum, cF.apex, phi_sum, cur.pi.total);

  SoaStage next;
  PshMap proj_pre = colimit_map(total.pre, {compose(base.pre.legs[0], proj_sum), compose(base.pre.legs[1], cur.pi.proj)});
  PshMap proj = trivial(S) ? proj_pre : sheafify_map(C, S.J, total.pre.apex, base.pre.apex, proj_pre);
  next.pi = Family{total.apex, base.apex, proj};
  next.link_base = base.into_z;
  next.link_total = total.into_z;
  for (std::size_t k = 0; k < cur.ledger.size(); ++k) {
    cur.ledger[k].into_base = compose(base.into_y, cB.legs[k]);
    cur.ledger[k].into_total = compose(total.into_y, cF.legs[k]);
  }
  S.stages.push_back(std::move(next));
  return S;
}

std::optional<std::string> check_soa_state(const SoaState& S) {
  const FiniteCategory& C = S.C;
  const long long bound = trivial(S) ? S.N : sheafified_fiber_bound(C, S.J, S.N);
  for (int j = 0; j <= S.stage(); ++j) {
    const SoaStage& st = S.stages[j];
    const std::string at = "stage " + std::to_string(j) + ": ";
    if (auto e = check_family(C, st.pi)) return at + *e;
    if (max_fiber(st.pi) >= bound) return at + "fiber of size " + std::to_string(max_fiber(st.pi));
    if (!trivial(S)) {
      if (!is_sheaf(C, S.J, st.pi.base).sheaf || !is_sheaf(C, S.J, st.pi.total).sheaf) return at + "not a sheaf";
    }
    if (j > 0) {
      const SoaStage& prev = S.stages[j - 1];
      if (auto e = check_map(C, prev.pi.base, st.pi.base, st.link_base)) return at + "link: " + *e;
      if (auto e = check_map(C, prev.pi.total, st.pi.total, st.link_total)) return at + "link: " + *e;
      if (!is_mono(st.link_base, st.pi.base) || !is_mono(st.link_total, st.pi.total)) return at + "link is not mono";
      auto sq = is_cartesian_square(C, family_square(prev.pi, st.pi, st.link_total, st.link_base));
      if (!sq.commutes || !sq.cartesian) return at + "link is not cartesian: " + sq.witness;
    }
    if (j < S.stage())
      for (std::size_t k = 0; k < st.ledger.size(); ++k) {
        const SoaDatum& d = st.ledger[k];
        const Family& rep = S.families[d.mono][d.family];
        const Family& next = S.stages[j + 1].pi;
        auto sq = is_cartesian_square(C, family_square(rep, next, d.into_total, d.into_base));
        if (!sq.commutes || !sq.cartesian)
          return at + "datum " + std::to_string(k) + " does not land cartesianly: " + sq.witness;
      }
  }
  return std::nullopt;
}

std::optional<std::string> check_stage_problem(const SoaState& S, const StageProblem& P) {
  const FiniteCategory& C = S.C;
  if (P.stage < 0 || P.stage > S.stage()) return "problem stage out of range";
  if (auto e = check_family(C, P.f)) return "family: " + *e;
  if (auto e = check_map(C, P.A, P.f.base, P.m)) return "mono: " + *e;
  if (!is_mono(P.m, P.f.base)) return "m is not a monomorphism";
  const Family& pi = S.stages[P.stage].pi;
  if (auto e = check_map(C, P.A, pi.base, P.a)) return "partial base map: " + *e;
  PulledBack pb = pull_back(C, P.f, P.A, P.m);
  if (auto e = check_map(C, pb.family.total, pi.total, P.phi)) return "partial total map: " + *e;
  auto sq = is_cartesian_square(C, family_square(pb.family, pi, P.phi, P.a));
  if (!sq.commutes || !sq.cartesian) return "partial square is not cartesian: " + sq.witness;
  return std::nullopt;
}

std::optional<std::string> check_stage_solution(const SoaState& S, const StageProblem& P, const StageSolution& sol) {
  const FiniteCategory& C = S.C;
  const Family& pi = S.stages[S.stage()].pi;
  if (auto e = check_map(C, P.f.base, pi.base, sol.chi)) return "classifying map: " + *e;
  if (auto e = check_map(C, P.f.total, pi.total, sol.top)) return "total map: " + *e;
  auto sq = is_cartesian_square(C, family_square(P.f, pi, sol.top, sol.chi));
  if (!sq.commutes) return "solution square does not commute: " + sq.witness;
  if (!sq.cartesian) return "solution square is not cartesian: " + sq.witness;
  auto [lb, lt] = stage_link(S, P.stage, S.stage());
  if (!(compose(sol.chi, P.m) == compose(lb, P.a))) return "classifying map does not restrict to the partial map";
  PulledBack pb = pull_back(C, P.f, P.A, P.m);
  if (!(compose(sol.top, pb.top) == compose(lt, P.phi))) return "total map does not restrict to the partial map";
  return std::nullopt;
}

StageSolution soa_solve(const SoaState& S, const StageProblem& P) {
  const FiniteCategory& C = S.C;
  StageSolution sol;
  int mono = -1;
  for (int i = 0; i < static_cast<int>(S.monos.size()); ++i) {
    const Family& G = S.monos[i].mono;
    if (G.total == P.A && G.base == P.f.base && G.proj == P.m) {
      mono = i;
      break;
    }
  }
  if (mono < 0) {
    sol.reason = "not a generating monomorphism";
    return sol;
  }
  const Family& G = S.monos[mono].mono;
  PulledBack pbf = pull_back(C, P.f, P.A, P.m);
  for (int r = 0; r < static_cast<int>(S.families[mono].size()); ++r) {
    const Family& rep = S.families[mono][r];
    std::optional<PshMap> psi;
    for_each_iso_over(C, P.f, rep, [&](const PshMap& s) {
      psi = s;
      return false;
    });
    if (!psi) continue;
    PulledBack pbr = pull_back(C, rep, G.total, G.proj);
    PairIndex idx_r = pair_index(pbr);
    // phi transported to the representative
    PshMap phi_r;
    phi_r.at.assign(C.num_objects(), {});
    for (Ob c = 0; c < C.num_objects(); ++c) {
      phi_r.at[c].assign(pbr.family.total.size[c], -1);
      for (int w = 0; w < pbf.family.total.size[c]; ++w) {
        int z = pbf.family.proj.at[c][w];
        int x = pbf.top.at[c][w];
        phi_r.at[c][lookup(idx_r, c, z, psi->at[c][x])] = P.phi.at[c][w];
      }
    }
    auto hit = find_datum(S, mono, r, P.stage, P.a, phi_r, S.stage());
    if (!hit) {
      sol.reason = S.stages[std::min(P.stage, S.stage())].truncated ? "unresolved within budget (ledger truncated)"
                                                                      : "unresolved within budget";
      return sol;
    }
    const SoaDatum& d = S.stages[hit->stage].ledger[hit->index];
    auto [lb, lt] = stage_link(S, hit->stage + 1, S.stage());
    sol.solved = true;
    sol.via_stage = hit->stage;
    sol.chi = compose(lb, d.into_base);
    sol.top = compose(lt, compose(d.into_total, compose(inverse(hit->sigma, rep.total), *psi)));
    return sol;
  }
  sol.reason = "family is not small over the generating codomain";
  return sol;
}

StageProblem datum_problem(const SoaState& S, int stage, int index) {
  const SoaDatum& d = S.stages.at(stage).ledger.at(index);
  const Family& G = S.monos[d.mono].mono;
  return StageProblem{S.families[d.mono][d.family], G.total, G.proj, stage, d.a, d.phi};
}

namespace {

struct Instance {
  StageProblem problem;
  StageSolution solution;
  bool built = false;
  std::string failure;
};

// Pushout of a generating mono along A -> A' = image(a) + W.
Instance pushout_instance(const SoaState& S, const StageProblem& D, std::mt19937_64& rng) {
  const FiniteCategory& C = S.C;
  Instance out;
  const Family& pi = S.stages[D.stage].pi;
  ImageFactorization im = image_factorization(C, D.A, D.a, pi.base);
  auto sheaves = enumerate_sheaves(C, S.J, 1);
  Presheaf W = sheaves[std::uniform_int_distribution<std::size_t>(0, sheaves.size() - 1)(rng)];
  auto w = random_map(C, W, pi.base, rng);
  if (!w) {
    W = initial_presheaf(C);
    w = from_initial(C);
  }
  Cone Ap = coproduct(C, {im.image, W});
  PshMap g = compose(Ap.legs[0], im.epi);
  PshMap a2 = colimit_map(Ap, {im.mono, *w});
  PulledBack h = pull_back(C, pi, Ap.apex, a2);
  PairIndex hidx = pair_index(h);
  PulledBack pbr = pull_back(C, D.f, D.A, D.m);
  PshMap t;
  t.at.assign(C.num_objects(), {});
  for (Ob c = 0; c < C.num_objects(); ++c)
    for (int x = 0; x < pbr.family.total.size[c]; ++x)
      t.at[c].push_back(lookup(hidx, c, g.at[c][pbr.family.proj.at[c][x]], D.phi.at[c][x]));
  Glued B2 = glue(S, D.A, D.m, D.f.base, g, Ap.apex);
  Glued T2 = glue(S, pbr.family.total, pbr.top, D.f.total, t, h.family.total);
  PshMap proj_pre =
      colimit_map(T2.pre, {compose(B2.pre.legs[0], D.f.proj), compose(B2.pre.legs[1], h.family.proj)});
  PshMap proj = trivial(S) ? proj_pre : sheafify_map(C, S.J, T2.pre.apex, B2.pre.apex, proj_pre);
  Family f2{T2.apex, B2.apex, proj};
  StageProblem P{f2, Ap.apex, B2.into_z, D.stage, a2, {}};
  // partial total map through the glued copy of h
  PulledBack pb2 = pull_back(C, f2, P.A, P.m);
  PairIndex idx2 = pair_index(pb2);
  P.phi.at.assign(C.num_objects(), {});
  for (Ob c = 0; c < C.num_objects(); ++c) P.phi.at[c].assign(pb2.family.total.size[c], -1);
  for (Ob c = 0; c < C.num_objects(); ++c)
    for (int y = 0; y < h.family.total.size[c]; ++y) {
      auto it = idx2[c].find({h.family.proj.at[c][y], T2.into_z.at[c][y]});
      if (it == idx2[c].end()) {
        out.failure = "pushout family is not cartesian over A'";
        return out;
      }
      P.phi.at[c][it->second] = h.top.at[c][y];
    }
  for (const auto& row : P.phi.at)
    for (int v : row)
      if (v < 0) {
        out.failure = "pushout family has extra elements over A'";
        return out;
      }
  out.problem = P;
  out.built = true;

  // solve along the generating mono for the pullback along B -> B', then glue
  PulledBack r = pull_back(C, f2, D.f.base, B2.into_y);
  PairIndex ridx = pair_index(r);
  StageProblem Q{r.family, D.A, D.m, D.stage, compose(a2, g), {}};
  PulledBack pq = pull_back(C, r.family, D.A, D.m);
  Q.phi.at.assign(C.num_objects(), {});
  for (Ob c = 0; c < C.num_objects(); ++c)
    for (int wq = 0; wq < pq.family.total.size[c]; ++wq) {
      int z = pq.family.proj.at[c][wq];
      int x2 = r.top.at[c][pq.top.at[c][wq]];
      Q.phi.at[c].push_back(P.phi.at[c][lookup(idx2, c, g.at[c][z], x2)]);
    }
  StageSolution base = soa_solve(S, Q);
  if (!base.solved) {
    out.solution = base;
    return out;
  }
  auto [lb, lt] = stage_link(S, D.stage, S.stage());
  const Family& last = S.stages[S.stage()].pi;
  PshMap on_rep;
  on_rep.at.assign(C.num_objects(), {});
  for (Ob c = 0; c < C.num_objects(); ++c)
    for (int x = 0; x < D.f.total.size[c]; ++x)
      on_rep.at[c].push_back(base.top.at[c][lookup(ridx, c, D.f.proj.at[c][x], T2.into_y.at[c][x])]);
  out.solution.solved = true;
  out.solution.via_stage = base.via_stage;
  out.solution.chi = out_of(S, B2, base.chi, compose(lb, a2), last.base);
  out.solution.top = out_of(S, T2, on_rep, compose(lt, h.top), last.total);
  return out;
}

// An isomorphism B1 -> A2 between a codomain and a domain of generating monos.
std::optional<PshMap> find_iso(const FiniteCategory& C, const Presheaf& X, const Presheaf& Y) {
  if (X.size != Y.size) return std::nullopt;
  std::optional<PshMap> out;
  for_each_map(C, X, Y, [&](const PshMap& a) {
    if (is_iso(a, Y)) out = a;
    return !out;
  });
  return out;
}

// Composite A1 >-> B1 ≅ A2 >-> B2 solved in two steps.
Instance composition_instance(const SoaState& S, const StageProblem& D, int mono1, std::mt19937_64& rng) {
  const FiniteCategory& C = S.C;
  Instance out;
  const Family& G1 = S.monos[mono1].mono;
  std::vector<std::pair<int, PshMap>> seconds;
  for (int i = 0; i < static_cast<int>(S.monos.size()); ++i)
    if (auto j = find_iso(C, G1.base, S.monos[i].mono.total)) seconds.push_back({i, *j});
  if (seconds.empty()) {
    out.solution.reason = "no generating mono continues the chain";
    return out;
  }
  auto [i2, j] = seconds[std::uniform_int_distribution<std::size_t>(0, seconds.size() - 1)(rng)];
  const Family& G2 = S.monos[i2].mono;
  PshMap step = compose(G2.proj, j);  // B1 -> B2
  // families over B2 restricting to the datum's family
  std::vector<int> fits;
  for (int r = 0; r < static_cast<int>(S.families[i2].size()); ++r) {
    PulledBack q = pull_back(C, S.families[i2][r], G1.base, step);
    if (for_each_iso_over(C, q.family, D.f, [](const PshMap&) { return false; }) > 0) fits.push_back(r);
  }
  if (fits.empty()) {
    out.solution.reason = "no family over the composite extends the datum";
    return out;
  }
  int r2 = fits[std::uniform_int_distribution<std::size_t>(0, fits.size() - 1)(rng)];
  Family f2 = relabel_total(C, S.families[i2][r2], rng).first;
  PulledBack q = pull_back(C, f2, G1.base, step);
  std::vector<PshMap> isos;
  for_each_iso_over(C, q.family, D.f, [&](const PshMap& s) {
    isos.push_back(s);
    return true;
  });
  const PshMap& psi = isos[std::uniform_int_distribution<std::size_t>(0, isos.size() - 1)(rng)];
  PshMap composite = compose(step, G1.proj);
  StageProblem P{f2, G1.total, composite, D.stage, D.a, {}};
  PulledBack pb = pull_back(C, f2, P.A, P.m);
  PulledBack pd = pull_back(C, D.f, D.A, D.m);
  PairIndex qidx = pair_index(q), didx = pair_index(pd);
  P.phi.at.assign(C.num_objects(), {});
  for (Ob c = 0; c < C.num_objects(); ++c)
    for (int w = 0; w < pb.family.total.size[c]; ++w) {
      int z = pb.family.proj.at[c][w];
      int x2 = pb.top.at[c][w];
      int y = lookup(qidx, c, G1.proj.at[c][z], x2);
      P.phi.at[c].push_back(D.phi.at[c][lookup(didx, c, z, psi.at[c][y])]);
    }
  out.problem = P;
  out.built = true;

  // step 1 along A1 >-> B1 for the restriction q
  PulledBack pq = pull_back(C, q.family, G1.total, G1.proj);
  StageProblem Q1{q.family, G1.total, G1.proj, D.stage, D.a, {}};
  Q1.phi.at.assign(C.num_objects(), {});
  for (Ob c = 0; c < C.num_objects(); ++c)
    for (int w = 0; w < pq.family.total.size[c]; ++w)
      Q1.phi.at[c].push_back(
          P.phi.at[c][lookup(pair_index(pb), c, pq.family.proj.at[c][w], q.top.at[c][pq.top.at[c][w]])]);
  StageSolution s1 = soa_solve(S, Q1);
  if (!s1.solved) {
    out.solution = s1;
    return out;
  }
  // step 2 along A2 >-> B2 with the step-1 answer as partial map, read at its own stage
  const int mid = s1.via_stage + 1;
  auto [lb, lt] = stage_link(S, mid, S.stage());
  auto chi1 = factor_through(s1.chi, lb);
  auto top1 = factor_through(s1.top, lt);
  if (!chi1 || !top1) {
    out.failure = "step-1 solution does not factor through its stage";
    return out;
  }
  PshMap jinv = inverse(j, G2.total);
  StageProblem Q2{f2, G2.total, G2.proj, mid, compose(*chi1, jinv), {}};
  PulledBack p2 = pull_back(C, f2, G2.total, G2.proj);
  Q2.phi.at.assign(C.num_objects(), {});
  for (Ob c = 0; c < C.num_objects(); ++c)
    for (int w = 0; w < p2.family.total.size[c]; ++w)
      Q2.phi.at[c].push_back(
          top1->at[c][lookup(qidx, c, jinv.at[c][p2.family.proj.at[c][w]], p2.top.at[c][w])]);
  if (mid > S.stage() - 1) {
    out.solution.reason = "unresolved within budget (no stage left for the second step)";
    return out;
  }
  out.solution = soa_solve(S, Q2);
  return out;
}

// Split idempotents of B preserving A, then an isomorphic relabelling.
Instance retract_instance(const SoaState& S, const StageProblem& D, std::mt19937_64& rng) {
  const FiniteCategory& C = S.C;
  Instance out;
  const Presheaf& B = D.f.base;
  std::vector<std::pair<PshMap, PshMap>> idem;  // (e on B, e on A)
  for_each_map(C, B, B, [&](const PshMap& e) {
    if (!(compose(e, e) == e)) return true;
    auto eA = factor_through(compose(e, D.m), D.m);
    if (eA) idem.push_back({e, *eA});
    return idem.size() < 64;
  });
  auto [e, eA] = idem[std::uniform_int_distribution<std::size_t>(0, idem.size() - 1)(rng)];
  ImageFactorization sB = image_factorization(C, B, e, B);
  ImageFactorization sA = image_factorization(C, D.A, eA, D.A);
  auto [B2, pB] = permuted(C, sB.image, rng);
  auto [A2, pA] = permuted(C, sA.image, rng);
  PshMap iB = compose(sB.mono, inverse(pB, B2)), rB = compose(pB, sB.epi);
  PshMap iA = compose(sA.mono, inverse(pA, A2)), rA = compose(pA, sA.epi);
  PshMap m2 = compose(rB, compose(D.m, iA));
  if (!(compose(D.m, iA) == compose(iB, m2))) {
    out.failure = "split idempotent does not restrict to the subobject";
    return out;
  }
  PulledBack fb = pull_back(C, D.f, B2, iB);
  auto [f2, relabel] = relabel_total(C, fb.family, rng);
  PshMap top2 = compose(fb.top, inverse(relabel, f2.total));  // f2.total -> D.f.total
  StageProblem P{f2, A2, m2, D.stage, compose(D.a, iA), {}};
  PulledBack pb = pull_back(C, f2, A2, m2);
  PulledBack pd = pull_back(C, D.f, D.A, D.m);
  PairIndex didx = pair_index(pd);
  P.phi.at.assign(C.num_objects(), {});
  for (Ob c = 0; c < C.num_objects(); ++c)
    for (int w = 0; w < pb.family.total.size[c]; ++w)
      P.phi.at[c].push_back(
          D.phi.at[c][lookup(didx, c, iA.at[c][pb.family.proj.at[c][w]], top2.at[c][pb.top.at[c][w]])]);
  out.problem = P;
  out.built = true;

  // pull back along r, solve along the generating mono, restrict along i
  PulledBack rf = pull_back(C, f2, B, rB);
  PairIndex ridx = pair_index(rf), pidx = pair_index(pb);
  StageProblem Q{rf.family, D.A, D.m, D.stage, compose(P.a, rA), {}};
  PulledBack pq = pull_back(C, rf.family, D.A, D.m);
  Q.phi.at.assign(C.num_objects(), {});
  for (Ob c = 0; c < C.num_objects(); ++c)
    for (int w = 0; w < pq.family.total.size[c]; ++w)
      Q.phi.at[c].push_back(
          P.phi.at[c][lookup(pidx, c, rA.at[c][pq.family.proj.at[c][w]], rf.top.at[c][pq.top.at[c][w]])]);
  StageSolution s = soa_solve(S, Q);
  if (!s.solved) {
    out.solution = s;
    return out;
  }
  out.solution.solved = true;
  out.solution.via_stage = s.via_stage;
  out.solution.chi = compose(s.chi, iB);
  out.solution.top.at.assign(C.num_objects(), {});
  for (Ob c = 0; c < C.num_objects(); ++c)
    for (int x = 0; x < f2.total.size[c]; ++x)
      out.solution.top.at[c].push_back(s.top.at[c][lookup(ridx, c, iB.at[c][f2.proj.at[c][x]], x)]);
  return out;
}

}  // namespace

SaturationReport saturation_check(const SoaState& S, SaturationMode mode, int instances, std::uint64_t seed) {
  SaturationReport rep;
  rep.mode = mode;
  std::mt19937_64 rng(seed);
  std::vector<std::pair<int, int>> data;
  for (int j = 0; j < S.stage(); ++j)
    for (int k = 0; k < static_cast<int>(S.stages[j].ledger.size()); ++k)
      if (mode != SaturationMode::Composition || j + 1 < S.stage()) data.push_back({j, k});
  if (data.empty()) return rep;
  auto fail = [&](std::string w) {
    ++rep.failures;
    if (rep.witnesses.size() < 5) rep.witnesses.push_back(std::move(w));
  };
  int attempts = 0;
  while (rep.instances < instances && attempts < 50 * instances) {
    ++attempts;
    auto [j, k] = data[std::uniform_int_distribution<std::size_t>(0, data.size() - 1)(rng)];
    StageProblem D = datum_problem(S, j, k);
    Instance inst;
    try {
      switch (mode) {
        case SaturationMode::Pushout:
          inst = pushout_instance(S, D, rng);
          break;
        case SaturationMode::Composition:
          inst = composition_instance(S, D, S.stages[j].ledger[k].mono, rng);
          break;
        case SaturationMode::Retract:
          inst = retract_instance(S, D, rng);
          break;
      }
    } catch (const Error& e) {
      ++rep.instances;
      fail(std::string("construction threw: ") + e.what());
      continue;
    }
    if (!inst.failure.empty()) {
      ++rep.instances;
      fail(inst.failure);
      continue;
    }
    if (!inst.built) continue;
    ++rep.instances;
    if (auto e = check_stage_problem(S, inst.problem)) {
      fail("constructed problem is malformed: " + *e);
      continue;
    }
    if (!inst.solution.solved) {
      ++rep.unresolved;
      continue;
    }
    if (auto e = check_stage_solution(S, inst.problem, inst.solution)) {
      fail(*e);
      continue;
    }
    ++rep.solved;
  }
  return rep;
}

}  // namespace tf
