#include "toposforge/internal.hpp"

#include <algorithm>
#include <map>

#include "toposforge/errors.hpp"

namespace tf {

namespace {

using ElementIndex = std::vector<std::map<std::pair<int, int>, int>>;

// (base element, fiber position) -> element of an El pullback.
ElementIndex element_index(const Family& el) {
  auto pos = fiber_positions(el);
  ElementIndex idx(el.total.size.size());
  for (std::size_t c = 0; c < idx.size(); ++c)
    for (int x = 0; x < el.total.size[c]; ++x) idx[c][{el.proj.at[c][x], pos[c][x]}] = x;
  return idx;
}

CodeMap restrict_codes(const CodeMap& codes, const PshMap& m) {
  CodeMap out(m.at.size());
  for (std::size_t c = 0; c < m.at.size(); ++c)
    for (int y : m.at[c]) out[c].push_back(codes[c][y]);
  return out;
}

std::vector<std::vector<char>> support_members(const Omega& O, const Presheaf& X, const PshMap& phi) {
  std::vector<std::vector<char>> member(X.size.size());
  for (std::size_t c = 0; c < member.size(); ++c)
    for (int x = 0; x < X.size[c]; ++x) member[c].push_back(phi.at[c][x] == O.truth.at[c][0]);
  return member;
}

}  // namespace

std::optional<std::string> check_code_map(const HsUniverse& U, const Presheaf& X, const CodeMap& codes) {
  const FiniteCategory& C = U.C;
  if (static_cast<int>(codes.size()) != C.num_objects()) return "code map has the wrong number of objects";
  for (Ob c = 0; c < C.num_objects(); ++c) {
    if (static_cast<int>(codes[c].size()) != X.size[c]) return "code map has the wrong carrier size";
    for (const Code& k : codes[c]) {
      if (k.base != c) return "code over the wrong object";
      if (auto e = U.check_code(k)) return *e;
    }
  }
  for (Mor u = 0; u < C.num_morphisms(); ++u)
    for (int y = 0; y < X.size[C.dst(u)]; ++y)
      if (!(U.restrict(codes[C.dst(u)][y], u) == codes[C.src(u)][X.act[u][y]]))
        return "code map is not natural at " + C.morphism_names[u];
  return std::nullopt;
}

PartialIsomorph make_partial_isomorph(const HsUniverse& U, const Omega& O, const Presheaf& context, const CodeMap& B,
                                      const PshMap& support, const CodeMap& A, const PshMap& iso) {
  if (auto e = check_map(U.C, context, O.omega, support)) throw InputError("support: " + *e);
  PartialIsomorph D{context, B, support, subobject_from_membership(U.C, context, support_members(O, context, support)),
                    A, iso};
  return D;
}

std::optional<std::string> check_partial_isomorph(const HsUniverse& U, const Omega& O, const PartialIsomorph& D) {
  const FiniteCategory& C = U.C;
  if (auto e = check_presheaf(C, D.context)) return "context: " + *e;
  if (auto e = check_code_map(U, D.context, D.B)) return "B: " + *e;
  if (auto e = check_map(C, D.context, O.omega, D.support)) return "support: " + *e;
  if (D.restricted.member != support_members(O, D.context, D.support)) return "restriction does not match the support";
  if (auto e = check_code_map(U, D.restricted.sub, D.A)) return "A: " + *e;
  Family EA = el_pullback(U, D.restricted.sub, D.A);
  Family EB = el_pullback(U, D.restricted.sub, restrict_codes(D.B, D.restricted.incl));
  if (auto e = check_map(C, EA.total, EB.total, D.iso)) return "iso: " + *e;
  if (!is_iso(D.iso, EB.total)) return "iso is not invertible";
  if (!(compose(EB.proj, D.iso) == EA.proj)) return "iso does not lie over the support";
  return std::nullopt;
}

RealignedType realignment_structure_apply(const HsUniverse& U, const Omega& O, const PartialIsomorph& D) {
  if (auto e = check_partial_isomorph(U, O, D)) throw InputError("partial isomorph: " + *e);
  RealignmentProblem P = to_problem(U, D);
  Classification k = realign_presheaf(U, P);
  RealignedType r;
  r.G = k.code;
  Family EG = el_pullback(U, D.context, r.G);
  r.iso = inverse(classification_witness(U, P.f, k), EG.total);
  if (auto e = check_realigned_type(U, D, r)) throw LawViolation("realignment structure: " + *e);
  return r;
}

std::optional<std::string> check_realigned_type(const HsUniverse& U, const PartialIsomorph& D, const RealignedType& r) {
  const FiniteCategory& C = U.C;
  if (auto e = check_code_map(U, D.context, r.G)) return "G: " + *e;
  for (Ob c = 0; c < C.num_objects(); ++c)
    for (int z = 0; z < D.restricted.sub.size[c]; ++z)
      if (!(r.G[c][D.restricted.incl.at[c][z]] == D.A[c][z]))
        return "G differs from A on the support at " + C.object_names[c];
  Family EG = el_pullback(U, D.context, r.G);
  Family EB = el_pullback(U, D.context, D.B);
  if (auto e = check_map(C, EG.total, EB.total, r.iso)) return "iso: " + *e;
  if (!is_iso(r.iso, EB.total)) return "iso is not invertible";
  if (!(compose(EB.proj, r.iso) == EG.proj)) return "iso does not lie over the context";
  Family EA = el_pullback(U, D.restricted.sub, D.A);
  Family EBr = el_pullback(U, D.restricted.sub, restrict_codes(D.B, D.restricted.incl));
  ElementIndex gidx = element_index(EG), bidx = element_index(EB);
  auto pa = fiber_positions(EA), pb = fiber_positions(EBr);
  for (Ob c = 0; c < C.num_objects(); ++c)
    for (int v = 0; v < EA.total.size[c]; ++v) {
      int y = D.restricted.incl.at[c][EA.proj.at[c][v]];
      int g = gidx[c].at({y, pa[c][v]});
      int b = bidx[c].at({y, pb[c][D.iso.at[c][v]]});
      if (r.iso.at[c][g] != b) return "iso does not extend the given one at " + C.object_names[c];
    }
  return std::nullopt;
}

RealignmentProblem to_problem(const HsUniverse& U, const PartialIsomorph& D) {
  const FiniteCategory& C = U.C;
  RealignmentProblem P;
  P.f = el_pullback(U, D.context, D.B);
  P.A = D.restricted.sub;
  P.m = D.restricted.incl;
  P.partial.code = D.A;
  P.partial.elem.assign(C.num_objects(), {});
  PulledBack pb = pull_back(C, P.f, P.A, P.m);
  Family EA = el_pullback(U, D.restricted.sub, D.A);
  Family EBr = el_pullback(U, D.restricted.sub, restrict_codes(D.B, D.restricted.incl));
  PshMap back = inverse(D.iso, EBr.total);
  auto pf = fiber_positions(P.f), pa = fiber_positions(EA);
  ElementIndex ridx = element_index(EBr);
  for (Ob c = 0; c < C.num_objects(); ++c)
    for (int w = 0; w < pb.family.total.size[c]; ++w) {
      int z = pb.family.proj.at[c][w];
      int j = ridx[c].at({z, pf[c][pb.top.at[c][w]]});
      P.partial.elem[c].push_back(pa[c][back.at[c][j]]);
    }
  return P;
}

PartialIsomorph to_partial_isomorph(const HsUniverse& U, const Omega& O, const RealignmentProblem& P) {
  const FiniteCategory& C = U.C;
  const Presheaf& G = P.f.base;
  Classification canon = classify_family(U, P.f);
  PshMap phi = characteristic(C, O, P.A, P.m, G);
  PartialIsomorph D = make_partial_isomorph(U, O, G, canon.code, phi, {}, {});
  // restricted.sub is the image of m, re-indexed; r takes it back to A
  const Subobject& S = D.restricted;
  std::vector<std::map<int, int>> preimage(C.num_objects());
  for (Ob c = 0; c < C.num_objects(); ++c)
    for (int a = 0; a < P.A.size[c]; ++a) preimage[c][P.m.at[c][a]] = a;
  PshMap r;
  r.at.assign(C.num_objects(), {});
  for (Ob c = 0; c < C.num_objects(); ++c)
    for (int z = 0; z < S.sub.size[c]; ++z) r.at[c].push_back(preimage[c].at(S.incl.at[c][z]));
  D.A = restrict_codes(P.partial.code, r);

  PulledBack pb = pull_back(C, P.f, P.A, P.m);
  std::vector<std::map<std::pair<int, int>, int>> partial_at(C.num_objects());  // (a, elem) -> total element
  for (Ob c = 0; c < C.num_objects(); ++c)
    for (int w = 0; w < pb.family.total.size[c]; ++w)
      partial_at[c][{pb.family.proj.at[c][w], P.partial.elem[c][w]}] = pb.top.at[c][w];
  Family EA = el_pullback(U, S.sub, D.A);
  Family EBr = el_pullback(U, S.sub, restrict_codes(D.B, S.incl));
  ElementIndex ridx = element_index(EBr);
  auto pa = fiber_positions(EA);
  D.iso.at.assign(C.num_objects(), {});
  for (Ob c = 0; c < C.num_objects(); ++c)
    for (int v = 0; v < EA.total.size[c]; ++v) {
      int z = EA.proj.at[c][v];
      int x = partial_at[c].at({r.at[c][z], pa[c][v]});
      D.iso.at[c].push_back(ridx[c].at({z, canon.elem[c][x]}));
    }
  return D;
}

Classification to_classification(const HsUniverse& U, const RealignmentProblem& P, const RealignedType& r) {
  const FiniteCategory& C = U.C;
  Classification canon = classify_family(U, P.f);
  Family EG = el_pullback(U, P.f.base, r.G);
  Family EB = el_pullback(U, P.f.base, canon.code);
  ElementIndex bidx = element_index(EB);
  auto pg = fiber_positions(EG);
  PshMap to_g = inverse(r.iso, EB.total);
  Classification k;
  k.code = r.G;
  k.elem.assign(C.num_objects(), {});
  for (Ob c = 0; c < C.num_objects(); ++c)
    for (int x = 0; x < P.f.total.size[c]; ++x)
      k.elem[c].push_back(pg[c][to_g.at[c][bidx[c].at({P.f.proj.at[c][x], canon.elem[c][x]})]]);
  return k;
}

RoundtripReport external_internal_roundtrip(const HsUniverse& U, const std::vector<RealignmentProblem>& problems) {
  RoundtripReport rep;
  Omega O = subobject_classifier(U.C);
  for (std::size_t i = 0; i < problems.size(); ++i) {
    const RealignmentProblem& P = problems[i];
    const std::string at = "instance " + std::to_string(i) + ": ";
    ++rep.instances;
    try {
      Classification external = realign_presheaf(U, P);
      // external -> internal -> external
      PartialIsomorph D = to_partial_isomorph(U, O, P);
      RealignedType internal = realignment_structure_apply(U, O, D);
      Classification back = to_classification(U, P, internal);
      std::string b1 = boundary_mismatch(U, P, external), b2 = boundary_mismatch(U, P, back);
      // internal -> external on the same datum
      RealignmentProblem Q = to_problem(U, D);
      Classification solved = realign_presheaf(U, Q);
      bool strict_q = boundary_mismatch(U, Q, solved).empty() && solved.code == internal.G;
      if (!b1.empty() || !b2.empty() || !strict_q) {
        rep.failures.push_back(at + (b1.empty() ? (b2.empty() ? "internal datum solves differently" : b2) : b1));
        continue;
      }
      ++rep.agree;
      if (back == external) ++rep.identical;
    } catch (const Error& e) {
      rep.failures.push_back(at + e.what());
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------

GlueResult glue_type(const HsUniverse& U, const Omega& O, const GlueInput& in) {
  const FiniteCategory& C = U.C;
  if (auto e = check_presheaf(C, in.context)) throw InputError("context: " + *e);
  if (auto e = check_map(C, in.context, O.omega, in.J)) throw InputError("proposition: " + *e);
  GlueResult g;
  g.support = subobject_from_membership(C, in.context, support_members(O, in.context, in.J));
  if (auto e = check_code_map(U, g.support.sub, in.O)) throw InputError("O: " + *e);
  Family elO = el_pullback(U, g.support.sub, in.O);
  g.pi = dependent_product(C, Family{g.support.sub, in.context, g.support.incl}, elO);
  const Family& pi = g.pi.family;
  if (auto e = check_code_map(U, pi.total, in.K)) throw InputError("K: " + *e);
  Family elK = el_pullback(U, pi.total, in.K);
  for (Ob c = 0; c < C.num_objects(); ++c)
    for (int p = 0; p < pi.total.size[c]; ++p)
      if (g.support.member[c][pi.proj.at[c][p]] && el_fiber(U, in.K[c][p]) != 1)
        throw InputError("K is not J-connected over " + C.object_names[c]);
  g.sigma = Family{elK.total, in.context, compose(pi.proj, elK.proj)};
  int widest = 0;
  for (const auto& fib : fiber_positions(g.sigma))
    for (int e : fib) widest = std::max(widest, e + 1);
  if (widest >= U.N) throw BoundOverflow("Glue", widest + 1);

  // evaluation at the witness on Γ_J
  std::vector<std::map<int, int>> preimage(C.num_objects());
  for (Ob c = 0; c < C.num_objects(); ++c)
    for (int z = 0; z < g.support.sub.size[c]; ++z) preimage[c][g.support.incl.at[c][z]] = z;
  auto po = fiber_positions(elO);
  RealignmentProblem P{g.sigma, g.support.sub, g.support.incl, {in.O, {}}};
  P.partial.elem.assign(C.num_objects(), {});
  PulledBack pb = pull_back(C, g.sigma, P.A, P.m);
  for (Ob c = 0; c < C.num_objects(); ++c)
    for (int w = 0; w < pb.family.total.size[c]; ++w) {
      int z = pb.family.proj.at[c][w];
      int p = elK.proj.at[c][pb.top.at[c][w]];
      int y = pi.proj.at[c][p];
      const auto& idx = g.pi.indices[c][y];
      std::size_t j = 0;
      while (!(idx[j].u == C.id(c) && idx[j].a == z)) ++j;
      P.partial.elem[c].push_back(po[c][g.pi.sections[c][p][j]]);
    }
  Classification k = realign_presheaf(U, P);
  g.glue = k.code;
  g.glue_family = el_pullback(U, in.context, g.glue);
  g.glue_iso = classification_witness(U, g.sigma, k);
  if (auto e = check_glue(U, in, g)) throw LawViolation("glue: " + *e);
  return g;
}

std::optional<std::string> check_glue(const HsUniverse& U, const GlueInput& in, const GlueResult& g) {
  const FiniteCategory& C = U.C;
  for (Ob c = 0; c < C.num_objects(); ++c)
    for (int z = 0; z < g.support.sub.size[c]; ++z)
      if (!(g.glue[c][g.support.incl.at[c][z]] == in.O[c][z]))
        return "Glue differs from O at a witness over " + C.object_names[c];
  if (auto e = check_code_map(U, in.context, g.glue)) return "Glue: " + *e;
  if (auto e = check_map(C, g.sigma.total, g.glue_family.total, g.glue_iso)) return "glue: " + *e;
  if (!is_iso(g.glue_iso, g.glue_family.total)) return "glue is not an isomorphism";
  if (!(compose(g.glue_family.proj, g.glue_iso) == g.sigma.proj)) return "glue does not lie over the context";
  // over J, glue(x, y) is x evaluated at the witness
  Family elO = el_pullback(U, g.support.sub, in.O);
  auto po = fiber_positions(elO), pg = fiber_positions(g.glue_family);
  Family elK = el_pullback(U, g.pi.family.total, in.K);
  for (Ob c = 0; c < C.num_objects(); ++c)
    for (int z = 0; z < g.support.sub.size[c]; ++z) {
      int y = g.support.incl.at[c][z];
      const auto& idx = g.pi.indices[c][y];
      std::size_t j = 0;
      while (j < idx.size() && !(idx[j].u == C.id(c) && idx[j].a == z)) ++j;
      if (j == idx.size()) return "no evaluation index at a witness";
      for (int x = 0; x < g.sigma.total.size[c]; ++x) {
        if (g.sigma.proj.at[c][x] != y) continue;
        int p = elK.proj.at[c][x];
        if (pg[c][g.glue_iso.at[c][x]] != po[c][g.pi.sections[c][p][j]])
          return "glue is not evaluation over " + C.object_names[c];
      }
    }
  return std::nullopt;
}

GlueInput random_glue_input(const HsUniverse& U, const Omega& O, int max_size, std::mt19937_64& rng) {
  const FiniteCategory& C = U.C;
  GlueInput in;
  in.context = random_presheaf(C, max_size, rng);
  Subobject S = random_subobject(C, in.context, rng);
  in.J = characteristic(C, O, S.sub, S.incl, in.context);
  Subobject support = subobject_from_membership(C, in.context, support_members(O, in.context, in.J));
  Family of = random_family(C, support.sub, U.N, rng);
  in.O = classify_aligned(U, of, random_fiber_alignment(of, rng)).code;
  Family elO = el_pullback(U, support.sub, in.O);
  DependentProduct D = dependent_product(C, Family{support.sub, in.context, support.incl}, elO);
  const Presheaf& P = D.family.total;
  // a family over P collapsed to a point over the support
  Family h = random_family(C, P, 2, rng);
  Family k;
  k.base = P;
  k.total.size.assign(C.num_objects(), 0);
  k.proj.at.assign(C.num_objects(), {});
  std::vector<std::vector<int>> point(C.num_objects()), slot(C.num_objects());
  for (Ob c = 0; c < C.num_objects(); ++c) {
    point[c].assign(P.size[c], -1);
    for (int p = 0; p < P.size[c]; ++p)
      if (support.member[c][D.family.proj.at[c][p]]) {
        point[c][p] = k.total.size[c]++;
        k.proj.at[c].push_back(p);
      }
    for (int x = 0; x < h.total.size[c]; ++x) {
      int p = h.proj.at[c][x];
      slot[c].push_back(point[c][p] >= 0 ? point[c][p] : k.total.size[c]++);
      if (point[c][p] < 0) k.proj.at[c].push_back(p);
    }
  }
  k.total.act.assign(C.num_morphisms(), {});
  for (Mor u = 0; u < C.num_morphisms(); ++u) {
    Ob c = C.dst(u), d = C.src(u);
    k.total.act[u].assign(k.total.size[c], -1);
    for (int p = 0; p < P.size[c]; ++p)
      if (point[c][p] >= 0) k.total.act[u][point[c][p]] = point[d][P.act[u][p]];
    for (int x = 0; x < h.total.size[c]; ++x) {
      int p = h.proj.at[c][x];
      if (point[c][p] >= 0) continue;
      int pu = P.act[u][p];
      k.total.act[u][slot[c][x]] = point[d][pu] >= 0 ? point[d][pu] : slot[d][h.total.act[u][x]];
    }
  }
  in.K = classify_aligned(U, k, random_fiber_alignment(k, rng)).code;
  return in;
}

}  // namespace tf
