#include "toposforge/sheaf_universe.hpp"

#include <map>
#include <set>

#include "toposforge/canonical.hpp"
#include "toposforge/errors.hpp"

namespace tf {

MaterializedUniverse materialize_universe(const HsUniverse& U) {
  const FiniteCategory& C = U.C;
  const int n = C.num_objects();
  MaterializedUniverse M;
  M.index.assign(n, {});
  M.offset.assign(n, {});
  M.ty.size.assign(n, 0);
  for (Ob c = 0; c < n; ++c) {
    M.codes.push_back(U.materialize(c));
    M.ty.size[c] = static_cast<int>(M.codes[c].size());
    int acc = 0;
    for (int y = 0; y < M.ty.size[c]; ++y) {
      M.index[c][M.codes[c][y]] = y;
      M.offset[c].push_back(acc);
      acc += U.el_size(M.codes[c][y]);
    }
  }
  M.ty.act.assign(C.num_morphisms(), {});
  for (Mor u = 0; u < C.num_morphisms(); ++u)
    for (const Code& code : M.codes[C.dst(u)]) M.ty.act[u].push_back(M.index[C.src(u)].at(U.restrict(code, u)));
  M.el = el_pullback(U, M.ty, M.codes);
  return M;
}

int code_index(const MaterializedUniverse& M, const Code& code) {
  if (code.base < 0 || code.base >= static_cast<int>(M.index.size())) throw InputError("code base out of range");
  auto it = M.index[code.base].find(code);
  if (it == M.index[code.base].end()) throw InputError("code not in the materialized universe");
  return it->second;
}

std::pair<PshMap, PshMap> classifying_maps(const MaterializedUniverse& M, const Family& f, const Classification& k) {
  const std::size_t n = f.base.size.size();
  PshMap base, total;
  base.at.assign(n, {});
  total.at.assign(n, {});
  for (std::size_t c = 0; c < n; ++c) {
    for (int y = 0; y < f.base.size[c]; ++y) base.at[c].push_back(code_index(M, k.code[c][y]));
    for (int x = 0; x < f.total.size[c]; ++x)
      total.at[c].push_back(M.offset[c][base.at[c][f.proj.at[c][x]]] + k.elem[c][x]);
  }
  return {base, total};
}

Classification classification_from_maps(const MaterializedUniverse& M, const Family& f, const PshMap& base,
                                        const PshMap& total) {
  const std::size_t n = f.base.size.size();
  Classification k;
  k.code.assign(n, {});
  k.elem.assign(n, {});
  for (std::size_t c = 0; c < n; ++c) {
    for (int y = 0; y < f.base.size[c]; ++y) k.code[c].push_back(M.codes[c][base.at[c][y]]);
    for (int x = 0; x < f.total.size[c]; ++x)
      k.elem[c].push_back(total.at[c][x] - M.offset[c][base.at[c][f.proj.at[c][x]]]);
  }
  return k;
}

SheafUniverse sheaf_universe(const FiniteCategory& C, const Topology& J, int N) {
  SheafUniverse U;
  U.C = C;
  U.J = J;
  U.N = N;
  U.hs = hs_universe(C, N);
  U.plain = materialize_universe(U.hs);
  Sheafified ty = sheafify(C, J, U.plain.ty);
  Sheafified el = sheafify(C, J, U.plain.el.total);
  U.ty_unit = ty.unit;
  U.el_unit = el.unit;
  U.el = Family{el.sheaf, ty.sheaf, sheafify_map(C, J, U.plain.el.total, U.plain.ty, U.plain.el.proj)};
  return U;
}

namespace {

// Index of the pullback element over base element z whose top is x.
std::vector<std::map<std::pair<int, int>, int>> pair_index(const PulledBack& pb) {
  std::vector<std::map<std::pair<int, int>, int>> idx(pb.family.total.size.size());
  for (std::size_t c = 0; c < idx.size(); ++c)
    for (int w = 0; w < pb.family.total.size[c]; ++w) idx[c][{pb.family.proj.at[c][w], pb.top.at[c][w]}] = w;
  return idx;
}

}  // namespace

SheafClassification classify_sheaf_family(const SheafUniverse& U, const Family& f) {
  const FiniteCategory& C = U.C;
  if (auto e = check_family(C, f)) throw InputError("not a family: " + *e);
  for (const Presheaf* X : {&f.total, &f.base}) {
    SheafReport r = is_sheaf(C, U.J, *X);
    if (!r.sheaf) throw InputError("family is not a map of sheaves: " + r.witness);
  }
  const int n = C.num_objects();
  auto [base0, total0] = classifying_maps(U.plain, f, classify_family(U.hs, f));
  SheafClassification out;
  out.base = compose(U.ty_unit, base0);
  out.total = compose(U.el_unit, total0);
  PulledBack pb = pull_back(C, U.el, f.base, out.base);
  auto idx = pair_index(pb);
  out.witness.at.assign(n, {});
  for (Ob c = 0; c < n; ++c)
    for (int x = 0; x < f.total.size[c]; ++x) {
      auto it = idx[c].find({f.proj.at[c][x], out.total.at[c][x]});
      if (it == idx[c].end()) throw LawViolation("sheafified classifying square does not commute");
      out.witness.at[c].push_back(it->second);
    }
  return out;
}

std::optional<std::string> check_sheaf_classification(const SheafUniverse& U, const Family& f,
                                                      const SheafClassification& k) {
  const FiniteCategory& C = U.C;
  if (auto e = check_map(C, f.base, U.el.base, k.base)) return "base map: " + *e;
  if (auto e = check_map(C, f.total, U.el.total, k.total)) return "total map: " + *e;
  auto sq = is_cartesian_square(C, family_square(f, U.el, k.total, k.base));
  if (!sq.commutes) return "square does not commute: " + sq.witness;
  if (!sq.cartesian) return "square is not cartesian: " + sq.witness;
  PulledBack pb = pull_back(C, U.el, f.base, k.base);
  if (auto e = check_map(C, f.total, pb.family.total, k.witness)) return "witness: " + *e;
  if (!is_iso(k.witness, pb.family.total)) return "witness is not an isomorphism";
  if (!(compose(pb.family.proj, k.witness) == f.proj)) return "witness does not lie over the base";
  if (!(compose(pb.top, k.witness) == k.total)) return "witness does not factor the total map";
  return std::nullopt;
}

std::size_t for_each_iso_over(const FiniteCategory& C, const Family& f, const Family& g,
                              const std::function<bool(const PshMap&)>& visit, const PshMap* fixed) {
  if (!(f.base == g.base)) throw InputError("isomorphisms over a base need a shared base");
  if (f.total.size != g.total.size) return 0;
  Elements E = category_of_elements(C, f.base);
  Presheaf P = elements_from_family(C, E, f);
  Presheaf Q = elements_from_family(C, E, g);
  if (P.size != Q.size) return 0;
  const int n = C.num_objects();
  auto pos_f = fiber_positions(f);
  std::vector<std::vector<std::vector<int>>> fib_g(n);
  for (Ob c = 0; c < n; ++c)
    for (int y = 0; y < g.base.size[c]; ++y) fib_g[c].push_back(fiber(g, c, y));
  PshMap fixed_e;
  if (fixed) {
    fixed_e.at.assign(E.cat.num_objects(), {});
    for (int k = 0; k < E.cat.num_objects(); ++k) fixed_e.at[k].assign(P.size[k], -1);
    auto pos_g = fiber_positions(g);
    for (Ob c = 0; c < n; ++c)
      for (int x = 0; x < f.total.size[c]; ++x) {
        int v = fixed->at[c][x];
        if (v < 0) continue;
        int y = f.proj.at[c][x];
        if (g.proj.at[c][v] != y) return 0;
        fixed_e.at[E.object_of[c][y]][pos_f[c][x]] = pos_g[c][v];
      }
  }
  std::size_t seen = 0;
  PshMap out;
  out.at.assign(n, {});
  for (Ob c = 0; c < n; ++c) out.at[c].assign(f.total.size[c], -1);
  for_each_map(
      E.cat, P, Q,
      [&](const PshMap& a) {
        if (!is_iso(a, Q)) return true;
        for (Ob c = 0; c < n; ++c)
          for (int x = 0; x < f.total.size[c]; ++x) {
            int y = f.proj.at[c][x];
            out.at[c][x] = fib_g[c][y][a.at[E.object_of[c][y]][pos_f[c][x]]];
          }
        ++seen;
        return visit(out);
      },
      fixed ? &fixed_e : nullptr);
  return seen;
}

PshMap colimit_map(const Cone& L, const std::vector<PshMap>& from_nodes) {
  const std::size_t n = L.apex.size.size();
  PshMap out;
  out.at.assign(n, {});
  for (std::size_t c = 0; c < n; ++c) out.at[c].assign(L.apex.size[c], -1);
  for (std::size_t i = 0; i < from_nodes.size() && i < L.legs.size(); ++i)
    for (std::size_t c = 0; c < n; ++c)
      for (std::size_t x = 0; x < L.legs[i].at[c].size(); ++x) {
        int& slot = out.at[c][L.legs[i].at[c][x]];
        int v = from_nodes[i].at[c][x];
        if (slot >= 0 && slot != v) throw LawViolation("maps out of the colimit disagree");
        slot = v;
      }
  for (std::size_t c = 0; c < n; ++c)
    for (int v : out.at[c])
      if (v < 0) throw LawViolation("colimit element not reached by any leg");
  return out;
}

std::vector<Family> small_families_over(const FiniteCategory& C, const Topology& J, const Presheaf& B, int N) {
  Elements E = category_of_elements(C, B);
  const int k = E.cat.num_objects();
  const bool trivial = J.is_trivial(C);
  std::vector<Family> out;
  std::set<std::vector<int>> seen;
  std::vector<int> sizes(k, 0);
  while (true) {
    for_each_presheaf(E.cat, sizes, [&](const Presheaf& P) {
      Family f = family_from_elements(C, E, B, P);
      if (!trivial && !is_sheaf(C, J, f.total).sheaf) return true;
      if (seen.insert(canonical_form(E.cat, P).encoding).second) {
        out.push_back(std::move(f));
        guard_size(out.size(), "small families");
      }
      return true;
    });
    int i = k - 1;
    while (i >= 0 && sizes[i] == N - 1) sizes[i--] = 0;
    if (i < 0) break;
    ++sizes[i];
  }
  return out;
}

std::vector<Presheaf> enumerate_sheaves(const FiniteCategory& C, const Topology& J, int max_size) {
  std::vector<Presheaf> out;
  for (Presheaf& X : enumerate_presheaves(C, max_size))
    if (J.is_trivial(C) || is_sheaf(C, J, X).sheaf) out.push_back(std::move(X));
  return out;
}

std::vector<GeneratingMono> generating_monos(const FiniteCategory& C, const Topology& J, std::size_t limit) {
  const bool trivial = J.is_trivial(C);
  ArrowCategory A = arrow_category(C);
  std::set<std::vector<int>> seen;
  std::vector<GeneratingMono> out;
  std::size_t candidates = 0;
  for (Ob c = 0; c < C.num_objects(); ++c) {
    Presheaf Y = yoneda(C, c);
    auto congruences = enumerate_congruences(C, Y);
    for (std::size_t r = 0; r < congruences.size(); ++r) {
      Presheaf Q = quotient(C, Y, congruences[r]).quotient;
      auto subs = enumerate_subobjects(C, Q);
      for (std::size_t s = 0; s < subs.size(); ++s) {
        if (++candidates > limit) throw CapExceeded("generating monomorphisms", candidates, limit);
        Family m{subs[s].sub, Q, subs[s].incl};
        if (!trivial) {
          Sheafified a = sheafify(C, J, m.total);
          Sheafified b = sheafify(C, J, m.base);
          m = Family{a.sheaf, b.sheaf, sheafify_map(C, J, subs[s].sub, Q, subs[s].incl)};
        }
        if (!is_mono(m.proj, m.base)) throw LawViolation("sheafified inclusion is not a monomorphism");
        if (!seen.insert(canonical_form(A.cat, family_as_presheaf(A, C, m)).encoding).second) continue;
        out.push_back(GeneratingMono{m, c, static_cast<int>(r), static_cast<int>(s)});
      }
    }
  }
  return out;
}

namespace {

std::string sizes_text(const std::vector<int>& v) {
  std::string s = "(";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s + ")";
}

// A strict extension of the partial map (a, phi) along m, if any.
bool extends(const SheafUniverse& U, const Family& f, const Subobject& S, const PulledBack& pbf, const PshMap& a,
             const PshMap& phi, std::size_t& candidates) {
  const FiniteCategory& C = U.C;
  const int n = C.num_objects();
  PshMap fixed;
  fixed.at.assign(n, {});
  for (Ob c = 0; c < n; ++c) {
    fixed.at[c].assign(f.base.size[c], -1);
    for (int z = 0; z < S.sub.size[c]; ++z) fixed.at[c][S.incl.at[c][z]] = a.at[c][z];
  }
  bool found = false;
  for_each_map(
      C, f.base, U.el.base,
      [&](const PshMap& chi) {
        ++candidates;
        PulledBack h = pull_back(C, U.el, f.base, chi);
        auto idx = pair_index(h);
        PshMap top;
        top.at.assign(n, {});
        for (Ob c = 0; c < n; ++c) top.at[c].assign(f.total.size[c], -1);
        for (Ob c = 0; c < n; ++c)
          for (int w = 0; w < pbf.family.total.size[c]; ++w) {
            int x = pbf.top.at[c][w];
            auto it = idx[c].find({f.proj.at[c][x], phi.at[c][w]});
            if (it == idx[c].end()) return true;
            top.at[c][x] = it->second;
          }
        for_each_iso_over(
            C, f, h.family,
            [&](const PshMap&) {
              found = true;
              return false;
            },
            &top);
        return !found;
      },
      &fixed);
  return found;
}

}  // namespace

U8SearchResult u8_search(const SheafUniverse& U, const U8SearchConfig& cfg) {
  const FiniteCategory& C = U.C;
  U8SearchResult res;
  for (const Presheaf& B : enumerate_sheaves(C, U.J, cfg.max_size)) {
    auto families = small_families_over(C, U.J, B, U.N);
    for (const Subobject& S : enumerate_subobjects(C, B)) {
      if (!U.J.is_trivial(C) && !is_sheaf(C, U.J, S.sub).sheaf) continue;
      for (const Family& f : families) {
        PulledBack pbf = pull_back(C, f, S.sub, S.incl);
        bool stop = false;
        for_each_map(C, S.sub, U.el.base, [&](const PshMap& a) {
          PulledBack g = pull_back(C, U.el, S.sub, a);
          for_each_iso_over(C, pbf.family, g.family, [&](const PshMap& iso) {
            if (res.problems >= cfg.max_problems) {
              res.truncated = stop = true;
              return false;
            }
            ++res.problems;
            PshMap phi = compose(g.top, iso);
            if (!extends(U, f, S, pbf, a, phi, res.extension_candidates)) {
              std::string w = "base sizes " + sizes_text(B.size) + ", subobject sizes " + sizes_text(S.sub.size) +
                              ", total sizes " + sizes_text(f.total.size) + ", partial base map";
              for (const auto& row : a.at) w += " " + sizes_text(row);
              res.failures.push_back({w});
            }
            return true;
          });
          return !stop;
        });
        if (stop) return res;
      }
    }
  }
  return res;
}

}  // namespace tf
