#include <algorithm>
#include <map>

#include "toposforge/errors.hpp"
#include "toposforge/presheaf.hpp"

namespace tf {

namespace {

void require_mask_width(const FiniteCategory& C) {
  if (C.num_morphisms() > 64) throw InputError("sieve computations support at most 64 morphisms");
}

bool in(SieveMask s, Mor m) { return (s >> m) & 1u; }

}  // namespace

bool is_sieve(const FiniteCategory& C, Ob c, SieveMask s) {
  require_mask_width(C);
  for (Mor m = 0; m < C.num_morphisms(); ++m) {
    if (!in(s, m)) continue;
    if (C.dst(m) != c) return false;
    for (Mor w : C.into[C.src(m)])
      if (!in(s, C.comp(m, w))) return false;
  }
  return true;
}

SieveMask maximal_sieve(const FiniteCategory& C, Ob c) {
  require_mask_width(C);
  SieveMask s = 0;
  for (Mor m : C.into[c]) s |= SieveMask{1} << m;
  return s;
}

SieveMask pullback_sieve(const FiniteCategory& C, SieveMask s, Mor f) {
  SieveMask r = 0;
  for (Mor g : C.into[C.src(f)])
    if (in(s, C.comp(f, g))) r |= SieveMask{1} << g;
  return r;
}

std::vector<SieveMask> sieves_on(const FiniteCategory& C, Ob c) {
  require_mask_width(C);
  const auto& M = C.into[c];
  if (M.size() > 24) throw CapExceeded("sieve enumeration", std::size_t{1} << 24, std::size_t{1} << 24);
  std::vector<SieveMask> out;
  for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << M.size()); ++bits) {
    SieveMask s = 0;
    for (std::size_t i = 0; i < M.size(); ++i)
      if ((bits >> i) & 1u) s |= SieveMask{1} << M[i];
    if (is_sieve(C, c, s)) out.push_back(s);
  }
  return out;
}

std::vector<Mor> sieve_members(const FiniteCategory& C, Ob c, SieveMask s) {
  std::vector<Mor> out;
  if (in(s, C.id(c))) out.push_back(C.id(c));
  for (Mor m : C.into[c])
    if (in(s, m) && m != C.id(c)) out.push_back(m);
  return out;
}

std::string sieve_to_string(const FiniteCategory& C, SieveMask s) {
  std::string out = "{";
  bool first = true;
  for (Mor m = 0; m < C.num_morphisms(); ++m)
    if (in(s, m)) {
      if (!first) out += ",";
      out += C.morphism_names[m];
      first = false;
    }
  return out + "}";
}

int Omega::index(Ob c, SieveMask s) const {
  auto it = std::find(sieves[c].begin(), sieves[c].end(), s);
  return it == sieves[c].end() ? -1 : static_cast<int>(it - sieves[c].begin());
}

Omega subobject_classifier(const FiniteCategory& C) {
  Omega O;
  const int n = C.num_objects();
  for (Ob c = 0; c < n; ++c) O.sieves.push_back(sieves_on(C, c));
  O.omega.size.assign(n, 0);
  for (Ob c = 0; c < n; ++c) O.omega.size[c] = static_cast<int>(O.sieves[c].size());
  O.omega.act.assign(C.num_morphisms(), {});
  for (Mor f = 0; f < C.num_morphisms(); ++f)
    for (SieveMask s : O.sieves[C.dst(f)]) O.omega.act[f].push_back(O.index(C.src(f), pullback_sieve(C, s, f)));
  O.truth.at.assign(n, {});
  for (Ob c = 0; c < n; ++c) O.truth.at[c].push_back(O.index(c, maximal_sieve(C, c)));
  return O;
}

PshMap characteristic(const FiniteCategory& C, const Omega& O, const Presheaf& A, const PshMap& m,
                      const Presheaf& X) {
  (void)A;
  if (!is_mono(m, X)) throw LawViolation("characteristic map of a non-monomorphism");
  const int n = C.num_objects();
  std::vector<std::vector<char>> hit(n);
  for (Ob c = 0; c < n; ++c) {
    hit[c].assign(X.size[c], 0);
    for (int v : m.at[c]) hit[c][v] = 1;
  }
  PshMap chi;
  chi.at.assign(n, {});
  for (Ob c = 0; c < n; ++c)
    for (int x = 0; x < X.size[c]; ++x) {
      SieveMask s = 0;
      for (Mor u : C.into[c])
        if (hit[C.src(u)][X.act[u][x]]) s |= SieveMask{1} << u;
      chi.at[c].push_back(O.index(c, s));
    }
  return chi;
}

std::vector<std::vector<int>> matching_families(const FiniteCategory& C, const Presheaf& X, Ob c,
                                                SieveMask s) {
  const std::vector<Mor> M = sieve_members(C, c, s);
  const int k = static_cast<int>(M.size());
  // links[j]: constraints (i, w) with i < j and M[i]∘w = M[j], or M[j]∘w = M[i]
  struct Link {
    int other;
    Mor w;
    int kind;  // 0: x_j = X(w) x_other; 1: x_other = X(w) x_j; 2: x_j = X(w) x_j
  };
  std::vector<std::vector<Link>> links(k);
  std::vector<int> pos(C.num_morphisms(), -1);
  for (int i = 0; i < k; ++i) pos[M[i]] = i;
  for (int i = 0; i < k; ++i)
    for (Mor w : C.into[C.src(M[i])]) {
      int j = pos[C.comp(M[i], w)];
      if (j < 0) continue;
      if (j > i) links[j].push_back({i, w, 0});
      else if (j < i) links[i].push_back({j, w, 1});
      else links[i].push_back({i, w, 2});
    }
  std::vector<std::vector<int>> out;
  std::vector<int> fam(k, 0);
  std::function<void(int)> rec = [&](int j) {
    if (j == k) {
      guard_size(out.size() + 1, "matching families");
      out.push_back(fam);
      return;
    }
    for (int x = 0; x < X.size[C.src(M[j])]; ++x) {
      bool ok = true;
      for (const auto& L : links[j]) {
        bool bad = L.kind == 0   ? X.act[L.w][fam[L.other]] != x
                   : L.kind == 1 ? X.act[L.w][x] != fam[L.other]
                                 : X.act[L.w][x] != x;
        if (bad) {
          ok = false;
          break;
        }
      }
      if (ok) {
        fam[j] = x;
        rec(j + 1);
      }
    }
  };
  rec(0);
  return out;
}

PartialMapClassifier partial_map_classifier(const FiniteCategory& C, const Presheaf& X) {
  PartialMapClassifier P;
  const int n = C.num_objects();
  P.elements.assign(n, {});
  std::vector<std::map<std::pair<SieveMask, std::vector<int>>, int>> index(n);
  for (Ob c = 0; c < n; ++c)
    for (SieveMask s : sieves_on(C, c))
      for (auto& fam : matching_families(C, X, c, s)) {
        index[c].emplace(std::make_pair(s, fam), static_cast<int>(P.elements[c].size()));
        P.elements[c].emplace_back(s, std::move(fam));
        guard_size(P.elements[c].size(), "partial map classifier");
      }
  P.plus.size.assign(n, 0);
  for (Ob c = 0; c < n; ++c) P.plus.size[c] = static_cast<int>(P.elements[c].size());
  P.plus.act.assign(C.num_morphisms(), {});
  for (Mor f = 0; f < C.num_morphisms(); ++f) {
    Ob c = C.dst(f), d = C.src(f);
    for (const auto& [s, fam] : P.elements[c]) {
      std::vector<Mor> Mc = sieve_members(C, c, s);
      SieveMask r = pullback_sieve(C, s, f);
      std::vector<int> nf;
      for (Mor g : sieve_members(C, d, r)) {
        Mor fg = C.comp(f, g);
        nf.push_back(fam[std::find(Mc.begin(), Mc.end(), fg) - Mc.begin()]);
      }
      P.plus.act[f].push_back(index[d].at({r, nf}));
    }
  }
  P.unit.at.assign(n, {});
  for (Ob c = 0; c < n; ++c) {
    SieveMask top = maximal_sieve(C, c);
    std::vector<Mor> Mc = sieve_members(C, c, top);
    for (int x = 0; x < X.size[c]; ++x) {
      std::vector<int> fam;
      for (Mor u : Mc) fam.push_back(X.act[u][x]);
      P.unit.at[c].push_back(index[c].at({top, fam}));
    }
  }
  return P;
}

DependentProduct dependent_product(const FiniteCategory& C, const Family& f, const Family& g) {
  if (!(g.base == f.total)) throw InputError("dependent product: g must be a family over the total of f");
  const Presheaf& A = f.total;
  const Presheaf& I = f.base;
  const Presheaf& B = g.total;
  const int n = C.num_objects();
  DependentProduct D;
  D.indices.assign(n, {});
  D.sections.assign(n, {});
  std::vector<std::map<std::pair<int, std::vector<int>>, int>> index(n);
  std::vector<std::vector<std::vector<int>>> g_fibers(n);
  for (Ob c = 0; c < n; ++c) {
    g_fibers[c].assign(A.size[c], {});
    for (int b = 0; b < B.size[c]; ++b) g_fibers[c][g.proj.at[c][b]].push_back(b);
  }
  D.family.base = I;
  D.family.total.size.assign(n, 0);
  D.family.proj.at.assign(n, {});
  for (Ob c = 0; c < n; ++c) {
    for (int i = 0; i < I.size[c]; ++i) {
      std::vector<DependentProduct::Index> idx;
      std::map<std::pair<Mor, int>, int> where;
      for (Mor u : C.into[c]) {
        Ob d = C.src(u);
        int iu = I.act[u][i];
        for (int a = 0; a < A.size[d]; ++a)
          if (f.proj.at[d][a] == iu) {
            where[{u, a}] = static_cast<int>(idx.size());
            idx.push_back({u, a});
          }
      }
      const int k = static_cast<int>(idx.size());
      // constraint: s[j] = B(w) s[p] when idx[j] = (u∘w, A(w) a_p)
      struct Link {
        int other;
        Mor w;
        bool from_other;
      };
      std::vector<std::vector<Link>> links(k);
      for (int p = 0; p < k; ++p) {
        auto [u, a] = idx[p];
        for (Mor w : C.into[C.src(u)]) {
          int j = where.at({C.comp(u, w), A.act[w][a]});
          if (j > p) links[j].push_back({p, w, true});
          else if (j < p) links[p].push_back({j, w, false});
          else if (j == p) links[p].push_back({p, w, true});
        }
      }
      std::vector<int> s(k, 0);
      std::function<void(int)> rec = [&](int j) {
        if (j == k) {
          index[c].emplace(std::make_pair(i, s), D.family.total.size[c]++);
          guard_size(static_cast<std::size_t>(D.family.total.size[c]), "dependent product carrier");
          D.sections[c].push_back(s);
          D.family.proj.at[c].push_back(i);
          return;
        }
        auto [u, a] = idx[j];
        for (int b : g_fibers[C.src(u)][a]) {
          bool ok = true;
          for (const auto& L : links[j]) {
            int lhs, rhs;
            if (L.other == j) {
              lhs = B.act[L.w][b];
              rhs = b;
            } else if (L.from_other) {
              lhs = B.act[L.w][s[L.other]];
              rhs = b;
            } else {
              lhs = B.act[L.w][b];
              rhs = s[L.other];
            }
            if (lhs != rhs) {
              ok = false;
              break;
            }
          }
          if (ok) {
            s[j] = b;
            rec(j + 1);
          }
        }
      };
      rec(0);
      D.indices[c].push_back(std::move(idx));
    }
  }
  D.family.total.act.assign(C.num_morphisms(), {});
  for (Mor v = 0; v < C.num_morphisms(); ++v) {
    Ob c = C.dst(v), d = C.src(v);
    for (int e = 0; e < D.family.total.size[c]; ++e) {
      int i = D.family.proj.at[c][e];
      const auto& s = D.sections[c][e];
      const auto& idx = D.indices[c][i];
      int i2 = I.act[v][i];
      std::vector<int> s2;
      for (const auto& [u2, a2] : D.indices[d][i2]) {
        Mor vu = C.comp(v, u2);
        int p = 0;
        while (!(idx[p].u == vu && idx[p].a == a2)) ++p;
        s2.push_back(s[p]);
      }
      D.family.total.act[v].push_back(index[d].at({i2, s2}));
    }
  }
  return D;
}

ImageFactorization image_factorization(const FiniteCategory& C, const Presheaf& X, const PshMap& a,
                                       const Presheaf& Y) {
  const int n = C.num_objects();
  ImageFactorization F;
  F.image.size.assign(n, 0);
  F.epi.at.assign(n, {});
  F.mono.at.assign(n, {});
  std::vector<std::vector<int>> pos(n);
  for (Ob c = 0; c < n; ++c) {
    pos[c].assign(Y.size[c], -1);
    std::vector<char> hit(Y.size[c], 0);
    for (int x = 0; x < X.size[c]; ++x) hit[a.at[c][x]] = 1;
    for (int y = 0; y < Y.size[c]; ++y)
      if (hit[y]) {
        pos[c][y] = F.image.size[c]++;
        F.mono.at[c].push_back(y);
      }
    for (int x = 0; x < X.size[c]; ++x) F.epi.at[c].push_back(pos[c][a.at[c][x]]);
  }
  F.image.act.assign(C.num_morphisms(), {});
  for (Mor u = 0; u < C.num_morphisms(); ++u)
    for (int y : F.mono.at[C.dst(u)]) F.image.act[u].push_back(pos[C.src(u)][Y.act[u][y]]);
  return F;
}

Subobject subobject_from_membership(const FiniteCategory& C, const Presheaf& X,
                                    const std::vector<std::vector<char>>& member) {
  const int n = C.num_objects();
  Subobject S;
  S.member = member;
  S.sub.size.assign(n, 0);
  S.incl.at.assign(n, {});
  std::vector<std::vector<int>> pos(n);
  for (Ob c = 0; c < n; ++c) {
    pos[c].assign(X.size[c], -1);
    for (int x = 0; x < X.size[c]; ++x)
      if (member[c][x]) {
        pos[c][x] = S.sub.size[c]++;
        S.incl.at[c].push_back(x);
      }
  }
  S.sub.act.assign(C.num_morphisms(), {});
  for (Mor u = 0; u < C.num_morphisms(); ++u)
    for (int x : S.incl.at[C.dst(u)]) {
      int r = pos[C.src(u)][X.act[u][x]];
      if (r < 0) throw LawViolation("membership is not closed under restriction");
      S.sub.act[u].push_back(r);
    }
  return S;
}

Subobject image_subobject(const FiniteCategory& C, const Presheaf& A, const PshMap& m, const Presheaf& X) {
  (void)A;
  std::vector<std::vector<char>> member(C.num_objects());
  for (Ob c = 0; c < C.num_objects(); ++c) {
    member[c].assign(X.size[c], 0);
    for (int v : m.at[c]) member[c][v] = 1;
  }
  return subobject_from_membership(C, X, member);
}

std::vector<Subobject> enumerate_subobjects(const FiniteCategory& C, const Presheaf& X) {
  const int n = C.num_objects();
  std::vector<std::pair<Ob, int>> elems;
  std::vector<std::vector<int>> id(n);
  for (Ob c = 0; c < n; ++c)
    for (int x = 0; x < X.size[c]; ++x) {
      id[c].push_back(static_cast<int>(elems.size()));
      elems.emplace_back(c, x);
    }
  const int k = static_cast<int>(elems.size());
  std::vector<std::vector<int>> below(k), above(k);
  for (int e = 0; e < k; ++e) {
    auto [c, x] = elems[e];
    for (Mor u : C.into[c]) {
      int r = id[C.src(u)][X.act[u][x]];
      if (r == e) continue;
      below[e].push_back(r);
      above[r].push_back(e);
    }
  }
  std::vector<int> state(k, -1);
  std::vector<Subobject> out;
  std::function<void(int)> rec = [&](int e) {
    if (e == k) {
      guard_size(out.size() + 1, "subobject enumeration");
      std::vector<std::vector<char>> member(n);
      for (Ob c = 0; c < n; ++c)
        for (int x = 0; x < X.size[c]; ++x) member[c].push_back(static_cast<char>(state[id[c][x]]));
      out.push_back(subobject_from_membership(C, X, member));
      return;
    }
    for (int choice = 0; choice < 2; ++choice) {
      bool ok = true;
      if (choice == 0) {
        for (int a : above[e])
          if (state[a] == 1) ok = false;
      } else {
        for (int b : below[e])
          if (state[b] == 0) ok = false;
      }
      if (!ok) continue;
      state[e] = choice;
      rec(e + 1);
      state[e] = -1;
    }
  };
  rec(0);
  return out;
}

namespace {

// Restricted growth strings of length n.
void for_each_partition(int n, const std::function<void(const std::vector<int>&)>& visit) {
  std::vector<int> a(n, 0);
  std::function<void(int, int)> rec = [&](int i, int used) {
    if (i == n) {
      visit(a);
      return;
    }
    for (int v = 0; v <= used && v < n; ++v) {
      a[i] = v;
      rec(i + 1, std::max(used, v + 1));
    }
  };
  rec(0, 0);
}

}  // namespace

std::vector<Congruence> enumerate_congruences(const FiniteCategory& C, const Presheaf& X) {
  const int n = C.num_objects();
  std::vector<std::vector<std::vector<int>>> parts(n);
  std::size_t combos = 1;
  for (Ob c = 0; c < n; ++c) {
    for_each_partition(X.size[c], [&](const std::vector<int>& p) { parts[c].push_back(p); });
    combos *= parts[c].size();
    guard_size(combos, "congruence enumeration");
  }
  std::vector<Congruence> out;
  Congruence cur;
  cur.cls.assign(n, {});
  auto closed = [&](Mor u) {
    Ob c = C.dst(u), d = C.src(u);
    const auto& pc = cur.cls[c];
    const auto& pd = cur.cls[d];
    for (int x = 0; x < X.size[c]; ++x)
      for (int y = x + 1; y < X.size[c]; ++y)
        if (pc[x] == pc[y] && pd[X.act[u][x]] != pd[X.act[u][y]]) return false;
    return true;
  };
  std::function<void(Ob)> rec = [&](Ob c) {
    if (c == n) {
      out.push_back(cur);
      return;
    }
    for (const auto& p : parts[c]) {
      cur.cls[c] = p;
      bool ok = true;
      for (Mor u = 0; u < C.num_morphisms() && ok; ++u) {
        Ob a = C.dst(u), b = C.src(u);
        if (std::max(a, b) == c) ok = closed(u);
      }
      if (ok) rec(c + 1);
    }
    cur.cls[c].clear();
  };
  rec(0);
  return out;
}

Quotient quotient(const FiniteCategory& C, const Presheaf& X, const Congruence& R) {
  const int n = C.num_objects();
  Quotient Q;
  Q.quotient.size.assign(n, 0);
  std::vector<std::vector<int>> rep(n);
  for (Ob c = 0; c < n; ++c)
    for (int x = 0; x < X.size[c]; ++x)
      if (R.cls[c][x] == Q.quotient.size[c]) {
        ++Q.quotient.size[c];
        rep[c].push_back(x);
      }
  Q.quotient.act.assign(C.num_morphisms(), {});
  for (Mor u = 0; u < C.num_morphisms(); ++u)
    for (int x : rep[C.dst(u)]) Q.quotient.act[u].push_back(R.cls[C.src(u)][X.act[u][x]]);
  Q.epi.at = R.cls;
  return Q;
}

}  // namespace tf
