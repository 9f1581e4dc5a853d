#include "toposforge/presheaf.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include "toposforge/errors.hpp"

namespace tf {

std::size_t Presheaf::total() const {
  std::size_t n = 0;
  for (int s : size) n += static_cast<std::size_t>(s);
  return n;
}

std::optional<std::string> check_presheaf(const FiniteCategory& C, const Presheaf& X) {
  if (static_cast<int>(X.size.size()) != C.num_objects()) return "carrier count does not match objects";
  if (static_cast<int>(X.act.size()) != C.num_morphisms()) return "restriction count does not match morphisms";
  for (Ob c = 0; c < C.num_objects(); ++c)
    if (X.size[c] < 0) return "negative carrier size at " + C.object_names[c];
  for (Mor u = 0; u < C.num_morphisms(); ++u) {
    const auto& t = X.act[u];
    if (static_cast<int>(t.size()) != X.size[C.dst(u)])
      return "restriction along " + C.morphism_names[u] + " has the wrong length";
    for (int v : t)
      if (v < 0 || v >= X.size[C.src(u)]) return "restriction along " + C.morphism_names[u] + " leaves its carrier";
  }
  for (Ob c = 0; c < C.num_objects(); ++c)
    for (int x = 0; x < X.size[c]; ++x)
      if (X.act[C.id(c)][x] != x) return "identity restriction at " + C.object_names[c] + " is not the identity";
  for (Mor g = 0; g < C.num_morphisms(); ++g)
    for (Mor f : C.into[C.src(g)]) {
      Mor gf = C.comp(g, f);
      for (int x = 0; x < X.size[C.dst(g)]; ++x)
        if (X.act[gf][x] != X.act[f][X.act[g][x]])
          return "contravariance fails for " + C.morphism_names[g] + "∘" + C.morphism_names[f] +
                 " at element " + std::to_string(x);
    }
  return std::nullopt;
}

std::optional<std::string> check_map(const FiniteCategory& C, const Presheaf& X, const Presheaf& Y,
                                     const PshMap& a) {
  if (static_cast<int>(a.at.size()) != C.num_objects()) return "component count does not match objects";
  for (Ob c = 0; c < C.num_objects(); ++c) {
    if (static_cast<int>(a.at[c].size()) != X.size[c])
      return "component at " + C.object_names[c] + " has the wrong length";
    for (int v : a.at[c])
      if (v < 0 || v >= Y.size[c]) return "component at " + C.object_names[c] + " leaves the codomain";
  }
  for (Mor u = 0; u < C.num_morphisms(); ++u) {
    Ob c = C.dst(u), d = C.src(u);
    for (int x = 0; x < X.size[c]; ++x)
      if (a.at[d][X.act[u][x]] != Y.act[u][a.at[c][x]])
        return "naturality fails along " + C.morphism_names[u] + " at element " + std::to_string(x);
  }
  return std::nullopt;
}

std::optional<std::string> check_family(const FiniteCategory& C, const Family& f) {
  if (auto e = check_presheaf(C, f.total)) return "total: " + *e;
  if (auto e = check_presheaf(C, f.base)) return "base: " + *e;
  if (auto e = check_map(C, f.total, f.base, f.proj)) return "projection: " + *e;
  return std::nullopt;
}

Presheaf constant_presheaf(const FiniteCategory& C, int n) {
  Presheaf X;
  X.size.assign(C.num_objects(), n);
  X.act.assign(C.num_morphisms(), {});
  for (auto& t : X.act) {
    t.resize(n);
    std::iota(t.begin(), t.end(), 0);
  }
  return X;
}

Presheaf initial_presheaf(const FiniteCategory& C) { return constant_presheaf(C, 0); }

Presheaf terminal_presheaf(const FiniteCategory& C) { return constant_presheaf(C, 1); }

Presheaf yoneda(const FiniteCategory& C, Ob c) {
  if (c < 0 || c >= C.num_objects()) throw InputError("yoneda of unknown object");
  Presheaf Y;
  Y.size.assign(C.num_objects(), 0);
  std::vector<int> pos(C.num_morphisms(), -1);
  for (Mor m : C.into[c]) pos[m] = Y.size[C.src(m)]++;
  std::vector<std::vector<Mor>> elems(C.num_objects());
  for (Mor m : C.into[c]) elems[C.src(m)].push_back(m);
  Y.act.assign(C.num_morphisms(), {});
  for (Mor u = 0; u < C.num_morphisms(); ++u)
    for (Mor m : elems[C.dst(u)]) Y.act[u].push_back(pos[C.comp(m, u)]);
  return Y;
}

PshMap identity_map(const Presheaf& X) {
  PshMap a;
  for (int n : X.size) {
    std::vector<int> t(n);
    std::iota(t.begin(), t.end(), 0);
    a.at.push_back(std::move(t));
  }
  return a;
}

PshMap compose(const PshMap& b, const PshMap& a) {
  PshMap r;
  r.at.resize(a.at.size());
  for (std::size_t c = 0; c < a.at.size(); ++c)
    for (int v : a.at[c]) r.at[c].push_back(b.at[c][v]);
  return r;
}

PshMap to_terminal(const Presheaf& X) {
  PshMap a;
  for (int n : X.size) a.at.emplace_back(n, 0);
  return a;
}

PshMap from_initial(const FiniteCategory& C) {
  PshMap a;
  a.at.assign(C.num_objects(), {});
  return a;
}

bool is_mono(const PshMap& a, const Presheaf& Y) {
  for (std::size_t c = 0; c < a.at.size(); ++c) {
    std::vector<char> hit(Y.size[c], 0);
    for (int v : a.at[c]) {
      if (hit[v]) return false;
      hit[v] = 1;
    }
  }
  return true;
}

bool is_epi(const PshMap& a, const Presheaf& Y) {
  for (std::size_t c = 0; c < a.at.size(); ++c) {
    std::vector<char> hit(Y.size[c], 0);
    for (int v : a.at[c]) hit[v] = 1;
    if (std::find(hit.begin(), hit.end(), 0) != hit.end()) return false;
  }
  return true;
}

bool is_iso(const PshMap& a, const Presheaf& Y) { return is_mono(a, Y) && is_epi(a, Y); }

PshMap inverse(const PshMap& a, const Presheaf& Y) {
  if (!is_iso(a, Y)) throw LawViolation("inverse of a non-isomorphism");
  PshMap r;
  r.at.resize(a.at.size());
  for (std::size_t c = 0; c < a.at.size(); ++c) {
    r.at[c].assign(Y.size[c], 0);
    for (int x = 0; x < static_cast<int>(a.at[c].size()); ++x) r.at[c][a.at[c][x]] = x;
  }
  return r;
}

std::vector<int> fiber(const Family& f, Ob c, int y) {
  std::vector<int> out;
  for (int x = 0; x < f.total.size[c]; ++x)
    if (f.proj.at[c][x] == y) out.push_back(x);
  return out;
}

int max_fiber(const Family& f) {
  int best = 0;
  for (std::size_t c = 0; c < f.base.size.size(); ++c) {
    std::vector<int> count(f.base.size[c], 0);
    for (int y : f.proj.at[c]) best = std::max(best, ++count[y]);
  }
  return best;
}

std::vector<std::vector<int>> fiber_positions(const Family& f) {
  std::vector<std::vector<int>> pos(f.total.size.size());
  for (std::size_t c = 0; c < pos.size(); ++c) {
    std::vector<int> count(f.base.size[c], 0);
    for (int y : f.proj.at[c]) pos[c].push_back(count[y]++);
  }
  return pos;
}

// ---------------------------------------------------------------------------

namespace {

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

// Quotient of a disjoint union (per object) by a generated equivalence.
// Classes are numbered by their least member.
Cone quotient_of_sum(const FiniteCategory& C, const std::vector<const Presheaf*>& parts,
                     const std::function<void(Ob, const std::vector<int>&, UnionFind&)>& relate) {
  const int n = C.num_objects();
  Cone out;
  out.apex.size.assign(n, 0);
  out.legs.assign(parts.size(), PshMap{});
  for (auto& l : out.legs) l.at.assign(n, {});
  std::vector<std::vector<int>> cls(n);
  std::vector<std::vector<int>> offsets(n);
  std::vector<std::vector<std::pair<int, int>>> reps(n);  // (part, element) of each class's least member
  for (Ob c = 0; c < n; ++c) {
    int total = 0;
    std::vector<std::pair<int, int>> origin;
    for (std::size_t i = 0; i < parts.size(); ++i) {
      offsets[c].push_back(total);
      total += parts[i]->size[c];
      for (int x = 0; x < parts[i]->size[c]; ++x) origin.emplace_back(static_cast<int>(i), x);
    }
    guard_size(static_cast<std::size_t>(total), "colimit carrier");
    UnionFind uf(total);
    relate(c, offsets[c], uf);
    cls[c].assign(total, -1);
    for (int z = 0; z < total; ++z) {
      int r = uf.find(z);
      if (cls[c][r] < 0) {
        cls[c][r] = out.apex.size[c]++;
        reps[c].push_back(origin[z]);
      }
      cls[c][z] = cls[c][r];
    }
    for (std::size_t i = 0; i < parts.size(); ++i)
      for (int x = 0; x < parts[i]->size[c]; ++x) out.legs[i].at[c].push_back(cls[c][offsets[c][i] + x]);
  }
  out.apex.act.assign(C.num_morphisms(), {});
  for (Mor u = 0; u < C.num_morphisms(); ++u) {
    Ob c = C.dst(u), d = C.src(u);
    for (auto [i, x] : reps[c]) out.apex.act[u].push_back(cls[d][offsets[d][i] + parts[i]->act[u][x]]);
  }
  return out;
}

}  // namespace

Cone finite_limit(const FiniteCategory& C, const Diagram& D) {
  const int n = C.num_objects();
  const int k = static_cast<int>(D.nodes.size());
  for (const auto& e : D.edges)
    if (e.from < 0 || e.from >= k || e.to < 0 || e.to >= k) throw InputError("diagram edge out of range");
  Cone out;
  out.apex.size.assign(n, 0);
  out.legs.assign(k, PshMap{});
  for (auto& l : out.legs) l.at.assign(n, {});
  std::vector<std::map<std::vector<int>, int>> index(n);
  std::vector<std::vector<std::vector<int>>> tuples(n);
  // edges checked once both endpoints are assigned
  std::vector<std::vector<int>> ready(k);
  for (int e = 0; e < static_cast<int>(D.edges.size()); ++e)
    ready[std::max(D.edges[e].from, D.edges[e].to)].push_back(e);
  for (Ob c = 0; c < n; ++c) {
    std::vector<int> t(k, 0);
    std::function<void(int)> rec = [&](int i) {
      if (i == k) {
        guard_size(tuples[c].size() + 1, "limit carrier");
        index[c].emplace(t, static_cast<int>(tuples[c].size()));
        tuples[c].push_back(t);
        return;
      }
      for (int x = 0; x < D.nodes[i].size[c]; ++x) {
        t[i] = x;
        bool ok = true;
        for (int e : ready[i]) {
          const auto& E = D.edges[e];
          if (E.map.at[c][t[E.from]] != t[E.to]) {
            ok = false;
            break;
          }
        }
        if (ok) rec(i + 1);
      }
    };
    rec(0);
    out.apex.size[c] = static_cast<int>(tuples[c].size());
    for (int i = 0; i < k; ++i)
      for (const auto& tp : tuples[c]) out.legs[i].at[c].push_back(tp[i]);
  }
  out.apex.act.assign(C.num_morphisms(), {});
  for (Mor u = 0; u < C.num_morphisms(); ++u) {
    Ob c = C.dst(u), d = C.src(u);
    for (const auto& tp : tuples[c]) {
      std::vector<int> r(k);
      for (int i = 0; i < k; ++i) r[i] = D.nodes[i].act[u][tp[i]];
      out.apex.act[u].push_back(index[d].at(r));
    }
  }
  return out;
}

Cone finite_colimit(const FiniteCategory& C, const Diagram& D) {
  std::vector<const Presheaf*> parts;
  for (const auto& P : D.nodes) parts.push_back(&P);
  return quotient_of_sum(C, parts, [&](Ob c, const std::vector<int>& off, UnionFind& uf) {
    for (const auto& e : D.edges)
      for (int x = 0; x < D.nodes[e.from].size[c]; ++x)
        uf.unite(off[e.from] + x, off[e.to] + e.map.at[c][x]);
  });
}

Cone product(const FiniteCategory& C, const Presheaf& X, const Presheaf& Y) {
  return finite_limit(C, Diagram{{X, Y}, {}});
}

Cone pullback(const FiniteCategory& C, const Presheaf& X, const PshMap& a, const Presheaf& Y,
              const PshMap& b, const Presheaf& Z) {
  const int n = C.num_objects();
  Cone out;
  out.apex.size.assign(n, 0);
  out.legs.assign(2, PshMap{});
  out.legs[0].at.assign(n, {});
  out.legs[1].at.assign(n, {});
  std::vector<std::vector<int>> idx(n);
  for (Ob c = 0; c < n; ++c) {
    idx[c].assign(static_cast<std::size_t>(X.size[c]) * Y.size[c], -1);
    std::vector<std::vector<int>> by_z(Z.size[c]);
    for (int y = 0; y < Y.size[c]; ++y) by_z[b.at[c][y]].push_back(y);
    for (int x = 0; x < X.size[c]; ++x)
      for (int y : by_z[a.at[c][x]]) {
        idx[c][static_cast<std::size_t>(x) * Y.size[c] + y] = out.apex.size[c]++;
        out.legs[0].at[c].push_back(x);
        out.legs[1].at[c].push_back(y);
      }
    guard_size(static_cast<std::size_t>(out.apex.size[c]), "pullback carrier");
  }
  out.apex.act.assign(C.num_morphisms(), {});
  for (Mor u = 0; u < C.num_morphisms(); ++u) {
    Ob c = C.dst(u), d = C.src(u);
    for (int p = 0; p < out.apex.size[c]; ++p) {
      int x = X.act[u][out.legs[0].at[c][p]];
      int y = Y.act[u][out.legs[1].at[c][p]];
      out.apex.act[u].push_back(idx[d][static_cast<std::size_t>(x) * Y.size[d] + y]);
    }
  }
  return out;
}

Cone equalizer(const FiniteCategory& C, const Presheaf& X, const PshMap& a, const PshMap& b,
               const Presheaf& Y) {
  return finite_limit(C, Diagram{{X, Y}, {{0, 1, a}, {0, 1, b}}});
}

Cone coproduct(const FiniteCategory& C, const std::vector<Presheaf>& Xs) {
  std::vector<const Presheaf*> parts;
  for (const auto& P : Xs) parts.push_back(&P);
  return quotient_of_sum(C, parts, [](Ob, const std::vector<int>&, UnionFind&) {});
}

Cone pushout(const FiniteCategory& C, const Presheaf& X, const PshMap& a, const Presheaf& Y,
             const PshMap& b, const Presheaf& Z) {
  (void)X;
  return quotient_of_sum(C, {&Y, &Z}, [&](Ob c, const std::vector<int>& off, UnionFind& uf) {
    for (std::size_t x = 0; x < a.at[c].size(); ++x) uf.unite(off[0] + a.at[c][x], off[1] + b.at[c][x]);
  });
}

Cone coequalizer(const FiniteCategory& C, const Presheaf& X, const PshMap& a, const PshMap& b,
                 const Presheaf& Y) {
  (void)X;
  return quotient_of_sum(C, {&Y}, [&](Ob c, const std::vector<int>&, UnionFind& uf) {
    for (std::size_t x = 0; x < a.at[c].size(); ++x) uf.unite(a.at[c][x], b.at[c][x]);
  });
}

PulledBack pull_back(const FiniteCategory& C, const Family& f, const Presheaf& Z, const PshMap& g) {
  Cone P = pullback(C, Z, g, f.total, f.proj, f.base);
  return PulledBack{Family{P.apex, Z, P.legs[0]}, P.legs[1]};
}

Square family_square(const Family& src, const Family& dst, const PshMap& top, const PshMap& bottom) {
  return Square{src.total, dst.total, src.base, dst.base, top, src.proj, dst.proj, bottom};
}

CartesianReport is_cartesian_square(const FiniteCategory& C, const Square& sq) {
  CartesianReport rep;
  for (Ob c = 0; c < C.num_objects(); ++c)
    for (int x = 0; x < sq.tl.size[c]; ++x)
      if (sq.right.at[c][sq.top.at[c][x]] != sq.bottom.at[c][sq.left.at[c][x]]) {
        rep.commutes = false;
        rep.witness = "square does not commute at " + C.object_names[c] + ", element " + std::to_string(x);
        return rep;
      }
  Cone P = pullback(C, sq.bl, sq.bottom, sq.tr, sq.right, sq.br);
  rep.comparison.at.assign(C.num_objects(), {});
  rep.cartesian = true;
  for (Ob c = 0; c < C.num_objects(); ++c) {
    std::map<std::pair<int, int>, int> idx;
    for (int p = 0; p < P.apex.size[c]; ++p) idx[{P.legs[0].at[c][p], P.legs[1].at[c][p]}] = p;
    std::vector<int> hit(P.apex.size[c], -1);
    for (int x = 0; x < sq.tl.size[c]; ++x) {
      int p = idx.at({sq.left.at[c][x], sq.top.at[c][x]});
      rep.comparison.at[c].push_back(p);
      if (rep.cartesian && hit[p] >= 0) {
        rep.cartesian = false;
        rep.witness = "comparison not injective at " + C.object_names[c] + ": elements " +
                      std::to_string(hit[p]) + " and " + std::to_string(x) + " collapse";
      }
      hit[p] = x;
    }
    if (rep.cartesian)
      for (int p = 0; p < P.apex.size[c]; ++p)
        if (hit[p] < 0) {
          rep.cartesian = false;
          rep.witness = "comparison not surjective at " + C.object_names[c] + ": pullback element " +
                        std::to_string(p) + " missed";
          break;
        }
  }
  return rep;
}

}  // namespace tf
