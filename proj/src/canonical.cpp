#include "toposforge/canonical.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>

#include "toposforge/errors.hpp"

namespace tf {

namespace {

std::vector<std::vector<int>> refine(const FiniteCategory& C, const Presheaf& X) {
  const int n = C.num_objects();
  std::vector<std::vector<int>> color(n);
  for (Ob c = 0; c < n; ++c) color[c].assign(X.size[c], 0);
  std::size_t classes = 0;
  while (true) {
    std::vector<std::vector<int>> next(n);
    std::size_t count = 0;
    for (Ob c = 0; c < n; ++c) {
      using Sig = std::pair<std::vector<int>, std::vector<std::vector<int>>>;
      std::vector<Sig> sig(X.size[c]);
      for (int x = 0; x < X.size[c]; ++x) {
        sig[x].first.push_back(color[c][x]);
        for (Mor u : C.into[c]) sig[x].first.push_back(color[C.src(u)][X.act[u][x]]);
        for (Mor v : C.out_of[c]) {
          std::vector<int> pre;
          Ob e = C.dst(v);
          for (int z = 0; z < X.size[e]; ++z)
            if (X.act[v][z] == x) pre.push_back(color[e][z]);
          std::sort(pre.begin(), pre.end());
          sig[x].second.push_back(std::move(pre));
        }
      }
      std::vector<Sig> distinct = sig;
      std::sort(distinct.begin(), distinct.end());
      distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
      count += distinct.size();
      for (int x = 0; x < X.size[c]; ++x)
        next[c].push_back(static_cast<int>(std::lower_bound(distinct.begin(), distinct.end(), sig[x]) - distinct.begin()));
    }
    color = std::move(next);
    if (count == classes) break;
    classes = count;
  }
  return color;
}

}  // namespace

CanonicalForm canonical_form(const FiniteCategory& C, const Presheaf& X) {
  const int n = C.num_objects();
  auto color = refine(C, X);
  // classes in canonical slot order: by object, then colour
  struct Cls {
    Ob c;
    int start;
    std::vector<int> members;
  };
  std::vector<Cls> classes;
  double combos = 1;
  for (Ob c = 0; c < n; ++c) {
    std::map<int, std::vector<int>> by;
    for (int x = 0; x < X.size[c]; ++x) by[color[c][x]].push_back(x);
    int start = 0;
    for (auto& [col, mem] : by) {
      for (int i = 2; i <= static_cast<int>(mem.size()); ++i) combos *= i;
      int sz = static_cast<int>(mem.size());
      classes.push_back({c, start, std::move(mem)});
      start += sz;
    }
  }
  if (combos > 1e6) throw CapExceeded("canonical form search", static_cast<std::size_t>(combos), 1000000);
  std::vector<std::vector<int>> label(n);
  for (Ob c = 0; c < n; ++c) label[c].assign(X.size[c], 0);
  CanonicalForm best;
  std::vector<int> enc;
  auto encode = [&] {
    enc.clear();
    for (int s : X.size) enc.push_back(s);
    for (Mor u = 0; u < C.num_morphisms(); ++u) {
      Ob c = C.dst(u), d = C.src(u);
      std::vector<int> row(X.size[c]);
      for (int x = 0; x < X.size[c]; ++x) row[label[c][x]] = label[d][X.act[u][x]];
      enc.insert(enc.end(), row.begin(), row.end());
    }
    if (best.encoding.empty() || enc < best.encoding) {
      best.encoding = enc;
      best.relabel = label;
    }
  };
  std::function<void(std::size_t)> rec = [&](std::size_t i) {
    if (i == classes.size()) return encode();
    Cls& K = classes[i];
    std::vector<int> perm(K.members.size());
    std::iota(perm.begin(), perm.end(), 0);
    do {
      for (std::size_t j = 0; j < perm.size(); ++j) label[K.c][K.members[j]] = K.start + perm[j];
      rec(i + 1);
    } while (std::next_permutation(perm.begin(), perm.end()));
  };
  rec(0);
  if (best.encoding.empty()) {
    encode();
  }
  return best;
}

bool isomorphic(const FiniteCategory& C, const Presheaf& X, const Presheaf& Y) {
  if (X.size != Y.size) return false;
  return canonical_form(C, X).encoding == canonical_form(C, Y).encoding;
}

ArrowCategory arrow_category(const FiniteCategory& C) {
  ArrowCategory A;
  const int n = C.num_objects(), m = C.num_morphisms();
  FiniteCategory& D = A.cat;
  for (Ob c = 0; c < n; ++c) {
    A.base_object.push_back(2 * c);
    A.total_object.push_back(2 * c + 1);
    D.object_names.push_back(C.object_names[c] + ".0");
    D.object_names.push_back(C.object_names[c] + ".1");
  }
  // morphism (u, i -> j) for i <= j, indexed 3u + {0: 0->0, 1: 1->1, 2: 0->1}
  D.identity.assign(2 * n, -1);
  for (Mor u = 0; u < m; ++u) {
    const std::string& nm = C.morphism_names[u];
    D.morphism_names.push_back(nm + ".0");
    D.source.push_back(2 * C.src(u));
    D.target.push_back(2 * C.dst(u));
    D.morphism_names.push_back(nm + ".1");
    D.source.push_back(2 * C.src(u) + 1);
    D.target.push_back(2 * C.dst(u) + 1);
    D.morphism_names.push_back(nm + ".01");
    D.source.push_back(2 * C.src(u));
    D.target.push_back(2 * C.dst(u) + 1);
    A.on_base.push_back(3 * u);
    A.on_total.push_back(3 * u + 1);
    if (C.is_identity(u)) {
      D.identity[2 * C.src(u)] = 3 * u;
      D.identity[2 * C.src(u) + 1] = 3 * u + 1;
    }
  }
  for (Ob c = 0; c < n; ++c) A.proj.push_back(3 * C.id(c) + 2);
  const int M = 3 * m;
  D.table.assign(static_cast<std::size_t>(M) * M, -1);
  for (int g = 0; g < M; ++g)
    for (int f = 0; f < M; ++f) {
      if (D.target[f] != D.source[g]) continue;
      int gu = g / 3, fu = f / 3, gk = g % 3, fk = f % 3;
      int from = fk == 1 ? 1 : 0;
      int to = gk == 0 ? 0 : 1;
      int kind = from == to ? from : 2;
      D.table[g * M + f] = 3 * C.comp(gu, fu) + kind;
    }
  D.finalize();
  return A;
}

Presheaf family_as_presheaf(const ArrowCategory& A, const FiniteCategory& C, const Family& f) {
  Presheaf P;
  const int n = C.num_objects();
  P.size.assign(2 * n, 0);
  for (Ob c = 0; c < n; ++c) {
    P.size[A.base_object[c]] = f.base.size[c];
    P.size[A.total_object[c]] = f.total.size[c];
  }
  P.act.assign(A.cat.num_morphisms(), {});
  for (Mor u = 0; u < C.num_morphisms(); ++u) {
    P.act[3 * u] = f.base.act[u];
    P.act[3 * u + 1] = f.total.act[u];
    // (u, 0 -> 1) : total(c) -> base(c')
    std::vector<int> row;
    for (int x = 0; x < f.total.size[C.dst(u)]; ++x) row.push_back(f.base.act[u][f.proj.at[C.dst(u)][x]]);
    P.act[3 * u + 2] = row;
  }
  return P;
}

Family presheaf_as_family(const ArrowCategory& A, const FiniteCategory& C, const Presheaf& P) {
  Family f;
  const int n = C.num_objects();
  for (Ob c = 0; c < n; ++c) {
    f.base.size.push_back(P.size[A.base_object[c]]);
    f.total.size.push_back(P.size[A.total_object[c]]);
    f.proj.at.push_back(P.act[A.proj[c]]);
  }
  for (Mor u = 0; u < C.num_morphisms(); ++u) {
    f.base.act.push_back(P.act[3 * u]);
    f.total.act.push_back(P.act[3 * u + 1]);
  }
  return f;
}

bool families_isomorphic(const FiniteCategory& C, const Family& f, const Family& g) {
  if (f.total.size != g.total.size || f.base.size != g.base.size) return false;
  ArrowCategory A = arrow_category(C);
  return isomorphic(A.cat, family_as_presheaf(A, C, f), family_as_presheaf(A, C, g));
}

bool isomorphic_over_base(const FiniteCategory& C, const Family& f, const Family& g) {
  if (!(f.base == g.base) || f.total.size != g.total.size) return false;
  Elements E = category_of_elements(C, f.base);
  return isomorphic(E.cat, elements_from_family(C, E, f), elements_from_family(C, E, g));
}

}  // namespace tf
