#include <algorithm>
#include <cmath>
#include <numeric>

#include "toposforge/errors.hpp"
#include "toposforge/presheaf.hpp"

namespace tf {

namespace {

struct MapSearch {
  const FiniteCategory& C;
  const Presheaf& X;
  const Presheaf& Y;
  std::mt19937_64* rng;
  PshMap cur;
  std::vector<std::pair<Ob, int>> trail;
  std::vector<std::pair<Ob, int>> order;

  MapSearch(const FiniteCategory& C, const Presheaf& X, const Presheaf& Y, std::mt19937_64* rng)
      : C(C), X(X), Y(Y), rng(rng) {
    cur.at.assign(C.num_objects(), {});
    for (Ob c = 0; c < C.num_objects(); ++c) cur.at[c].assign(X.size[c], -1);
    // objects with many incoming morphisms first, so that propagation prunes early
    std::vector<Ob> obs(C.num_objects());
    std::iota(obs.begin(), obs.end(), 0);
    std::stable_sort(obs.begin(), obs.end(),
                     [&](Ob a, Ob b) { return C.into[a].size() > C.into[b].size(); });
    for (Ob c : obs)
      for (int x = 0; x < X.size[c]; ++x) order.emplace_back(c, x);
  }

  bool assign(Ob c, int x, int y) {
    std::vector<std::tuple<Ob, int, int>> queue{{c, x, y}};
    if (cur.at[c][x] != -1) return cur.at[c][x] == y;
    cur.at[c][x] = y;
    trail.emplace_back(c, x);
    while (!queue.empty()) {
      auto [a, p, q] = queue.back();
      queue.pop_back();
      for (Mor u : C.into[a]) {
        Ob d = C.src(u);
        int p2 = X.act[u][p], q2 = Y.act[u][q];
        int& slot = cur.at[d][p2];
        if (slot == -1) {
          slot = q2;
          trail.emplace_back(d, p2);
          queue.emplace_back(d, p2, q2);
        } else if (slot != q2) {
          return false;
        }
      }
    }
    return true;
  }

  void undo(std::size_t mark) {
    while (trail.size() > mark) {
      auto [c, x] = trail.back();
      cur.at[c][x] = -1;
      trail.pop_back();
    }
  }

  bool run(std::size_t i, const std::function<bool(const PshMap&)>& visit, std::size_t& count) {
    while (i < order.size() && cur.at[order[i].first][order[i].second] != -1) ++i;
    if (i == order.size()) {
      ++count;
      return visit(cur);
    }
    auto [c, x] = order[i];
    std::vector<int> cand(Y.size[c]);
    std::iota(cand.begin(), cand.end(), 0);
    if (rng) std::shuffle(cand.begin(), cand.end(), *rng);
    for (int y : cand) {
      std::size_t mark = trail.size();
      if (assign(c, x, y) && !run(i + 1, visit, count)) {
        undo(mark);
        return false;
      }
      undo(mark);
    }
    return true;
  }
};

}  // namespace

std::size_t for_each_map(const FiniteCategory& C, const Presheaf& X, const Presheaf& Y,
                         const std::function<bool(const PshMap&)>& visit, const PshMap* fixed,
                         std::mt19937_64* rng) {
  MapSearch S(C, X, Y, rng);
  std::size_t count = 0;
  if (fixed)
    for (Ob c = 0; c < C.num_objects(); ++c)
      for (int x = 0; x < X.size[c]; ++x)
        if (fixed->at[c][x] >= 0 && !S.assign(c, x, fixed->at[c][x])) return 0;
  S.run(0, visit, count);
  return count;
}

std::vector<PshMap> enumerate_maps(const FiniteCategory& C, const Presheaf& X, const Presheaf& Y) {
  std::vector<PshMap> out;
  for_each_map(C, X, Y, [&](const PshMap& a) {
    guard_size(out.size() + 1, "map enumeration");
    out.push_back(a);
    return true;
  });
  return out;
}

std::optional<PshMap> random_map(const FiniteCategory& C, const Presheaf& X, const Presheaf& Y,
                                 std::mt19937_64& rng) {
  std::optional<PshMap> out;
  for_each_map(
      C, X, Y,
      [&](const PshMap& a) {
        out = a;
        return false;
      },
      nullptr, &rng);
  return out;
}

std::size_t for_each_presheaf(const FiniteCategory& C, const std::vector<int>& sizes,
                              const std::function<bool(const Presheaf&)>& visit, std::mt19937_64* rng) {
  const int m = C.num_morphisms();
  for (Mor u = 0; u < m; ++u)
    if (sizes[C.dst(u)] > 0 && sizes[C.src(u)] == 0) return 0;
  Presheaf X;
  X.size = sizes;
  X.act.assign(m, {});
  std::vector<Mor> free;
  for (Mor u = 0; u < m; ++u) {
    if (C.is_identity(u)) {
      X.act[u].resize(sizes[C.dst(u)]);
      std::iota(X.act[u].begin(), X.act[u].end(), 0);
    } else {
      free.push_back(u);
    }
  }
  std::vector<int> pos(m, -1);
  for (std::size_t i = 0; i < free.size(); ++i) pos[free[i]] = static_cast<int>(i);
  auto assigned_before = [&](Mor u, std::size_t i) { return C.is_identity(u) || pos[u] < static_cast<int>(i); };
  // checks[i]: triples (g, f, gf) fully assigned once free[i] is
  std::vector<std::vector<std::array<Mor, 3>>> checks(free.size());
  std::vector<std::pair<Mor, Mor>> decomposition(free.size(), {-1, -1});
  for (Mor g = 0; g < m; ++g)
    for (Mor f : C.into[C.src(g)]) {
      if (C.is_identity(g) || C.is_identity(f)) continue;
      Mor gf = C.comp(g, f);
      int last = std::max({pos[g], pos[f], C.is_identity(gf) ? -1 : pos[gf]});
      checks[last].push_back({g, f, gf});
    }
  for (std::size_t i = 0; i < free.size(); ++i)
    for (Mor g = 0; g < m && decomposition[i].first < 0; ++g)
      for (Mor f : C.into[C.src(g)]) {
        if (C.is_identity(g) || C.is_identity(f) || g == free[i] || f == free[i]) continue;
        if (C.comp(g, f) == free[i] && assigned_before(g, i) && assigned_before(f, i)) {
          decomposition[i] = {g, f};
          break;
        }
      }
  std::size_t count = 0;
  std::function<bool(std::size_t)> rec = [&](std::size_t i) -> bool {
    if (i == free.size()) {
      ++count;
      return visit(X);
    }
    Mor u = free[i];
    const int dom = sizes[C.dst(u)], cod = sizes[C.src(u)];
    auto ok = [&]() {
      for (const auto& [g, f, gf] : checks[i])
        for (int x = 0; x < sizes[C.dst(g)]; ++x)
          if (X.act[gf][x] != X.act[f][X.act[g][x]]) return false;
      return true;
    };
    if (decomposition[i].first >= 0) {
      auto [g, f] = decomposition[i];
      X.act[u].assign(dom, 0);
      for (int x = 0; x < dom; ++x) X.act[u][x] = X.act[f][X.act[g][x]];
      return !ok() || rec(i + 1);
    }
    double space = std::pow(static_cast<double>(cod), dom);
    guard_size(static_cast<std::size_t>(space), "restriction function enumeration");
    const std::size_t total = static_cast<std::size_t>(space + 0.5);
    std::vector<std::size_t> codes(total);
    std::iota(codes.begin(), codes.end(), 0);
    if (rng) std::shuffle(codes.begin(), codes.end(), *rng);
    X.act[u].assign(dom, 0);
    for (std::size_t code : codes) {
      std::size_t v = code;
      for (int x = dom - 1; x >= 0; --x) {
        X.act[u][x] = static_cast<int>(v % cod);
        v /= cod;
      }
      if (ok() && !rec(i + 1)) return false;
    }
    return true;
  };
  rec(0);
  return count;
}

std::vector<Presheaf> enumerate_presheaves(const FiniteCategory& C, int max_size) {
  const int n = C.num_objects();
  std::vector<Presheaf> out;
  std::vector<int> sizes(n, 0);
  while (true) {
    for_each_presheaf(C, sizes, [&](const Presheaf& X) {
      guard_size(out.size() + 1, "presheaf enumeration");
      out.push_back(X);
      return true;
    });
    int i = n - 1;
    while (i >= 0 && sizes[i] == max_size) sizes[i--] = 0;
    if (i < 0) break;
    ++sizes[i];
  }
  return out;
}

std::optional<Presheaf> random_presheaf_with_sizes(const FiniteCategory& C, const std::vector<int>& sizes,
                                                   std::mt19937_64& rng) {
  std::optional<Presheaf> out;
  for_each_presheaf(
      C, sizes,
      [&](const Presheaf& X) {
        out = X;
        return false;
      },
      &rng);
  return out;
}

Presheaf random_presheaf(const FiniteCategory& C, int max_size, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> pick(0, max_size);
  for (int attempt = 0; attempt < 64; ++attempt) {
    std::vector<int> sizes(C.num_objects());
    for (int& s : sizes) s = pick(rng);
    if (auto X = random_presheaf_with_sizes(C, sizes, rng)) return *X;
  }
  return initial_presheaf(C);
}

Elements category_of_elements(const FiniteCategory& C, const Presheaf& Y) {
  Elements E;
  RawCategory raw;
  E.object_of.assign(C.num_objects(), {});
  for (Ob c = 0; c < C.num_objects(); ++c)
    for (int y = 0; y < Y.size[c]; ++y) {
      E.object_of[c].push_back(static_cast<int>(E.objects.size()));
      E.objects.emplace_back(c, y);
    }
  FiniteCategory& D = E.cat;
  for (const auto& [c, y] : E.objects) D.object_names.push_back(C.object_names[c] + "#" + std::to_string(y));
  const int k = static_cast<int>(E.objects.size());
  D.identity.assign(k, -1);
  std::vector<int> lookup;  // [u * |objects| + target]
  lookup.assign(static_cast<std::size_t>(C.num_morphisms()) * k, -1);
  for (Mor u = 0; u < C.num_morphisms(); ++u)
    for (int y = 0; y < Y.size[C.dst(u)]; ++y) {
      int t = E.object_of[C.dst(u)][y];
      int s = E.object_of[C.src(u)][Y.act[u][y]];
      lookup[static_cast<std::size_t>(u) * k + t] = D.num_morphisms();
      if (C.is_identity(u)) D.identity[t] = D.num_morphisms();
      D.morphism_names.push_back(C.morphism_names[u] + "#" + std::to_string(y));
      D.source.push_back(s);
      D.target.push_back(t);
    }
  std::vector<Mor> base_of;
  for (Mor u = 0; u < C.num_morphisms(); ++u)
    for (int y = 0; y < Y.size[C.dst(u)]; ++y) base_of.push_back(u);
  const int n = D.num_morphisms();
  D.table.assign(static_cast<std::size_t>(n) * n, -1);
  for (int a2 = 0; a2 < n; ++a2)
    for (int a1 = 0; a1 < n; ++a1)
      if (D.target[a1] == D.source[a2])
        D.table[a2 * n + a1] = lookup[static_cast<std::size_t>(C.comp(base_of[a2], base_of[a1])) * k + D.target[a2]];
  D.finalize();
  return E;
}

Family family_from_elements(const FiniteCategory& C, const Elements& E, const Presheaf& Y, const Presheaf& P) {
  const int n = C.num_objects();
  Family f;
  f.base = Y;
  f.total.size.assign(n, 0);
  f.proj.at.assign(n, {});
  std::vector<std::vector<int>> offset(n);
  for (Ob c = 0; c < n; ++c)
    for (int y = 0; y < Y.size[c]; ++y) {
      offset[c].push_back(f.total.size[c]);
      int k = P.size[E.object_of[c][y]];
      f.total.size[c] += k;
      for (int i = 0; i < k; ++i) f.proj.at[c].push_back(y);
    }
  f.total.act.assign(C.num_morphisms(), {});
  int a = 0;
  for (Mor u = 0; u < C.num_morphisms(); ++u)
    for (int y = 0; y < Y.size[C.dst(u)]; ++y, ++a) {
      int y2 = Y.act[u][y];
      for (int v : P.act[a]) f.total.act[u].push_back(offset[C.src(u)][y2] + v);
    }
  return f;
}

Presheaf elements_from_family(const FiniteCategory& C, const Elements& E, const Family& f) {
  const int n = C.num_objects();
  Presheaf P;
  P.size.assign(E.objects.size(), 0);
  auto pos = fiber_positions(f);
  std::vector<std::vector<std::vector<int>>> fib(n);
  for (Ob c = 0; c < n; ++c) {
    fib[c].assign(f.base.size[c], {});
    for (int x = 0; x < f.total.size[c]; ++x) fib[c][f.proj.at[c][x]].push_back(x);
    for (int y = 0; y < f.base.size[c]; ++y) P.size[E.object_of[c][y]] = static_cast<int>(fib[c][y].size());
  }
  P.act.assign(E.cat.num_morphisms(), {});
  int a = 0;
  for (Mor u = 0; u < C.num_morphisms(); ++u)
    for (int y = 0; y < f.base.size[C.dst(u)]; ++y, ++a)
      for (int x : fib[C.dst(u)][y]) P.act[a].push_back(pos[C.src(u)][f.total.act[u][x]]);
  return P;
}

Family random_family(const FiniteCategory& C, const Presheaf& base, int bound, std::mt19937_64& rng) {
  Elements E = category_of_elements(C, base);
  Presheaf P = random_presheaf(E.cat, std::max(0, bound - 1), rng);
  return family_from_elements(C, E, base, P);
}

Subobject random_subobject(const FiniteCategory& C, const Presheaf& X, std::mt19937_64& rng) {
  std::vector<std::vector<char>> member(C.num_objects());
  std::bernoulli_distribution coin(0.4);
  for (Ob c = 0; c < C.num_objects(); ++c) {
    member[c].assign(X.size[c], 0);
    for (int x = 0; x < X.size[c]; ++x) member[c][x] = coin(rng) ? 1 : 0;
  }
  for (Ob c = 0; c < C.num_objects(); ++c)
    for (int x = 0; x < X.size[c]; ++x)
      if (member[c][x])
        for (Mor u : C.into[c]) member[C.src(u)][X.act[u][x]] = 1;
  return subobject_from_membership(C, X, member);
}

std::vector<std::vector<int>> random_fiber_alignment(const Family& f, std::mt19937_64& rng) {
  std::vector<std::vector<int>> out(f.total.size.size());
  for (std::size_t c = 0; c < out.size(); ++c) {
    out[c].assign(f.total.size[c], 0);
    std::vector<std::vector<int>> fib(f.base.size[c]);
    for (int x = 0; x < f.total.size[c]; ++x) fib[f.proj.at[c][x]].push_back(x);
    for (auto& F : fib) {
      std::vector<int> perm(F.size());
      std::iota(perm.begin(), perm.end(), 0);
      std::shuffle(perm.begin(), perm.end(), rng);
      for (std::size_t i = 0; i < F.size(); ++i) out[c][F[i]] = perm[i];
    }
  }
  return out;
}

}  // namespace tf
