#include <algorithm>
#include <functional>
#include <map>

#include "toposforge/errors.hpp"
#include "toposforge/universe.hpp"

namespace tf {

Code hierarchy_include(const HsUniverse& small, const HsUniverse& large, const Code& code) {
  if (!(small.C == large.C)) throw InputError("hierarchy levels over different categories");
  if (large.N <= small.N)
    throw InputError("hierarchy inclusion needs a larger bound: " + std::to_string(small.N) + " into " +
                     std::to_string(large.N));
  if (auto e = small.check_code(code)) throw InputError("not a level-" + std::to_string(small.N) + " code: " + *e);
  return code;
}

bool pair_fits(const CodePair& P, int N) {
  auto fits = [N](const Code& c) { return std::all_of(c.p.size.begin(), c.p.size.end(), [N](int s) { return s < N; }); };
  if (!fits(P.a)) return false;
  for (const auto& row : P.b)
    for (const Code& b : row)
      if (!fits(b)) return false;
  return true;
}

std::vector<CodePair> enumerate_code_pairs(const HsUniverse& U, Ob c) {
  const FiniteCategory& C = U.C;
  const Slice& S = U.slices[c];
  const int K = static_cast<int>(S.objects.size());
  std::vector<std::vector<Code>> ty(C.num_objects());
  for (Ob d = 0; d < C.num_objects(); ++d) ty[d] = U.materialize(d);
  std::vector<CodePair> out;
  for (const Code& A : U.materialize(c)) {
    std::vector<std::pair<int, int>> slots;
    std::vector<std::vector<int>> slot_of(K);
    for (int k = 0; k < K; ++k)
      for (int e = 0; e < A.p.size[k]; ++e) {
        slot_of[k].push_back(static_cast<int>(slots.size()));
        slots.emplace_back(k, e);
      }
    struct Link {
      int from, to;
      Mor w0;
    };
    std::vector<std::vector<Link>> at(slots.size());
    for (int a0 = 0; a0 < S.cat.num_morphisms(); ++a0) {
      int k = S.arrow_target[a0], k2 = S.cat.src(a0);
      for (int e = 0; e < A.p.size[k]; ++e) {
        int from = slot_of[k][e], to = slot_of[k2][A.p.act[a0][e]];
        at[std::max(from, to)].push_back({from, to, S.arrow_base[a0]});
      }
    }
    CodePair P;
    P.a = A;
    P.b.assign(K, {});
    for (int k = 0; k < K; ++k) P.b[k].assign(A.p.size[k], Code{});
    std::function<void(std::size_t)> rec = [&](std::size_t j) {
      if (j == slots.size()) {
        out.push_back(P);
        guard_size(out.size(), "formation data");
        return;
      }
      auto [k, e] = slots[j];
      for (const Code& b : ty[C.src(S.objects[k])]) {
        P.b[k][e] = b;
        bool ok = true;
        for (const Link& L : at[j]) {
          auto [kf, ef] = slots[L.from];
          auto [kt, et] = slots[L.to];
          if (!(U.restrict(P.b[kf][ef], L.w0) == P.b[kt][et])) {
            ok = false;
            break;
          }
        }
        if (ok) rec(j + 1);
      }
    };
    rec(0);
  }
  return out;
}

std::size_t count_code_pairs(const HsUniverse& U, Ob c) {
  // Σ over codes A of |Hom(A, TY restricted to C/c)|, by generic map enumeration.
  const FiniteCategory& C = U.C;
  const Slice& S = U.slices[c];
  std::vector<std::vector<Code>> ty(C.num_objects());
  std::vector<std::map<Code, int>> index(C.num_objects());
  for (Ob d = 0; d < C.num_objects(); ++d) {
    ty[d] = U.materialize(d);
    for (std::size_t i = 0; i < ty[d].size(); ++i) index[d][ty[d][i]] = static_cast<int>(i);
  }
  Presheaf T;
  for (Mor w : S.objects) T.size.push_back(static_cast<int>(ty[C.src(w)].size()));
  T.act.resize(S.cat.num_morphisms());
  for (int a0 = 0; a0 < S.cat.num_morphisms(); ++a0) {
    Ob d = C.src(S.objects[S.cat.src(a0)]);
    for (const Code& b : ty[C.src(S.objects[S.arrow_target[a0]])])
      T.act[a0].push_back(index[d].at(U.restrict(b, S.arrow_base[a0])));
  }
  std::size_t total = 0;
  for (const Code& A : U.materialize(c)) total += for_each_map(S.cat, A.p, T, [](const PshMap&) { return true; });
  return total;
}

FormationData formation_data(const HsUniverse& U, SectionOrder order) {
  const FiniteCategory& C = U.C;
  const int n = C.num_objects();
  FormationData D;
  std::vector<std::map<CodePair, int>> index(n);
  D.data.size.assign(n, 0);
  for (Ob c = 0; c < n; ++c) {
    D.pairs.push_back({});
    for (CodePair& P : enumerate_code_pairs(U, c)) {
      try {
        pi_code(U, P);
      } catch (const BoundOverflow&) {
        continue;
      }
      D.pairs[c].push_back(std::move(P));
    }
    D.data.size[c] = static_cast<int>(D.pairs[c].size());
    for (std::size_t i = 0; i < D.pairs[c].size(); ++i) index[c][D.pairs[c][i]] = static_cast<int>(i);
  }
  D.data.act.assign(C.num_morphisms(), {});
  for (Mor u = 0; u < C.num_morphisms(); ++u)
    for (const CodePair& P : D.pairs[C.dst(u)]) D.data.act[u].push_back(index[C.src(u)].at(restrict_pair(U, P, u)));

  // sections at the identity, indexed by (v into c, e in a(v))
  std::vector<std::vector<std::vector<std::vector<int>>>> secs(n);
  std::vector<std::vector<int>> offset(n);
  Family& F = D.pi_family;
  F.base = D.data;
  F.total.size.assign(n, 0);
  F.proj.at.assign(n, {});
  for (Ob c = 0; c < n; ++c)
    for (std::size_t i = 0; i < D.pairs[c].size(); ++i) {
      auto s = pi_sections(U, D.pairs[c][i]);
      offset[c].push_back(F.total.size[c]);
      F.total.size[c] += static_cast<int>(s.size());
      for (std::size_t j = 0; j < s.size(); ++j) F.proj.at[c].push_back(static_cast<int>(i));
      secs[c].push_back(std::move(s));
    }
  auto place = [&](std::size_t n_sec, std::size_t i) {
    return order == SectionOrder::Lexicographic ? i : n_sec - 1 - i;
  };
  F.total.act.assign(C.num_morphisms(), {});
  for (Mor u = 0; u < C.num_morphisms(); ++u) {
    Ob c = C.dst(u), d = C.src(u);
    for (std::size_t i = 0; i < D.pairs[c].size(); ++i) {
      const CodePair& P = D.pairs[c][i];
      const Slice& S = U.slices[c];
      std::vector<int> first(C.num_morphisms(), -1);
      int acc = 0;
      for (Mor v : C.into[c]) {
        first[v] = acc;
        acc += P.a.p.size[S.object_of[v]];
      }
      int i2 = D.data.act[u][i];
      const CodePair& Q = D.pairs[d][i2];
      const auto& targets = secs[d][i2];
      const std::size_t n_here = secs[c][i].size();
      std::vector<int> out(n_here);
      for (std::size_t j = 0; j < n_here; ++j) {
        const auto& s = secs[c][i][j];
        std::vector<int> r;
        const Slice& T = U.slices[d];
        for (Mor v2 : C.into[d])
          for (int e = 0; e < Q.a.p.size[T.object_of[v2]]; ++e) r.push_back(s[first[C.comp(u, v2)] + e]);
        auto it = std::lower_bound(targets.begin(), targets.end(), r);
        if (it == targets.end() || *it != r) throw LawViolation("restricted section is not a section");
        std::size_t j2 = static_cast<std::size_t>(it - targets.begin());
        out[place(n_here, j)] = offset[d][i2] + static_cast<int>(place(targets.size(), j2));
      }
      F.total.act[u].insert(F.total.act[u].end(), out.begin(), out.end());
    }
  }
  return D;
}

}  // namespace tf
