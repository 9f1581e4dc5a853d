#include "toposforge/universe.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <tuple>

#include "toposforge/errors.hpp"

namespace tf {

SetRealignment realign_set(int N, const std::vector<int>& f, int nB, const std::vector<int>& m,
                           const std::vector<int>& partial_code, const std::vector<int>& partial_position) {
  std::vector<std::vector<int>> fib(nB);
  for (std::size_t q = 0; q < f.size(); ++q) fib[f[q]].push_back(static_cast<int>(q));
  std::vector<int> preimage(nB, -1);
  for (std::size_t a = 0; a < m.size(); ++a) {
    if (preimage[m[a]] >= 0) throw InputError("realignment along a non-injective map");
    preimage[m[a]] = static_cast<int>(a);
  }
  SetRealignment out;
  out.code.assign(nB, 0);
  out.position.assign(f.size(), -1);
  for (int b = 0; b < nB; ++b) {
    const int k = static_cast<int>(fib[b].size());
    if (k >= N) throw BoundOverflow("fiber of size " + std::to_string(k), k + 1);
    int a = preimage[b];
    if (a < 0) {
      out.code[b] = k;
      for (int i = 0; i < k; ++i) out.position[fib[b][i]] = i;
      continue;
    }
    if (partial_code[a] != k) throw InputError("partial classifier is not cartesian over element " + std::to_string(b));
    out.code[b] = partial_code[a];
    std::vector<char> seen(k, 0);
    for (int q : fib[b]) {
      int p = partial_position[q];
      if (p < 0 || p >= k || seen[p]) throw InputError("partial positions are not a bijection over " + std::to_string(b));
      seen[p] = 1;
      out.position[q] = p;
    }
  }
  return out;
}

bool operator<(const Code& a, const Code& b) {
  return std::tie(a.base, a.p.size, a.p.act) < std::tie(b.base, b.p.size, b.p.act);
}

HsUniverse hs_universe(const FiniteCategory& C, int N) {
  if (N < 1) throw InputError("universe bound must be at least 1");
  HsUniverse U;
  U.C = C;
  U.N = N;
  for (Ob c = 0; c < C.num_objects(); ++c) U.slices.push_back(slice_category(C, c));
  return U;
}

std::optional<std::string> HsUniverse::check_code(const Code& code) const {
  if (code.base < 0 || code.base >= C.num_objects()) return "code over an unknown object";
  const Slice& S = slices[code.base];
  if (code.p.size.size() != S.objects.size() || static_cast<int>(code.p.act.size()) != S.cat.num_morphisms())
    return "code does not match the slice over " + C.object_names[code.base];
  for (int s : code.p.size)
    if (s < 0 || s >= N) return "code carrier of size " + std::to_string(s) + " exceeds bound " + std::to_string(N);
  return check_presheaf(S.cat, code.p);
}

Code HsUniverse::restrict(const Code& code, Mor u) const {
  if (C.dst(u) != code.base) throw InputError("restriction along a morphism with the wrong codomain");
  const Slice& S = slices[code.base];
  const Slice& T = slices[C.src(u)];
  Code out;
  out.base = C.src(u);
  out.p.size.resize(T.objects.size());
  for (std::size_t k = 0; k < T.objects.size(); ++k)
    out.p.size[k] = code.p.size[S.object_of[C.comp(u, T.objects[k])]];
  out.p.act.resize(T.cat.num_morphisms());
  for (int a = 0; a < T.cat.num_morphisms(); ++a) {
    int k = S.object_of[C.comp(u, T.objects[T.arrow_target[a]])];
    out.p.act[a] = code.p.act[S.arrow(T.arrow_base[a], k)];
  }
  return out;
}

int HsUniverse::el_size(const Code& code) const { return code.p.size[slices[code.base].identity_object]; }

int HsUniverse::el_restrict(const Code& code, Mor u, int e) const {
  const Slice& S = slices[code.base];
  return code.p.act[S.arrow(u, S.identity_object)][e];
}

Code HsUniverse::constant_code(Ob c, int k) const {
  if (k >= N) throw BoundOverflow("constant code " + std::to_string(k), k + 1);
  return Code{c, constant_presheaf(slices[c].cat, k)};
}

std::vector<Code> HsUniverse::materialize(Ob c) const {
  const Slice& S = slices[c];
  const int k = static_cast<int>(S.objects.size());
  std::vector<Code> out;
  std::vector<int> sizes(k, 0);
  while (true) {
    for_each_presheaf(S.cat, sizes, [&](const Presheaf& p) {
      out.push_back(Code{c, p});
      guard_size(out.size(), "codes over " + C.object_names[c]);
      return true;
    });
    int i = k - 1;
    while (i >= 0 && sizes[i] == N - 1) sizes[i--] = 0;
    if (i < 0) break;
    ++sizes[i];
  }
  return out;
}

int el_fiber(const HsUniverse& U, const Code& code) { return U.el_size(code); }

namespace {

std::vector<std::vector<std::vector<int>>> fibers_of(const Family& f) {
  std::vector<std::vector<std::vector<int>>> fib(f.base.size.size());
  for (std::size_t c = 0; c < fib.size(); ++c) {
    fib[c].assign(f.base.size[c], {});
    for (int x = 0; x < f.total.size[c]; ++x) fib[c][f.proj.at[c][x]].push_back(x);
  }
  return fib;
}

}  // namespace

Classification classify_aligned(const HsUniverse& U, const Family& f, const std::vector<std::vector<int>>& beta) {
  const FiniteCategory& C = U.C;
  const int n = C.num_objects();
  auto fib = fibers_of(f);
  // inv[c][y][i] = the element of the fiber over y placed at i
  std::vector<std::vector<std::vector<int>>> inv(n);
  for (Ob c = 0; c < n; ++c) {
    inv[c].resize(f.base.size[c]);
    for (int y = 0; y < f.base.size[c]; ++y) {
      const int k = static_cast<int>(fib[c][y].size());
      if (k >= U.N)
        throw BoundOverflow("fiber of size " + std::to_string(k) + " over element " + std::to_string(y) + " of " +
                                C.object_names[c],
                            k + 1);
      inv[c][y].assign(k, -1);
      for (int x : fib[c][y]) {
        int p = beta[c][x];
        if (p < 0 || p >= k || inv[c][y][p] >= 0) throw InputError("alignment is not a bijection on a fiber");
        inv[c][y][p] = x;
      }
    }
  }
  Classification out;
  out.elem = beta;
  out.code.resize(n);
  for (Ob c = 0; c < n; ++c) {
    const Slice& S = U.slices[c];
    for (int y = 0; y < f.base.size[c]; ++y) {
      Code code;
      code.base = c;
      code.p.size.resize(S.objects.size());
      for (std::size_t k = 0; k < S.objects.size(); ++k) {
        Mor w = S.objects[k];
        code.p.size[k] = static_cast<int>(inv[C.src(w)][f.base.act[w][y]].size());
      }
      code.p.act.resize(S.cat.num_morphisms());
      for (int a = 0; a < S.cat.num_morphisms(); ++a) {
        Mor v = S.arrow_base[a];
        Mor w = S.objects[S.arrow_target[a]];
        const auto& here = inv[C.src(w)][f.base.act[w][y]];
        for (int x : here) code.p.act[a].push_back(beta[C.src(v)][f.total.act[v][x]]);
      }
      out.code[c].push_back(std::move(code));
    }
  }
  return out;
}

Classification classify_family(const HsUniverse& U, const Family& f) {
  return classify_aligned(U, f, fiber_positions(f));
}

std::optional<std::string> check_classification(const HsUniverse& U, const Family& f, const Classification& k) {
  const FiniteCategory& C = U.C;
  const int n = C.num_objects();
  if (static_cast<int>(k.code.size()) != n || static_cast<int>(k.elem.size()) != n) return "classification shape";
  for (Ob c = 0; c < n; ++c) {
    if (static_cast<int>(k.code[c].size()) != f.base.size[c] || static_cast<int>(k.elem[c].size()) != f.total.size[c])
      return "classification shape at " + C.object_names[c];
    for (const Code& code : k.code[c]) {
      if (code.base != c) return "code over the wrong object at " + C.object_names[c];
      if (auto e = U.check_code(code)) return *e;
    }
  }
  for (Mor u = 0; u < C.num_morphisms(); ++u) {
    Ob c = C.dst(u), d = C.src(u);
    for (int y = 0; y < f.base.size[c]; ++y)
      if (!(U.restrict(k.code[c][y], u) == k.code[d][f.base.act[u][y]]))
        return "codes are not natural along " + C.morphism_names[u] + " at element " + std::to_string(y);
    for (int x = 0; x < f.total.size[c]; ++x)
      if (k.elem[d][f.total.act[u][x]] != U.el_restrict(k.code[c][f.proj.at[c][x]], u, k.elem[c][x]))
        return "top map is not natural along " + C.morphism_names[u] + " at element " + std::to_string(x);
  }
  auto fib = fibers_of(f);
  for (Ob c = 0; c < n; ++c)
    for (int y = 0; y < f.base.size[c]; ++y) {
      const int s = U.el_size(k.code[c][y]);
      if (s != static_cast<int>(fib[c][y].size()))
        return "fiber over " + std::to_string(y) + " at " + C.object_names[c] + " has " +
               std::to_string(fib[c][y].size()) + " elements but the code has " + std::to_string(s);
      std::vector<char> seen(s, 0);
      for (int x : fib[c][y]) {
        int p = k.elem[c][x];
        if (p < 0 || p >= s || seen[p]) return "top map is not a bijection on the fiber over " + std::to_string(y);
        seen[p] = 1;
      }
    }
  return std::nullopt;
}

Family el_pullback(const HsUniverse& U, const Presheaf& Y, const std::vector<std::vector<Code>>& codes) {
  const FiniteCategory& C = U.C;
  const int n = C.num_objects();
  Family f;
  f.base = Y;
  f.total.size.assign(n, 0);
  f.proj.at.assign(n, {});
  std::vector<std::vector<int>> offset(n);
  for (Ob c = 0; c < n; ++c)
    for (int y = 0; y < Y.size[c]; ++y) {
      offset[c].push_back(f.total.size[c]);
      int s = U.el_size(codes[c][y]);
      f.total.size[c] += s;
      for (int e = 0; e < s; ++e) f.proj.at[c].push_back(y);
    }
  f.total.act.assign(C.num_morphisms(), {});
  for (Mor u = 0; u < C.num_morphisms(); ++u) {
    Ob c = C.dst(u), d = C.src(u);
    for (int y = 0; y < Y.size[c]; ++y)
      for (int e = 0; e < U.el_size(codes[c][y]); ++e)
        f.total.act[u].push_back(offset[d][Y.act[u][y]] + U.el_restrict(codes[c][y], u, e));
  }
  return f;
}

PshMap classification_witness(const HsUniverse& U, const Family& f, const Classification& k) {
  const int n = U.C.num_objects();
  PshMap w;
  w.at.assign(n, {});
  for (Ob c = 0; c < n; ++c) {
    std::vector<int> offset;
    int acc = 0;
    for (int y = 0; y < f.base.size[c]; ++y) {
      offset.push_back(acc);
      acc += U.el_size(k.code[c][y]);
    }
    for (int x = 0; x < f.total.size[c]; ++x) w.at[c].push_back(offset[f.proj.at[c][x]] + k.elem[c][x]);
  }
  return w;
}

Classification restrict_classification(const FiniteCategory& C, const Family& f, const Presheaf& A, const PshMap& m,
                                       const Classification& k) {
  PulledBack pb = pull_back(C, f, A, m);
  Classification out;
  const int n = C.num_objects();
  out.code.assign(n, {});
  out.elem.assign(n, {});
  for (Ob c = 0; c < n; ++c) {
    for (int a = 0; a < A.size[c]; ++a) out.code[c].push_back(k.code[c][m.at[c][a]]);
    for (int p = 0; p < pb.family.total.size[c]; ++p) out.elem[c].push_back(k.elem[c][pb.top.at[c][p]]);
  }
  return out;
}

std::optional<std::string> check_problem(const HsUniverse& U, const RealignmentProblem& P) {
  const FiniteCategory& C = U.C;
  if (auto e = check_family(C, P.f)) return "family: " + *e;
  if (auto e = check_presheaf(C, P.A)) return "subobject: " + *e;
  if (auto e = check_map(C, P.A, P.f.base, P.m)) return "mono: " + *e;
  if (!is_mono(P.m, P.f.base)) return "the map along which to realign is not a monomorphism";
  int big = max_fiber(P.f);
  if (big >= U.N) return "family has a fiber of size " + std::to_string(big) + ", bound is " + std::to_string(U.N);
  PulledBack pb = pull_back(C, P.f, P.A, P.m);
  if (auto e = check_classification(U, pb.family, P.partial)) return "partial classifier: " + *e;
  return std::nullopt;
}

Classification realign_presheaf(const HsUniverse& U, const RealignmentProblem& P) {
  if (auto e = check_problem(U, P)) throw InputError("realignment problem: " + *e);
  const FiniteCategory& C = U.C;
  const int n = C.num_objects();
  PulledBack pb = pull_back(C, P.f, P.A, P.m);
  std::vector<std::vector<int>> beta(n);
  for (Ob c = 0; c < n; ++c) {
    std::vector<int> partial_code;
    for (int a = 0; a < P.A.size[c]; ++a) partial_code.push_back(U.el_size(P.partial.code[c][a]));
    std::vector<int> partial_position(P.f.total.size[c], -1);
    for (int p = 0; p < pb.family.total.size[c]; ++p) partial_position[pb.top.at[c][p]] = P.partial.elem[c][p];
    beta[c] = realign_set(U.N, P.f.proj.at[c], P.f.base.size[c], P.m.at[c], partial_code, partial_position).position;
  }
  Classification out = classify_aligned(U, P.f, beta);
  std::string bad = boundary_mismatch(U, P, out);
  if (!bad.empty()) throw LawViolation("realignment lost its boundary: " + bad);
  return out;
}

std::string boundary_mismatch(const HsUniverse& U, const RealignmentProblem& P, const Classification& k) {
  const FiniteCategory& C = U.C;
  Classification r = restrict_classification(C, P.f, P.A, P.m, k);
  for (Ob c = 0; c < C.num_objects(); ++c) {
    for (int a = 0; a < P.A.size[c]; ++a)
      if (!(r.code[c][a] == P.partial.code[c][a]))
        return "code differs over element " + std::to_string(a) + " of the subobject at " + C.object_names[c];
    if (r.elem[c] != P.partial.elem[c]) return "top map differs over the subobject at " + C.object_names[c];
  }
  return "";
}

RealignmentProblem random_problem(const HsUniverse& U, int max_size, std::mt19937_64& rng) {
  const FiniteCategory& C = U.C;
  RealignmentProblem P;
  Presheaf B = random_presheaf(C, max_size, rng);
  P.f = random_family(C, B, U.N, rng);
  Subobject S = random_subobject(C, B, rng);
  P.A = S.sub;
  P.m = S.incl;
  PulledBack pb = pull_back(C, P.f, P.A, P.m);
  P.partial = classify_aligned(U, pb.family, random_fiber_alignment(pb.family, rng));
  return P;
}

// ---------------------------------------------------------------------------
// Σ and Π

bool operator<(const CodePair& x, const CodePair& y) {
  if (x.a < y.a) return true;
  if (y.a < x.a) return false;
  return x.b < y.b;
}

std::optional<std::string> check_code_pair(const HsUniverse& U, const CodePair& P) {
  if (auto e = U.check_code(P.a)) return "a: " + *e;
  const Slice& S = U.slices[P.a.base];
  if (P.b.size() != S.objects.size()) return "b does not match the slice";
  for (std::size_t k = 0; k < S.objects.size(); ++k) {
    if (static_cast<int>(P.b[k].size()) != P.a.p.size[k]) return "b does not match a at a slice object";
    for (const Code& code : P.b[k]) {
      if (code.base != U.C.src(S.objects[k])) return "b code over the wrong object";
      if (auto e = U.check_code(code)) return "b: " + *e;
    }
  }
  for (int a0 = 0; a0 < S.cat.num_morphisms(); ++a0) {
    int k = S.arrow_target[a0], k2 = S.cat.src(a0);
    for (int e = 0; e < P.a.p.size[k]; ++e)
      if (!(P.b[k2][P.a.p.act[a0][e]] == U.restrict(P.b[k][e], S.arrow_base[a0])))
        return "b is not natural along slice arrow " + S.cat.morphism_names[a0];
  }
  return std::nullopt;
}

CodePair restrict_pair(const HsUniverse& U, const CodePair& P, Mor u) {
  const FiniteCategory& C = U.C;
  const Slice& S = U.slices[P.a.base];
  const Slice& T = U.slices[C.src(u)];
  CodePair out;
  out.a = U.restrict(P.a, u);
  for (Mor w : T.objects) out.b.push_back(P.b[S.object_of[C.comp(u, w)]]);
  return out;
}

Code sigma_code(const HsUniverse& U, const CodePair& P) {
  const Slice& S = U.slices[P.a.base];
  const int K = static_cast<int>(S.objects.size());
  std::vector<std::vector<int>> offset(K);
  Code out;
  out.base = P.a.base;
  out.p.size.assign(K, 0);
  int biggest = 0;
  for (int k = 0; k < K; ++k) {
    for (const Code& b : P.b[k]) {
      offset[k].push_back(out.p.size[k]);
      out.p.size[k] += U.el_size(b);
    }
    biggest = std::max(biggest, out.p.size[k]);
  }
  if (biggest >= U.N) throw BoundOverflow("Σ code of size " + std::to_string(biggest), biggest + 1);
  out.p.act.resize(S.cat.num_morphisms());
  for (int a0 = 0; a0 < S.cat.num_morphisms(); ++a0) {
    int k = S.arrow_target[a0], k2 = S.cat.src(a0);
    Mor w0 = S.arrow_base[a0];
    for (int e = 0; e < P.a.p.size[k]; ++e)
      for (int e2 = 0; e2 < U.el_size(P.b[k][e]); ++e2)
        out.p.act[a0].push_back(offset[k2][P.a.p.act[a0][e]] + U.el_restrict(P.b[k][e], w0, e2));
  }
  return out;
}

namespace {

// Sections of Π at slice object k of C/c, indexed by (v into dom k, e in a(k∘v)).
struct PiFiber {
  std::vector<std::pair<Mor, int>> index;
  std::vector<int> first;  // first[v] = position of (v, 0), -1 when v does not end at dom k
  std::vector<std::vector<int>> sections;
};

PiFiber pi_fiber(const HsUniverse& U, const CodePair& P, int k) {
  const FiniteCategory& C = U.C;
  const Slice& S = U.slices[P.a.base];
  Mor w = S.objects[k];
  Ob d = C.src(w);
  PiFiber F;
  F.first.assign(C.num_morphisms(), -1);
  std::vector<int> kv_of;
  for (Mor v : C.into[d]) {
    int kv = S.object_of[C.comp(w, v)];
    F.first[v] = static_cast<int>(F.index.size());
    for (int e = 0; e < P.a.p.size[kv]; ++e) {
      F.index.emplace_back(v, e);
      kv_of.push_back(kv);
    }
  }
  const int n = static_cast<int>(F.index.size());
  // s[q] = El(b)(v2)(s[p]) whenever index q = (v∘v2, a(v2) e_p)
  struct Link {
    int p, q;
    Mor v2;
  };
  std::vector<std::vector<Link>> at(n);
  for (int p = 0; p < n; ++p) {
    auto [v, e] = F.index[p];
    int kv = kv_of[p];
    for (Mor v2 : C.into[C.src(v)]) {
      int e2 = P.a.p.act[S.arrow(v2, kv)][e];
      int q = F.first[C.comp(v, v2)] + e2;
      at[std::max(p, q)].push_back({p, q, v2});
    }
  }
  std::vector<int> s(n, 0);
  std::function<void(int)> rec = [&](int j) {
    if (j == n) {
      F.sections.push_back(s);
      guard_size(F.sections.size(), "Π sections");
      return;
    }
    const Code& bj = P.b[kv_of[j]][F.index[j].second];
    for (int val = 0; val < U.el_size(bj); ++val) {
      s[j] = val;
      bool ok = true;
      for (const Link& L : at[j]) {
        const Code& bp = P.b[kv_of[L.p]][F.index[L.p].second];
        if (s[L.q] != U.el_restrict(bp, L.v2, s[L.p])) {
          ok = false;
          break;
        }
      }
      if (ok) rec(j + 1);
    }
  };
  rec(0);
  return F;
}

// The section of Π at k2 = k∘w0 obtained by restricting s along w0.
std::vector<int> restrict_section(const HsUniverse& U, const PiFiber& from, const PiFiber& to, Mor w0,
                                  const std::vector<int>& s) {
  std::vector<int> out;
  out.reserve(to.index.size());
  for (const auto& [v, e] : to.index) out.push_back(s[from.first[U.C.comp(w0, v)] + e]);
  return out;
}

int section_index(const PiFiber& F, const std::vector<int>& s) {
  auto it = std::lower_bound(F.sections.begin(), F.sections.end(), s);
  if (it == F.sections.end() || *it != s) throw LawViolation("restricted section is not a section");
  return static_cast<int>(it - F.sections.begin());
}

// Π code whose fiber at slice object k is ordered by place(k, lexicographic index).
Code assemble_pi(const HsUniverse& U, const CodePair& P, const std::vector<PiFiber>& F,
                 const std::function<int(int, int)>& place) {
  const Slice& S = U.slices[P.a.base];
  const int K = static_cast<int>(S.objects.size());
  Code out;
  out.base = P.a.base;
  out.p.size.assign(K, 0);
  std::vector<std::vector<int>> from_place(K);
  for (int k = 0; k < K; ++k) {
    const int n = static_cast<int>(F[k].sections.size());
    out.p.size[k] = n;
    from_place[k].assign(n, -1);
    for (int i = 0; i < n; ++i) from_place[k][place(k, i)] = i;
  }
  out.p.act.resize(S.cat.num_morphisms());
  for (int a0 = 0; a0 < S.cat.num_morphisms(); ++a0) {
    int k = S.arrow_target[a0], k2 = S.cat.src(a0);
    for (int pl = 0; pl < out.p.size[k]; ++pl) {
      const auto& s = F[k].sections[from_place[k][pl]];
      int i2 = section_index(F[k2], restrict_section(U, F[k], F[k2], S.arrow_base[a0], s));
      out.p.act[a0].push_back(place(k2, i2));
    }
  }
  return out;
}

std::vector<PiFiber> pi_fibers(const HsUniverse& U, const CodePair& P) {
  const int K = static_cast<int>(U.slices[P.a.base].objects.size());
  std::vector<PiFiber> F;
  int biggest = 0;
  for (int k = 0; k < K; ++k) {
    F.push_back(pi_fiber(U, P, k));
    biggest = std::max(biggest, static_cast<int>(F.back().sections.size()));
  }
  if (biggest >= U.N) throw BoundOverflow("Π code of size " + std::to_string(biggest), biggest + 1);
  return F;
}

}  // namespace

Code pi_code(const HsUniverse& U, const CodePair& P) {
  auto F = pi_fibers(U, P);
  return assemble_pi(U, P, F, [](int, int i) { return i; });
}

std::vector<std::vector<int>> pi_sections(const HsUniverse& U, const CodePair& P) {
  return pi_fiber(U, P, U.slices[P.a.base].identity_object).sections;
}

Code ordered_pi(const HsUniverse& U, const CodePair& P, SectionOrder order) {
  auto F = pi_fibers(U, P);
  return assemble_pi(U, P, F, [&](int k, int i) {
    int n = static_cast<int>(F[k].sections.size());
    return order == SectionOrder::Lexicographic ? i : n - 1 - i;
  });
}

Code strictified_pi(const HsUniverse& small, const HsUniverse& large, const CodePair& P, SectionOrder order) {
  if (!(small.C == large.C) || large.N <= small.N) throw InputError("hierarchy levels must share a base and grow");
  auto F = pi_fibers(large, P);
  const Slice& S = large.slices[P.a.base];
  // A restriction of P that is a level-N datum with a level-N Π keeps the level-N order.
  std::vector<char> inner;
  for (Mor z : S.objects) {
    CodePair R = restrict_pair(large, P, z);
    bool fits = pair_fits(R, small.N);
    if (fits) {
      const int K = static_cast<int>(small.slices[R.a.base].objects.size());
      for (int k = 0; k < K && fits; ++k) fits = static_cast<int>(pi_fiber(small, R, k).sections.size()) < small.N;
    }
    inner.push_back(fits);
  }
  return assemble_pi(large, P, F, [&](int k, int i) {
    int n = static_cast<int>(F[k].sections.size());
    if (inner[k] || order == SectionOrder::Lexicographic) return i;
    return n - 1 - i;
  });
}

CodePair pair_at(const HsUniverse& U, const Presheaf& G, const std::vector<std::vector<Code>>& a,
                 const std::vector<std::vector<Code>>& b, Ob c, int g) {
  const FiniteCategory& C = U.C;
  const Slice& S = U.slices[c];
  CodePair P;
  P.a = a[c][g];
  for (Mor w : S.objects) {
    Ob d = C.src(w);
    int gw = G.act[w][g];
    int offset = 0;
    for (int h = 0; h < gw; ++h) offset += U.el_size(a[d][h]);
    std::vector<Code> row;
    for (int e = 0; e < U.el_size(a[d][gw]); ++e) row.push_back(b[d][offset + e]);
    P.b.push_back(std::move(row));
  }
  return P;
}

std::vector<std::vector<Code>> code_sigma(const HsUniverse& U, const Presheaf& G,
                                          const std::vector<std::vector<Code>>& a,
                                          const std::vector<std::vector<Code>>& b) {
  std::vector<std::vector<Code>> out(U.C.num_objects());
  for (Ob c = 0; c < U.C.num_objects(); ++c)
    for (int g = 0; g < G.size[c]; ++g) out[c].push_back(sigma_code(U, pair_at(U, G, a, b, c, g)));
  return out;
}

std::vector<std::vector<Code>> code_pi(const HsUniverse& U, const Presheaf& G, const std::vector<std::vector<Code>>& a,
                                       const std::vector<std::vector<Code>>& b) {
  std::vector<std::vector<Code>> out(U.C.num_objects());
  for (Ob c = 0; c < U.C.num_objects(); ++c)
    for (int g = 0; g < G.size[c]; ++g) out[c].push_back(pi_code(U, pair_at(U, G, a, b, c, g)));
  return out;
}

}  // namespace tf
