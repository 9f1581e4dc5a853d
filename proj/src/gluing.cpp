#include "toposforge/gluing.hpp"

#include <map>
#include <set>

#include "toposforge/errors.hpp"

namespace tf {

namespace {

Mor bang(const GluingContext& g, Ob x) { return g.C.num_morphisms() + 1 + x; }

std::size_t hom_count(const FiniteCategory& C, const Presheaf& X, const Presheaf& Y) {
  return for_each_map(C, X, Y, [](const PshMap&) { return true; });
}

std::map<std::vector<int>, int> cone_index(const std::vector<std::vector<int>>& cones) {
  std::map<std::vector<int>, int> idx;
  for (std::size_t t = 0; t < cones.size(); ++t) idx[cones[t]] = static_cast<int>(t);
  return idx;
}

std::string describe(const std::vector<int>& v) {
  std::string s = "(";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s + ")";
}

}  // namespace

GluingContext build_gluing(const FiniteCategory& C) {
  GluingContext g;
  g.C = C;
  g.cone = adjoin_terminal(C);
  g.top = C.num_objects();
  g.J = j_shriek(g, terminal_presheaf(C));
  GluingLawReport r = check_gluing_laws(g, 8, 2, 0x5eed);
  if (!r.failures.empty()) throw LawViolation("gluing law: " + r.failures.front());
  return g;
}

Presheaf j_pull(const GluingContext& g, const Presheaf& E) {
  Presheaf X;
  X.size.assign(E.size.begin(), E.size.begin() + g.C.num_objects());
  X.act.assign(E.act.begin(), E.act.begin() + g.C.num_morphisms());
  return X;
}

PshMap j_pull(const GluingContext& g, const PshMap& h) {
  PshMap out;
  out.at.assign(h.at.begin(), h.at.begin() + g.C.num_objects());
  return out;
}

Family j_pull(const GluingContext& g, const Family& f) {
  return Family{j_pull(g, f.total), j_pull(g, f.base), j_pull(g, f.proj)};
}

Presheaf j_shriek(const GluingContext& g, const Presheaf& X) {
  Presheaf E = X;
  E.size.push_back(0);
  E.act.push_back({});
  for (Ob x = 0; x < g.C.num_objects(); ++x) E.act.push_back({});
  return E;
}

PshMap j_shriek(const GluingContext&, const PshMap& h) {
  PshMap out = h;
  out.at.push_back({});
  return out;
}

std::vector<std::vector<int>> cones_of(const FiniteCategory& C, const Presheaf& X) {
  std::vector<std::vector<int>> out;
  for_each_map(C, terminal_presheaf(C), X, [&](const PshMap& a) {
    std::vector<int> cone;
    for (const auto& row : a.at) cone.push_back(row[0]);
    out.push_back(std::move(cone));
    return true;
  });
  guard_size(out.size(), "cones");
  return out;
}

Presheaf j_push(const GluingContext& g, const Presheaf& X) {
  auto cones = cones_of(g.C, X);
  Presheaf E = X;
  const int k = static_cast<int>(cones.size());
  E.size.push_back(k);
  std::vector<int> id(k);
  for (int t = 0; t < k; ++t) id[t] = t;
  E.act.push_back(id);
  for (Ob x = 0; x < g.C.num_objects(); ++x) {
    std::vector<int> row;
    for (const auto& cone : cones) row.push_back(cone[x]);
    E.act.push_back(row);
  }
  return E;
}

PshMap j_push(const GluingContext& g, const Presheaf& X, const Presheaf& Y, const PshMap& h) {
  auto from = cones_of(g.C, X);
  auto to = cone_index(cones_of(g.C, Y));
  PshMap out = h;
  out.at.push_back({});
  for (const auto& cone : from) {
    std::vector<int> image;
    for (Ob c = 0; c < g.C.num_objects(); ++c) image.push_back(h.at[c][cone[c]]);
    out.at.back().push_back(to.at(image));
  }
  return out;
}

Family j_push(const GluingContext& g, const Family& f) {
  return Family{j_push(g, f.total), j_push(g, f.base), j_push(g, f.total, f.base, f.proj)};
}

PshMap open_unit(const GluingContext& g, const Presheaf& E) {
  auto idx = cone_index(cones_of(g.C, j_pull(g, E)));
  PshMap out = identity_map(j_pull(g, E));
  out.at.push_back({});
  for (int e = 0; e < E.size[g.top]; ++e) {
    std::vector<int> cone;
    for (Ob x = 0; x < g.C.num_objects(); ++x) cone.push_back(E.act[bang(g, x)][e]);
    out.at.back().push_back(idx.at(cone));
  }
  return out;
}

PshMap open_counit(const GluingContext& g, const Presheaf& E) { return j_shriek(g, identity_map(j_pull(g, E))); }

ClosedPart i_pull(const GluingContext& g, const Presheaf& E) {
  Presheaf open = j_shriek(g, j_pull(g, E));
  PshMap to_J;
  for (Ob c = 0; c < g.C.num_objects(); ++c) to_J.at.push_back(std::vector<int>(E.size[c], 0));
  to_J.at.push_back({});
  ClosedPart out;
  out.join = pushout(g.cone, open, open_counit(g, E), E, to_J, g.J);
  out.value = out.join.apex;
  out.unit = out.join.legs[0];
  return out;
}

PshMap i_pull(const GluingContext& g, const Presheaf& E, const Presheaf& F, const PshMap& h) {
  ClosedPart from = i_pull(g, E), to = i_pull(g, F);
  return colimit_map(from.join, {compose(to.unit, h), to.join.legs[1]});
}

bool is_connected(const GluingContext& g, const Presheaf& X) {
  for (Ob c = 0; c < g.C.num_objects(); ++c)
    if (X.size[c] != 1) return false;
  return true;
}

Presheaf i_push(const GluingContext& g, const Presheaf& X) {
  if (!is_connected(g, X)) throw InputError("i_* applies to J-connected presheaves only");
  return X;
}

Fracture recollement_fracture(const GluingContext& g, const Presheaf& E) {
  ClosedPart closed = i_pull(g, E);
  Presheaf open = j_push(g, j_pull(g, E));
  ClosedPart closed_open = i_pull(g, open);
  PshMap eta = open_unit(g, E);
  Fracture out;
  out.square = Square{E, closed.value, open, closed_open.value, closed.unit, eta, i_pull(g, E, open, eta),
                      closed_open.unit};
  out.report = is_cartesian_square(g.cone, out.square);
  return out;
}

GluingLawReport check_gluing_laws(const GluingContext& g, int samples, int max_size, std::uint64_t seed) {
  GluingLawReport rep;
  std::mt19937_64 rng(seed);
  auto fail = [&](const std::string& what) { rep.failures.push_back(what); };
  for (int s = 0; s < samples; ++s) {
    Presheaf X = random_presheaf(g.C, max_size, rng);
    Presheaf Y = random_presheaf(g.cone, max_size, rng);
    const std::string at = "sample " + std::to_string(s) + ": ";
    ++rep.checks;
    if (!(j_pull(g, j_shriek(g, X)) == X)) fail(at + "j^*j_! is not the identity");
    if (!(j_pull(g, j_push(g, X)) == X)) fail(at + "j^*j_* is not the identity");

    // j_! ⊣ j^*: a map out of j_!X is its C-part
    ++rep.checks;
    std::set<std::vector<std::vector<int>>> restricted;
    std::size_t left = for_each_map(g.cone, j_shriek(g, X), Y, [&](const PshMap& h) {
      restricted.insert(j_pull(g, h).at);
      return true;
    });
    if (left != restricted.size() || left != hom_count(g.C, X, j_pull(g, Y)))
      fail(at + "j_! is not left adjoint to j^*");

    // j^* ⊣ j_*: transpose along the unit
    ++rep.checks;
    PshMap eta = open_unit(g, Y);
    Presheaf pushed = j_push(g, X);
    std::set<std::vector<std::vector<int>>> transposed;
    std::size_t maps = for_each_map(g.C, j_pull(g, Y), X, [&](const PshMap& h) {
      PshMap t = compose(j_push(g, j_pull(g, Y), X, h), eta);
      if (auto e = check_map(g.cone, Y, pushed, t)) fail(at + "transpose is not natural: " + *e);
      transposed.insert(t.at);
      return true;
    });
    if (maps != transposed.size() || maps != hom_count(g.cone, Y, pushed))
      fail(at + "j^* is not left adjoint to j_*");

    // triangle identities
    ++rep.checks;
    if (!(j_pull(g, eta) == identity_map(j_pull(g, Y)))) fail(at + "j^*η is not the identity");
    if (!(open_unit(g, pushed) == identity_map(pushed))) fail(at + "η at j_*X is not the identity");

    // the counit is a cartesian mono
    ++rep.checks;
    PshMap eps = open_counit(g, Y);
    if (auto e = check_map(g.cone, j_shriek(g, j_pull(g, Y)), Y, eps)) fail(at + "counit: " + *e);
    if (!is_mono(eps, Y)) fail(at + "counit is not injective");
    Presheaf Y2 = random_presheaf(g.cone, max_size, rng);
    if (auto h = random_map(g.cone, Y, Y2, rng)) {
      Square sq{j_shriek(g, j_pull(g, Y)), Y, j_shriek(g, j_pull(g, Y2)), Y2, eps,
                j_shriek(g, j_pull(g, *h)), *h, open_counit(g, Y2)};
      auto r = is_cartesian_square(g.cone, sq);
      if (!r.commutes || !r.cartesian) fail(at + "counit is not cartesian: " + r.witness);
    }

    ++rep.checks;
    Fracture fr = recollement_fracture(g, Y);
    if (!fr.report.commutes || !fr.report.cartesian) fail(at + "fracture square: " + fr.report.witness);
    if (!is_connected(g, fr.square.tr)) fail(at + "i^*E is not J-connected");
  }
  return rep;
}

// ---------------------------------------------------------------------------

GluedUniverse glued_universe(const GluingContext& g, int N, int M) {
  if (N < 1 || M < 1) throw InputError("bounds must be at least 1");
  GluedUniverse G;
  G.ctx = g;
  G.N = N;
  G.M = M;
  G.T = hs_universe(g.C, N);
  G.mt = materialize_universe(G.T);
  Family pushed = j_push(g, G.mt.el);
  const int need = max_fiber(pushed) + 1;
  if (need > M) throw BoundOverflow("classifying j_*π_T in the outer universe", need);
  G.S = hs_universe(g.cone, M);
  G.ms = materialize_universe(G.S);
  auto [K, K_el] = classifying_maps(G.ms, pushed, classify_family(G.S, pushed));
  G.q = j_pull(g, K);
  G.q_el = j_pull(g, K_el);
  G.cones = cones_of(g.C, G.mt.ty);

  const int n = g.C.num_objects();
  const Ob top = g.top;
  const Presheaf& US = G.ms.ty;
  for (int s = 0; s < US.size[top]; ++s)
    for (std::size_t t = 0; t < G.cones.size(); ++t) {
      bool over = true;
      for (Ob x = 0; x < n && over; ++x) over = US.act[bang(g, x)][s] == G.q.at[x][G.cones[t][x]];
      if (over) G.top_codes.push_back({s, static_cast<int>(t)});
    }
  guard_size(G.top_codes.size(), "glued codes");

  const int k = static_cast<int>(G.top_codes.size());
  Presheaf UU = G.mt.ty;
  UU.size.push_back(k);
  UU.act.push_back({});
  for (int u = 0; u < k; ++u) UU.act.back().push_back(u);
  for (Ob x = 0; x < n; ++x) {
    UU.act.push_back({});
    for (const auto& [s, t] : G.top_codes) UU.act.back().push_back(G.cones[t][x]);
  }
  G.qbar = G.q;
  G.qbar.at.push_back({});
  for (const auto& [s, t] : G.top_codes) G.qbar.at.back().push_back(s);

  const Family& elS = G.ms.el;
  for (int u = 0; u < k; ++u)
    for (int e = 0; e < elS.total.size[top]; ++e)
      if (elS.proj.at[top][e] == G.top_codes[u].first) G.top_elements.push_back({u, e});
  guard_size(G.top_elements.size(), "glued elements");

  // E_U(top) -> El_T(x) through the cartesian square π_T -> j^*π_S
  std::vector<std::map<std::pair<int, int>, int>> over(n);
  for (Ob x = 0; x < n; ++x)
    for (int e = 0; e < G.mt.el.total.size[x]; ++e) over[x][{G.mt.el.proj.at[x][e], G.q_el.at[x][e]}] = e;
  const int ke = static_cast<int>(G.top_elements.size());
  Presheaf EU = G.mt.el.total;
  EU.size.push_back(ke);
  EU.act.push_back({});
  for (int v = 0; v < ke; ++v) EU.act.back().push_back(v);
  for (Ob x = 0; x < n; ++x) {
    EU.act.push_back({});
    for (const auto& [u, e] : G.top_elements) {
      int t = G.top_codes[u].second;
      auto it = over[x].find({G.cones[t][x], elS.total.act[bang(g, x)][e]});
      if (it == over[x].end()) throw LawViolation("π_T is not cartesian over j^*π_S");
      EU.act.back().push_back(it->second);
    }
  }
  PshMap proj = G.mt.el.proj;
  proj.at.push_back({});
  G.qbar_el = G.q_el;
  G.qbar_el.at.push_back({});
  for (const auto& [u, e] : G.top_elements) {
    proj.at.back().push_back(u);
    G.qbar_el.at.back().push_back(e);
  }
  G.pi_U = Family{EU, UU, proj};
  if (auto e = check_glued_universe(G)) throw LawViolation("glued universe: " + *e);
  return G;
}

std::optional<std::string> check_glued_universe(const GluedUniverse& G) {
  const GluingContext& g = G.ctx;
  if (!(j_pull(g, G.pi_U.base) == G.mt.ty)) return "j^*U_U differs from U_T";
  if (!(j_pull(g, G.pi_U) == G.mt.el)) return "j^*π_U differs from π_T";
  if (auto e = check_family(g.cone, G.pi_U)) return "π_U: " + *e;
  auto sq = is_cartesian_square(g.cone, family_square(G.pi_U, G.ms.el, G.qbar_el, G.qbar));
  if (!sq.commutes || !sq.cartesian) return "π_U is not cartesian over π_S: " + sq.witness;
  auto sq_t = is_cartesian_square(g.C, family_square(G.mt.el, j_pull(g, G.ms.el), G.q_el, G.q));
  if (!sq_t.commutes || !sq_t.cartesian) return "π_T is not cartesian over j^*π_S: " + sq_t.witness;
  for (Ob c = 0; c < g.C.num_objects(); ++c)
    for (int y = 0; y < G.pi_U.base.size[c]; ++y)
      if (static_cast<int>(fiber(G.pi_U, c, y).size()) >= G.N) return "fiber over the open part reaches N";
  for (int y = 0; y < G.pi_U.base.size[g.top]; ++y)
    if (static_cast<int>(fiber(G.pi_U, g.top, y).size()) >= G.M) return "fiber over top reaches M";
  return std::nullopt;
}

CartesianMap classify_in_inner(const GluedUniverse& G, const Family& jf, const std::vector<std::vector<int>>* beta) {
  Classification k = beta ? classify_aligned(G.T, jf, *beta) : classify_family(G.T, jf);
  auto [base, total] = classifying_maps(G.mt, jf, k);
  return CartesianMap{base, total};
}

CartesianMap realign_at_syntax(const GluedUniverse& G, const Family& f, const CartesianMap& x0) {
  const GluingContext& g = G.ctx;
  const FiniteCategory& K = g.cone;
  const int n = g.C.num_objects();
  if (auto e = check_family(K, f)) throw InputError("family: " + *e);
  if (max_fiber(f) >= G.M) throw BoundOverflow("family in the gluing", max_fiber(f) + 1);
  Family jf = j_pull(g, f);
  if (max_fiber(jf) >= G.N) throw InputError("restriction of the family is not in the inner universe");
  if (auto e = check_map(g.C, jf.base, G.mt.ty, x0.base)) throw InputError("x0 base: " + *e);
  if (auto e = check_map(g.C, jf.total, G.mt.el.total, x0.total)) throw InputError("x0 total: " + *e);
  auto sq0 = is_cartesian_square(g.C, family_square(jf, G.mt.el, x0.total, x0.base));
  if (!sq0.commutes || !sq0.cartesian) throw InputError("x0 is not cartesian: " + sq0.witness);

  // transpose of q∘x0 along j_! ⊣ j^*, realigned along the counit
  const Presheaf& B = f.base;
  RealignmentProblem P;
  P.f = f;
  P.A = j_shriek(g, j_pull(g, B));
  P.m = open_counit(g, B);
  PulledBack pb = pull_back(K, f, P.A, P.m);
  P.partial.code.assign(K.num_objects(), {});
  P.partial.elem.assign(K.num_objects(), {});
  for (Ob c = 0; c < n; ++c) {
    for (int z = 0; z < P.A.size[c]; ++z) P.partial.code[c].push_back(G.ms.codes[c][G.q.at[c][x0.base.at[c][z]]]);
    for (int w = 0; w < pb.family.total.size[c]; ++w) {
      int z = pb.family.proj.at[c][w];
      int x = pb.top.at[c][w];
      P.partial.elem[c].push_back(G.q_el.at[c][x0.total.at[c][x]] - G.ms.offset[c][G.q.at[c][x0.base.at[c][z]]]);
    }
  }
  Classification k = realign_presheaf(G.S, P);
  auto [chi, chi_el] = classifying_maps(G.ms, f, k);
  if (!(j_pull(g, chi) == compose(G.q, x0.base)) || !(j_pull(g, chi_el) == compose(G.q_el, x0.total)))
    throw LawViolation("realigned classifier does not restrict to q∘x0");

  // lift through U_U
  auto cidx = cone_index(G.cones);
  std::map<std::pair<int, int>, int> uidx, eidx;
  for (std::size_t u = 0; u < G.top_codes.size(); ++u) uidx[G.top_codes[u]] = static_cast<int>(u);
  for (std::size_t v = 0; v < G.top_elements.size(); ++v) eidx[G.top_elements[v]] = static_cast<int>(v);
  CartesianMap x{x0.base, x0.total};
  x.base.at.push_back({});
  for (int y = 0; y < B.size[g.top]; ++y) {
    std::vector<int> cone;
    for (Ob c = 0; c < n; ++c) cone.push_back(x0.base.at[c][B.act[bang(g, c)][y]]);
    auto t = cidx.find(cone);
    if (t == cidx.end()) throw LawViolation("x0 does not send a top element to a cone");
    auto u = uidx.find({chi.at[g.top][y], t->second});
    if (u == uidx.end()) throw LawViolation("realigned code does not lie over the cone of x0");
    x.base.at.back().push_back(u->second);
  }
  x.total.at.push_back({});
  for (int e = 0; e < f.total.size[g.top]; ++e) {
    auto v = eidx.find({x.base.at[g.top][f.proj.at[g.top][e]], chi_el.at[g.top][e]});
    if (v == eidx.end()) throw LawViolation("realigned element has no lift");
    x.total.at.back().push_back(v->second);
  }
  if (auto e = check_glued_solution(G, f, x0, x)) throw LawViolation("realign at syntax: " + *e);
  return x;
}

std::optional<std::string> check_glued_solution(const GluedUniverse& G, const Family& f, const CartesianMap& x0,
                                                const CartesianMap& x) {
  const GluingContext& g = G.ctx;
  if (auto e = check_map(g.cone, f.base, G.pi_U.base, x.base)) return "base map: " + *e;
  if (auto e = check_map(g.cone, f.total, G.pi_U.total, x.total)) return "total map: " + *e;
  auto sq = is_cartesian_square(g.cone, family_square(f, G.pi_U, x.total, x.base));
  if (!sq.commutes) return "square does not commute: " + sq.witness;
  if (!sq.cartesian) return "square is not cartesian: " + sq.witness;
  if (!(j_pull(g, x.base) == x0.base)) return "base map does not restrict to x0";
  if (!(j_pull(g, x.total) == x0.total)) return "total map does not restrict to x0";
  return std::nullopt;
}

std::string naive_glued_mismatch(const GluedUniverse& G, const Family& f, const CartesianMap& x0) {
  const GluingContext& g = G.ctx;
  auto [chi, chi_el] = classifying_maps(G.ms, f, classify_family(G.S, f));
  PshMap want = compose(G.q, x0.base), want_el = compose(G.q_el, x0.total);
  for (Ob c = 0; c < g.C.num_objects(); ++c) {
    if (chi.at[c] != want.at[c])
      return "codes at " + g.C.object_names[c] + ": canonical " + describe(chi.at[c]) + ", q∘x0 " +
             describe(want.at[c]);
    if (chi_el.at[c] != want_el.at[c])
      return "elements at " + g.C.object_names[c] + ": canonical " + describe(chi_el.at[c]) + ", q∘x0 " +
             describe(want_el.at[c]);
  }
  return "";
}

GluedProblem random_glued_problem(const GluedUniverse& G, int max_size, std::mt19937_64& rng) {
  const GluingContext& g = G.ctx;
  GluedProblem P;
  Presheaf B = random_presheaf(g.cone, max_size, rng);
  P.f = random_family(g.cone, B, std::min(G.N, G.M), rng);
  Family jf = j_pull(g, P.f);
  auto beta = random_fiber_alignment(jf, rng);
  P.canonical = beta == fiber_positions(jf);
  P.x0 = classify_in_inner(G, jf, &beta);
  return P;
}

}  // namespace tf
