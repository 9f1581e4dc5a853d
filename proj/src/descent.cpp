#include "toposforge/descent.hpp"

#include <map>

#include "toposforge/errors.hpp"

namespace tf {

void PropertyReport::fail(std::string w) {
  ++failures;
  if (witnesses.size() < 5) witnesses.push_back(std::move(w));
}

namespace {

// Map out of a colimit induced by a compatible family of maps out of its nodes.
PshMap induced_on_colimit(const FiniteCategory& C, const Cone& colim, const std::vector<PshMap>& to_base) {
  PshMap h;
  h.at.assign(C.num_objects(), {});
  for (Ob c = 0; c < C.num_objects(); ++c) {
    h.at[c].assign(colim.apex.size[c], -1);
    for (std::size_t d = 0; d < colim.legs.size(); ++d)
      for (std::size_t p = 0; p < colim.legs[d].at[c].size(); ++p) {
        int k = colim.legs[d].at[c][p];
        int v = to_base[d].at[c][p];
        if (h.at[c][k] >= 0 && h.at[c][k] != v) throw LawViolation("cocone is not compatible");
        h.at[c][k] = v;
      }
  }
  return h;
}

std::optional<PshMap> inclusion_between(const FiniteCategory& C, const Subobject& small, const Subobject& big) {
  PshMap m;
  m.at.assign(C.num_objects(), {});
  for (Ob c = 0; c < C.num_objects(); ++c) {
    std::vector<int> pos(big.member[c].size(), -1);
    for (std::size_t i = 0; i < big.incl.at[c].size(); ++i) pos[big.incl.at[c][i]] = static_cast<int>(i);
    for (int x : small.incl.at[c]) {
      if (pos[x] < 0) return std::nullopt;
      m.at[c].push_back(pos[x]);
    }
  }
  return m;
}

Subobject intersect(const FiniteCategory& C, const Presheaf& X, const Subobject& a, const Subobject& b) {
  std::vector<std::vector<char>> member(C.num_objects());
  for (Ob c = 0; c < C.num_objects(); ++c)
    for (int x = 0; x < X.size[c]; ++x) member[c].push_back(a.member[c][x] && b.member[c][x]);
  return subobject_from_membership(C, X, member);
}

Diagram random_diagram(const FiniteCategory& C, int shape, std::mt19937_64& rng) {
  switch (shape % 3) {
    case 0:
      return random_coproduct_diagram(C, 2, rng);
    case 1:
      return random_mono_pushout_span(C, 2, rng);
    default:
      return random_directed_monos(C, 2, rng);
  }
}

}  // namespace

namespace {

struct DescentResult {
  std::string witness;
  Cone colim;
  PshMap base_map;
};

DescentResult run_descent(const FiniteCategory& C, const Diagram& J, const Cone& L, const OverDiagram& K) {
  const int k = static_cast<int>(J.nodes.size());
  DescentResult out;
  for (std::size_t e = 0; e < J.edges.size(); ++e) {
    const auto& E = J.edges[e];
    const Family& a = K.families[E.from];
    const Family& b = K.families[E.to];
    auto r = is_cartesian_square(C, Square{a.total, b.total, a.base, b.base, K.edge_maps[e], a.proj, b.proj, E.map});
    if (!r.cartesian) {
      out.witness = "transformation is not cartesian at edge " + std::to_string(e) + ": " + r.witness;
      return out;
    }
  }
  Diagram KD;
  for (int d = 0; d < k; ++d) KD.nodes.push_back(K.families[d].total);
  for (std::size_t e = 0; e < J.edges.size(); ++e) KD.edges.push_back({J.edges[e].from, J.edges[e].to, K.edge_maps[e]});
  out.colim = finite_colimit(C, KD);
  std::vector<PshMap> down;
  for (int d = 0; d < k; ++d) down.push_back(compose(L.legs[d], K.families[d].proj));
  out.base_map = induced_on_colimit(C, out.colim, down);
  for (int d = 0; d < k; ++d) {
    const Family& f = K.families[d];
    Square sq{f.total, out.colim.apex, f.base, L.apex, out.colim.legs[d], f.proj, out.base_map, L.legs[d]};
    auto r = is_cartesian_square(C, sq);
    if (!r.cartesian) {
      out.witness = "node " + std::to_string(d) + " square: " + r.witness;
      return out;
    }
  }
  return out;
}

}  // namespace

std::string check_descent(const FiniteCategory& C, const Diagram& J, const Cone& L, const OverDiagram& K) {
  return run_descent(C, J, L, K).witness;
}

std::string check_descent_for(const FiniteCategory& C, const Diagram& J, const Cone& L, const Family& F) {
  const int n = C.num_objects();
  OverDiagram K;
  std::vector<PshMap> tops;
  for (std::size_t d = 0; d < J.nodes.size(); ++d) {
    auto pb = pull_back(C, F, J.nodes[d], L.legs[d]);
    K.families.push_back(pb.family);
    tops.push_back(pb.top);
  }
  for (const auto& e : J.edges) {
    PshMap m;
    m.at.assign(n, {});
    for (Ob c = 0; c < n; ++c) {
      std::map<std::pair<int, int>, int> idx;
      const Family& T = K.families[e.to];
      for (int p = 0; p < T.total.size[c]; ++p) idx[{T.proj.at[c][p], tops[e.to].at[c][p]}] = p;
      const Family& S = K.families[e.from];
      for (int p = 0; p < S.total.size[c]; ++p)
        m.at[c].push_back(idx.at({e.map.at[c][S.proj.at[c][p]], tops[e.from].at[c][p]}));
    }
    K.edge_maps.push_back(m);
  }
  DescentResult res = run_descent(C, J, L, K);
  if (!res.witness.empty()) return res.witness;
  PshMap total_map = induced_on_colimit(C, res.colim, tops);
  Square glue{res.colim.apex, F.total, L.apex, L.apex, total_map, res.base_map, F.proj, identity_map(L.apex)};
  auto r = is_cartesian_square(C, glue);
  if (!r.cartesian) return "induced map to the family: " + r.witness;
  return {};
}

Diagram random_coproduct_diagram(const FiniteCategory& C, int max_size, std::mt19937_64& rng) {
  Diagram D;
  int k = 2 + static_cast<int>(rng() % 2);
  for (int i = 0; i < k; ++i) D.nodes.push_back(random_presheaf(C, max_size, rng));
  return D;
}

Diagram random_mono_pushout_span(const FiniteCategory& C, int max_size, std::mt19937_64& rng) {
  for (;;) {
    Presheaf B = random_presheaf(C, max_size, rng);
    Subobject A = random_subobject(C, B, rng);
    Presheaf Y = random_presheaf(C, max_size, rng);
    auto g = random_map(C, A.sub, Y, rng);
    if (!g) continue;
    Diagram D;
    D.nodes = {A.sub, B, Y};
    D.edges = {{0, 1, A.incl}, {0, 2, *g}};
    return D;
  }
}

Diagram random_directed_monos(const FiniteCategory& C, int max_size, std::mt19937_64& rng) {
  Presheaf top = random_presheaf(C, max_size + 1, rng);
  Subobject a = random_subobject(C, top, rng);
  Subobject b = random_subobject(C, top, rng);
  Diagram D;
  if (rng() % 2 == 0) {
    Subobject bottom = intersect(C, top, a, b);
    D.nodes = {bottom.sub, a.sub, b.sub, top};
    D.edges = {{0, 1, *inclusion_between(C, bottom, a)},
               {0, 2, *inclusion_between(C, bottom, b)},
               {1, 3, a.incl},
               {2, 3, b.incl}};
  } else {
    Subobject lo = intersect(C, top, a, b);
    D.nodes = {lo.sub, a.sub, top};
    D.edges = {{0, 1, *inclusion_between(C, lo, a)}, {1, 2, a.incl}};
  }
  return D;
}

PropertyReport check_disjointness(const FiniteCategory& C, int instances, std::mt19937_64& rng) {
  PropertyReport R{"disjoint coproducts"};
  for (int t = 0; t < instances; ++t) {
    ++R.instances;
    Diagram D = random_coproduct_diagram(C, 2, rng);
    Cone S = finite_colimit(C, D);
    bool ok = true;
    for (std::size_t i = 0; i < D.nodes.size() && ok; ++i)
      for (std::size_t j = 0; j < D.nodes.size() && ok; ++j) {
        if (i == j) continue;
        Cone P = pullback(C, D.nodes[i], S.legs[i], D.nodes[j], S.legs[j], S.apex);
        if (!(P.apex == initial_presheaf(C))) {
          R.fail("summands " + std::to_string(i) + " and " + std::to_string(j) + " meet");
          ok = false;
        }
      }
    if (!ok) continue;
    Family F = random_family(C, S.apex, 3, rng);
    if (auto w = check_descent_for(C, D, S, F); !w.empty()) R.fail("coproduct descent: " + w);
  }
  return R;
}

PropertyReport check_adhesivity(const FiniteCategory& C, int instances, std::mt19937_64& rng) {
  PropertyReport R{"adhesivity"};
  for (int t = 0; t < instances; ++t) {
    ++R.instances;
    Diagram D = random_mono_pushout_span(C, 2, rng);
    Cone P = finite_colimit(C, D);
    const Presheaf& A = D.nodes[0];
    const Presheaf& Y = D.nodes[2];
    Square sq{A, Y, D.nodes[1], P.apex, D.edges[1].map, D.edges[0].map, P.legs[2], P.legs[1]};
    auto r = is_cartesian_square(C, sq);
    if (!r.cartesian) {
      R.fail("pushout square not cartesian: " + r.witness);
      continue;
    }
    if (!is_mono(P.legs[2], P.apex)) {
      R.fail("pushout injection opposite the mono is not a mono");
      continue;
    }
    Family F = random_family(C, P.apex, 3, rng);
    if (auto w = check_descent_for(C, D, P, F); !w.empty()) R.fail("pushout descent: " + w);
  }
  return R;
}

PropertyReport check_filtered_descent(const FiniteCategory& C, int instances, std::mt19937_64& rng) {
  PropertyReport R{"filtered descent"};
  for (int t = 0; t < instances; ++t) {
    ++R.instances;
    Diagram D = random_directed_monos(C, 2, rng);
    Cone L = finite_colimit(C, D);
    Family F = random_family(C, L.apex, 3, rng);
    if (auto w = check_descent_for(C, D, L, F); !w.empty()) R.fail(w);
  }
  return R;
}

PropertyReport check_ideal_injections(const FiniteCategory& C, int instances, std::mt19937_64& rng) {
  PropertyReport R{"ideal diagram injections"};
  for (int t = 0; t < instances; ++t) {
    ++R.instances;
    Diagram D = random_directed_monos(C, 2, rng);
    Cone L = finite_colimit(C, D);
    for (std::size_t d = 0; d < D.nodes.size(); ++d)
      if (!is_mono(L.legs[d], L.apex)) {
        R.fail("injection of node " + std::to_string(d) + " is not a mono");
        break;
      }
  }
  return R;
}

PropertyReport check_colimit_preserves_monos(const FiniteCategory& C, int instances, std::mt19937_64& rng) {
  PropertyReport R{"cartesian monos induce monos on colimits"};
  for (int t = 0; t < instances; ++t) {
    ++R.instances;
    Diagram G = random_diagram(C, t, rng);
    Cone LG = finite_colimit(C, G);
    Subobject S = random_subobject(C, LG.apex, rng);
    // F(d) is the pullback of S along the injection of d
    Diagram F;
    std::vector<Subobject> parts;
    for (std::size_t d = 0; d < G.nodes.size(); ++d) {
      std::vector<std::vector<char>> member(C.num_objects());
      for (Ob c = 0; c < C.num_objects(); ++c)
        for (int x = 0; x < G.nodes[d].size[c]; ++x) member[c].push_back(S.member[c][LG.legs[d].at[c][x]]);
      parts.push_back(subobject_from_membership(C, G.nodes[d], member));
      F.nodes.push_back(parts.back().sub);
    }
    for (const auto& e : G.edges) {
      PshMap m;
      m.at.assign(C.num_objects(), {});
      for (Ob c = 0; c < C.num_objects(); ++c) {
        std::vector<int> pos(G.nodes[e.to].size[c], -1);
        for (std::size_t i = 0; i < parts[e.to].incl.at[c].size(); ++i) pos[parts[e.to].incl.at[c][i]] = static_cast<int>(i);
        for (int x : parts[e.from].incl.at[c]) m.at[c].push_back(pos[e.map.at[c][x]]);
      }
      F.edges.push_back({e.from, e.to, m});
    }
    Cone LF = finite_colimit(C, F);
    std::vector<PshMap> to_base;
    for (std::size_t d = 0; d < G.nodes.size(); ++d) to_base.push_back(compose(LG.legs[d], parts[d].incl));
    PshMap h = induced_on_colimit(C, LF, to_base);
    if (!is_mono(h, LG.apex)) R.fail("induced map of colimits is not a mono (shape " + std::to_string(t % 3) + ")");
  }
  return R;
}

PropertyReport check_cover_reflects_monos(const FiniteCategory& C, int instances, std::mt19937_64& rng) {
  PropertyReport R{"covers reflect monos"};
  for (int t = 0; t < instances; ++t) {
    ++R.instances;
    Presheaf Cc = random_presheaf(C, 3, rng);
    Presheaf B;
    PshMap h;
    if (t % 2 == 0) {
      Subobject S = random_subobject(C, Cc, rng);
      B = S.sub;
      h = S.incl;
    } else {
      B = random_presheaf(C, 2, rng);
      auto m = random_map(C, B, Cc, rng);
      if (!m) {
        ++R.vacuous;
        continue;
      }
      h = *m;
    }
    // E = B ⊔ Z with the codiagonal-style cover [id, z]
    Presheaf Z = (rng() % 2 == 0) ? initial_presheaf(C) : random_presheaf(C, 1, rng);
    auto z = random_map(C, Z, B, rng);
    if (!z) {
      Z = initial_presheaf(C);
      z = from_initial(C);
    }
    Cone E = coproduct(C, {B, Z});
    PshMap e;
    e.at.assign(C.num_objects(), {});
    for (Ob c = 0; c < C.num_objects(); ++c) {
      e.at[c].assign(E.apex.size[c], 0);
      for (int x = 0; x < B.size[c]; ++x) e.at[c][E.legs[0].at[c][x]] = x;
      for (int x = 0; x < Z.size[c]; ++x) e.at[c][E.legs[1].at[c][x]] = z->at[c][x];
    }
    if (!is_epi(e, B)) {
      R.fail("constructed cover is not an epimorphism");
      continue;
    }
    if (!is_mono(compose(h, e), Cc)) {
      ++R.vacuous;
      continue;
    }
    if (!is_mono(h, Cc)) R.fail("composite is mono but the map out of the cover's target is not");
  }
  return R;
}

PropertyReport check_cartesian_colimits(const FiniteCategory& C, int instances, std::mt19937_64& rng) {
  PropertyReport R{"colimits of cartesian diagrams"};
  for (int t = 0; t < instances; ++t) {
    ++R.instances;
    Diagram D = random_diagram(C, t, rng);
    Cone L = finite_colimit(C, D);
    Family F = random_family(C, L.apex, 3, rng);
    if (auto w = check_descent_for(C, D, L, F); !w.empty()) R.fail("shape " + std::to_string(t % 3) + ": " + w);
  }
  return R;
}

}  // namespace tf
