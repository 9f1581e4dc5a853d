#include "toposforge/site.hpp"

#include <algorithm>

#include "toposforge/errors.hpp"

namespace tf {

bool Topology::covering(Ob c, SieveMask s) const {
  return std::binary_search(covers[c].begin(), covers[c].end(), s);
}

bool Topology::is_trivial(const FiniteCategory& C) const {
  for (Ob c = 0; c < C.num_objects(); ++c)
    if (covers[c].size() != 1 || covers[c][0] != maximal_sieve(C, c)) return false;
  return true;
}

SieveMask generated_sieve(const FiniteCategory& C, Ob c, const std::vector<Mor>& gens) {
  SieveMask s = 0;
  for (Mor g : gens) {
    if (C.dst(g) != c)
      throw InputError("morphism " + C.morphism_names[g] + " does not have codomain " + C.object_names[c]);
    for (Mor w : C.into[C.src(g)]) s |= SieveMask{1} << C.comp(g, w);
  }
  return s;
}

std::vector<TopologyViolation> topology_violations(const FiniteCategory& C,
                                                   const std::vector<std::vector<SieveMask>>& covers) {
  std::vector<TopologyViolation> out;
  const int n = C.num_objects();
  if (static_cast<int>(covers.size()) != n) {
    out.push_back({"shape", "coverage does not list every object"});
    return out;
  }
  auto covering = [&](Ob c, SieveMask s) {
    return std::find(covers[c].begin(), covers[c].end(), s) != covers[c].end();
  };
  auto name = [&](SieveMask s) { return sieve_to_string(C, s); };
  for (Ob c = 0; c < n; ++c)
    for (SieveMask s : covers[c])
      if (!is_sieve(C, c, s)) out.push_back({"sieve", name(s) + " is not a sieve on " + C.object_names[c]});
  if (!out.empty()) return out;
  for (Ob c = 0; c < n; ++c)
    if (!covering(c, maximal_sieve(C, c)))
      out.push_back({"maximal", "maximal sieve on " + C.object_names[c] + " does not cover"});
  for (Ob c = 0; c < n; ++c)
    for (SieveMask s : covers[c])
      for (Mor f : C.into[c]) {
        SieveMask p = pullback_sieve(C, s, f);
        if (!covering(C.src(f), p))
          out.push_back({"stability", "pullback of " + name(s) + " on " + C.object_names[c] + " along " +
                                          C.morphism_names[f] + " is " + name(p) + ", which does not cover"});
      }
  for (Ob c = 0; c < n; ++c) {
    for (SieveMask r : sieves_on(C, c)) {
      if (covering(c, r)) continue;
      for (SieveMask s : covers[c]) {
        bool all = true;
        for (Mor f : sieve_members(C, c, s))
          if (!covering(C.src(f), pullback_sieve(C, r, f))) {
            all = false;
            break;
          }
        if (all) {
          out.push_back({"transitivity", name(r) + " on " + C.object_names[c] +
                                             " is locally covering along the cover " + name(s) +
                                             " but does not cover"});
          break;
        }
      }
    }
    for (SieveMask s : covers[c])
      for (SieveMask t : covers[c])
        if (s < t && !covering(c, s & t))
          out.push_back({"intersection", "intersection of " + name(s) + " and " + name(t) + " on " +
                                             C.object_names[c] + " does not cover"});
  }
  return out;
}

Topology validate_topology(const FiniteCategory& C, std::vector<std::vector<SieveMask>> covers) {
  for (auto& cs : covers) {
    std::sort(cs.begin(), cs.end());
    cs.erase(std::unique(cs.begin(), cs.end()), cs.end());
  }
  auto bad = topology_violations(C, covers);
  if (!bad.empty()) {
    std::string msg = "invalid topology:";
    for (const auto& v : bad) msg += "\n  " + v.axiom + ": " + v.witness;
    throw LawViolation(msg);
  }
  Topology J;
  J.covers = std::move(covers);
  for (Ob c = 0; c < C.num_objects(); ++c) {
    SieveMask m = maximal_sieve(C, c);
    for (SieveMask s : J.covers[c]) m &= s;
    J.minimal.push_back(m);
  }
  return J;
}

Topology trivial_topology(const FiniteCategory& C) {
  std::vector<std::vector<SieveMask>> covers;
  for (Ob c = 0; c < C.num_objects(); ++c) covers.push_back({maximal_sieve(C, c)});
  return validate_topology(C, std::move(covers));
}

Topology topology_from_generators(const FiniteCategory& C, const RawCoverage& raw) {
  std::vector<std::vector<SieveMask>> covers(C.num_objects());
  for (Ob c = 0; c < C.num_objects(); ++c) covers[c].push_back(maximal_sieve(C, c));
  for (const auto& [obj, sieves] : raw) {
    auto c = C.find_object(obj);
    if (!c) throw InputError("coverage names unknown object '" + obj + "'");
    for (const auto& members : sieves) {
      std::vector<Mor> gens;
      for (const auto& m : members) {
        auto f = C.find_morphism(m);
        if (!f) throw InputError("coverage names unknown morphism '" + m + "'");
        gens.push_back(*f);
      }
      covers[*c].push_back(generated_sieve(C, *c, gens));
    }
  }
  return validate_topology(C, std::move(covers));
}

SheafReport is_sheaf(const FiniteCategory& C, const Topology& J, const Presheaf& X) {
  SheafReport rep;
  for (Ob c = 0; c < C.num_objects(); ++c)
    for (SieveMask s : J.covers[c]) {
      auto fams = matching_families(C, X, c, s);
      std::vector<Mor> M = sieve_members(C, c, s);
      std::vector<int> hit(fams.size(), -1);
      for (int x = 0; x < X.size[c]; ++x) {
        std::vector<int> fam;
        for (Mor m : M) fam.push_back(X.act[m][x]);
        auto it = std::lower_bound(fams.begin(), fams.end(), fam);
        int k = static_cast<int>(it - fams.begin());
        if (hit[k] >= 0) {
          rep.sheaf = false;
          rep.witness = "elements " + std::to_string(hit[k]) + " and " + std::to_string(x) + " of " +
                        C.object_names[c] + " agree on the cover " + sieve_to_string(C, s);
          return rep;
        }
        hit[k] = x;
      }
      for (std::size_t k = 0; k < fams.size(); ++k)
        if (hit[k] < 0) {
          rep.sheaf = false;
          rep.witness = "matching family " + std::to_string(k) + " for the cover " + sieve_to_string(C, s) +
                        " of " + C.object_names[c] + " has no amalgamation";
          return rep;
        }
    }
  return rep;
}

namespace {

struct PlusData {
  std::vector<std::vector<Mor>> members;
  std::vector<std::vector<std::vector<int>>> families;  // lexicographic, from matching_families
};

PlusData plus_data(const FiniteCategory& C, const Topology& J, const Presheaf& X) {
  PlusData D;
  for (Ob c = 0; c < C.num_objects(); ++c) {
    D.members.push_back(sieve_members(C, c, J.minimal[c]));
    D.families.push_back(matching_families(C, X, c, J.minimal[c]));
  }
  return D;
}

int family_index(const PlusData& D, Ob c, const std::vector<int>& fam) {
  const auto& F = D.families[c];
  auto it = std::lower_bound(F.begin(), F.end(), fam);
  if (it == F.end() || *it != fam) throw LawViolation("restricted family is not matching");
  return static_cast<int>(it - F.begin());
}

int member_position(const PlusData& D, Ob c, Mor m) {
  const auto& M = D.members[c];
  auto it = std::find(M.begin(), M.end(), m);
  if (it == M.end()) throw LawViolation("minimal cover is not stable");
  return static_cast<int>(it - M.begin());
}

}  // namespace

Sheafified plus_construction(const FiniteCategory& C, const Topology& J, const Presheaf& X) {
  const int n = C.num_objects();
  PlusData D = plus_data(C, J, X);
  Sheafified out;
  out.sheaf.size.assign(n, 0);
  for (Ob c = 0; c < n; ++c) {
    out.sheaf.size[c] = static_cast<int>(D.families[c].size());
    guard_size(out.sheaf.size[c], "plus construction");
  }
  out.sheaf.act.assign(C.num_morphisms(), {});
  for (Mor f = 0; f < C.num_morphisms(); ++f) {
    Ob c = C.dst(f), d = C.src(f);
    std::vector<int> pos;
    for (Mor g : D.members[d]) pos.push_back(member_position(D, c, C.comp(f, g)));
    for (const auto& fam : D.families[c]) {
      std::vector<int> r;
      for (int p : pos) r.push_back(fam[p]);
      out.sheaf.act[f].push_back(family_index(D, d, r));
    }
  }
  out.unit.at.assign(n, {});
  for (Ob c = 0; c < n; ++c)
    for (int x = 0; x < X.size[c]; ++x) {
      std::vector<int> fam;
      for (Mor m : D.members[c]) fam.push_back(X.act[m][x]);
      out.unit.at[c].push_back(family_index(D, c, fam));
    }
  return out;
}

PshMap plus_map(const FiniteCategory& C, const Topology& J, const Presheaf& X, const Presheaf& Y,
                const PshMap& a) {
  PlusData DX = plus_data(C, J, X);
  PlusData DY = plus_data(C, J, Y);
  PshMap out;
  out.at.assign(C.num_objects(), {});
  for (Ob c = 0; c < C.num_objects(); ++c)
    for (const auto& fam : DX.families[c]) {
      std::vector<int> img;
      for (std::size_t i = 0; i < fam.size(); ++i) img.push_back(a.at[C.src(DX.members[c][i])][fam[i]]);
      out.at[c].push_back(family_index(DY, c, img));
    }
  return out;
}

Sheafified sheafify(const FiniteCategory& C, const Topology& J, const Presheaf& X) {
  Sheafified once = plus_construction(C, J, X);
  Sheafified twice = plus_construction(C, J, once.sheaf);
  return Sheafified{twice.sheaf, compose(twice.unit, once.unit)};
}

PshMap sheafify_map(const FiniteCategory& C, const Topology& J, const Presheaf& X, const Presheaf& Y,
                    const PshMap& a) {
  Presheaf Xp = plus_construction(C, J, X).sheaf;
  Presheaf Yp = plus_construction(C, J, Y).sheaf;
  return plus_map(C, J, Xp, Yp, plus_map(C, J, X, Y, a));
}

Family sheafify_family(const FiniteCategory& C, const Topology& J, const Family& f) {
  return Family{sheafify(C, J, f.total).sheaf, sheafify(C, J, f.base).sheaf,
                sheafify_map(C, J, f.total, f.base, f.proj)};
}

int cover_width(const FiniteCategory& C, const Topology& J, Ob c) {
  std::vector<Mor> M = sieve_members(C, c, J.minimal[c]);
  const int k = static_cast<int>(M.size());
  if (k > 20) throw CapExceeded("cover width search", std::size_t{1} << k, std::size_t{1} << 20);
  int best = k;
  for (std::uint32_t bits = 0; bits < (1u << k); ++bits) {
    int pop = __builtin_popcount(bits);
    if (pop >= best) continue;
    std::vector<Mor> gens;
    for (int i = 0; i < k; ++i)
      if ((bits >> i) & 1u) gens.push_back(M[i]);
    if (generated_sieve(C, c, gens) == J.minimal[c]) best = pop;
  }
  return best;
}

long long sheafified_fiber_bound(const FiniteCategory& C, const Topology& J, int N) {
  int w = 0;
  for (Ob c = 0; c < C.num_objects(); ++c) w = std::max(w, cover_width(C, J, c));
  long long b = 1;
  for (int i = 0; i < w * w; ++i) {
    b *= N - 1;
    if (b > (1LL << 40)) return b + 1;
  }
  return w == 1 ? N : b + 1;
}

PshMap extend_to_sheafification(const FiniteCategory& C, const Topology& J, const Presheaf& X,
                                const Presheaf& F, const PshMap& g) {
  Sheafified sf = sheafify(C, J, F);
  if (!is_iso(sf.unit, sf.sheaf)) throw LawViolation("extension target is not a sheaf");
  return compose(inverse(sf.unit, sf.sheaf), sheafify_map(C, J, X, F, g));
}

}  // namespace tf
