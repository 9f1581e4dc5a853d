#include <algorithm>
#include <functional>

#include "toposforge/errors.hpp"
#include "toposforge/universe.hpp"

namespace tf {

namespace {

// Families over every presheaf with carriers <= 1 whose fibers are < bound.
// The visitor returns false to stop.
void for_each_small_family(const FiniteCategory& C, int bound, const std::function<bool(const Family&)>& visit) {
  for (const Presheaf& Y : enumerate_presheaves(C, 1)) {
    Elements E = category_of_elements(C, Y);
    const int k = E.cat.num_objects();
    std::vector<int> sizes(k, 0);
    bool go = true;
    while (go) {
      for_each_presheaf(E.cat, sizes, [&](const Presheaf& P) {
        go = visit(family_from_elements(C, E, Y, P));
        return go;
      });
      if (!go) return;
      int i = k - 1;
      while (i >= 0 && sizes[i] == bound - 1) sizes[i--] = 0;
      if (i < 0) break;
      ++sizes[i];
    }
  }
}

Family random_small_family(const HsUniverse& U, int bound, int max_size, std::mt19937_64& rng) {
  return random_family(U.C, random_presheaf(U.C, max_size, rng), bound, rng);
}

// Runs the exhaustive part (when asked) and then cfg.samples sampled instances.
void drive(const AxiomConfig& cfg, AxiomReport& rep, const std::function<void(const std::function<bool()>&)>& scan,
           const std::function<void(std::mt19937_64&)>& sample) {
  if (cfg.exhaustive) {
    std::size_t seen = 0;
    scan([&] {
      ++rep.exhaustive;
      return ++seen < cfg.exhaustive_limit;
    });
  }
  std::mt19937_64 rng(cfg.seed);
  for (int t = 0; t < cfg.samples; ++t) sample(rng);
}

void note_overflow(AxiomReport& rep, int fiber) {
  ++rep.overflow;
  rep.required_bound = std::max(rep.required_bound, fiber + 1);
}

void soundness(const HsUniverse& U, const Family& f, PropertyReport& r) {
  Classification k = classify_family(U, f);
  if (auto e = check_classification(U, f, k)) return r.fail("classification: " + *e);
  PshMap w = classification_witness(U, f, k);
  Family g = el_pullback(U, f.base, k.code);
  if (auto e = check_map(U.C, f.total, g.total, w)) return r.fail("witness: " + *e);
  if (!is_iso(w, g.total)) return r.fail("witness is not an isomorphism");
  if (!(compose(g.proj, w) == f.proj)) return r.fail("witness does not lie over the base");
}

// f and the reindexing of b along the comprehension iso for f.
struct Dependent {
  Classification kf, kg;
  std::vector<std::vector<Code>> b;
};

Dependent dependent_codes(const HsUniverse& U, const Family& f, const Family& g) {
  Dependent D;
  D.kf = classify_family(U, f);
  D.kg = classify_family(U, g);
  PshMap wf = classification_witness(U, f, D.kf);
  const int n = U.C.num_objects();
  D.b.assign(n, {});
  for (Ob c = 0; c < n; ++c) {
    D.b[c].assign(f.total.size[c], Code{});
    for (int x = 0; x < f.total.size[c]; ++x) D.b[c][wf.at[c][x]] = D.kg.code[c][x];
  }
  return D;
}

void check_u1(const HsUniverse& U, const Family& f, const Presheaf& Z, const PshMap& g, AxiomReport& rep) {
  PropertyReport& r = rep.checks;
  ++r.instances;
  PulledBack pb = pull_back(U.C, f, Z, g);
  if (max_fiber(pb.family) >= U.N) return r.fail("pullback left the class");
  auto sq = is_cartesian_square(U.C, family_square(pb.family, f, pb.top, g));
  if (!sq.commutes || !sq.cartesian) return r.fail("pullback square: " + sq.witness);
  Classification kf = classify_family(U, f), kp = classify_family(U, pb.family);
  for (Ob c = 0; c < U.C.num_objects(); ++c)
    for (int z = 0; z < Z.size[c]; ++z)
      if (!(kp.code[c][z] == kf.code[c][g.at[c][z]])) return r.fail("classifier of the pullback is not χ∘g");
  soundness(U, pb.family, r);
}

void check_u3(const HsUniverse& U, const Family& f, const Family& g, AxiomReport& rep) {
  PropertyReport& r = rep.checks;
  ++r.instances;
  const FiniteCategory& C = U.C;
  Family h{g.total, f.base, compose(f.proj, g.proj)};
  int big = max_fiber(h);
  if (big >= U.N) {
    note_overflow(rep, big);
    try {
      Dependent D = dependent_codes(U, f, g);
      code_sigma(U, f.base, D.kf.code, D.b);
      r.fail("Σ code formed past the bound");
    } catch (const BoundOverflow& e) {
      if (e.required < U.N + 1 || e.required > big + 1) r.fail("Σ overflow reports bound " + std::to_string(e.required));
    }
    return;
  }
  soundness(U, h, r);
  Dependent D = dependent_codes(U, f, g);
  auto sigma = code_sigma(U, f.base, D.kf.code, D.b);
  Family s = el_pullback(U, f.base, sigma);
  PshMap w;
  w.at.assign(C.num_objects(), {});
  for (Ob c = 0; c < C.num_objects(); ++c) {
    std::vector<int> off;
    int acc = 0;
    for (int y = 0; y < f.base.size[c]; ++y) {
      off.push_back(acc);
      acc += U.el_size(sigma[c][y]);
    }
    for (int x2 = 0; x2 < g.total.size[c]; ++x2) {
      int x = g.proj.at[c][x2];
      int y = f.proj.at[c][x];
      int e = D.kf.elem[c][x];
      int before = 0;
      for (int x1 = 0; x1 < f.total.size[c]; ++x1)
        if (f.proj.at[c][x1] == y && D.kf.elem[c][x1] < e) before += static_cast<int>(fiber(g, c, x1).size());
      w.at[c].push_back(off[y] + before + D.kg.elem[c][x2]);
    }
  }
  if (auto e = check_map(C, h.total, s.total, w)) return r.fail("Σ witness: " + *e);
  if (!is_iso(w, s.total) || !(compose(s.proj, w) == h.proj)) return r.fail("Σ code does not classify the composite");
}

void check_u4(const HsUniverse& U, const Family& f, const Family& g, AxiomReport& rep) {
  PropertyReport& r = rep.checks;
  ++r.instances;
  const FiniteCategory& C = U.C;
  DependentProduct P = dependent_product(C, f, g);
  int big = max_fiber(P.family);
  if (big >= U.N) {
    note_overflow(rep, big);
    return;
  }
  soundness(U, P.family, r);
  Dependent D = dependent_codes(U, f, g);
  const Presheaf& I = f.base;
  auto pis = code_pi(U, I, D.kf.code, D.b);
  Family s = el_pullback(U, I, pis);
  PshMap w;
  w.at.assign(C.num_objects(), {});
  for (Ob c = 0; c < C.num_objects(); ++c) {
    std::vector<int> off;
    int acc = 0;
    std::vector<std::vector<std::vector<int>>> secs;
    for (int i = 0; i < I.size[c]; ++i) {
      off.push_back(acc);
      acc += U.el_size(pis[c][i]);
      secs.push_back(pi_sections(U, pair_at(U, I, D.kf.code, D.b, c, i)));
    }
    for (int k = 0; k < P.family.total.size[c]; ++k) {
      int i = P.family.proj.at[c][k];
      std::vector<int> first(C.num_morphisms(), -1);
      int pos = 0;
      for (Mor v : C.into[c]) {
        first[v] = pos;
        pos += U.el_size(D.kf.code[C.src(v)][I.act[v][i]]);
      }
      std::vector<int> sec(pos, -1);
      const auto& idx = P.indices[c][i];
      for (std::size_t j = 0; j < idx.size(); ++j) {
        Ob d = C.src(idx[j].u);
        sec[first[idx[j].u] + D.kf.elem[d][idx[j].a]] = D.kg.elem[d][P.sections[c][k][j]];
      }
      auto it = std::lower_bound(secs[i].begin(), secs[i].end(), sec);
      if (it == secs[i].end() || *it != sec) return r.fail("dependent product section missing from the Π code");
      w.at[c].push_back(off[i] + static_cast<int>(it - secs[i].begin()));
    }
  }
  if (auto e = check_map(C, P.family.total, s.total, w)) return r.fail("Π witness: " + *e);
  if (!is_iso(w, s.total) || !(compose(s.proj, w) == P.family.proj))
    return r.fail("Π code does not classify the dependent product");
}

void check_u5(const HsUniverse& U, const Family& f, AxiomReport& rep) {
  PropertyReport& r = rep.checks;
  ++r.instances;
  soundness(U, f, r);
  // realignment along the empty subobject recovers the canonical classifier
  RealignmentProblem P;
  P.f = f;
  P.A = initial_presheaf(U.C);
  P.m = from_initial(U.C);
  P.partial = classify_family(U, pull_back(U.C, f, P.A, P.m).family);
  if (!(realign_presheaf(U, P) == classify_family(U, f))) r.fail("realignment along ∅ differs from classification");
}

void check_u7(const HsUniverse& U, const Family& f, const Presheaf& Z, const PshMap& e, AxiomReport& rep) {
  PropertyReport& r = rep.checks;
  if (!is_epi(e, f.base)) return;
  ++r.instances;
  PulledBack pb = pull_back(U.C, f, Z, e);
  auto sq = is_cartesian_square(U.C, family_square(pb.family, f, pb.top, e));
  if (!sq.cartesian) return r.fail("pullback square is not cartesian");
  if (max_fiber(pb.family) >= U.N) {
    ++r.vacuous;
    return;
  }
  if (max_fiber(f) >= U.N) return r.fail("cover is small but the family is not");
  soundness(U, f, r);
}

void check_u8(const HsUniverse& U, const RealignmentProblem& P, AxiomReport& rep) {
  PropertyReport& r = rep.checks;
  ++r.instances;
  Classification k;
  try {
    k = realign_presheaf(U, P);
  } catch (const Error& e) {
    return r.fail(e.what());
  }
  if (auto e = check_classification(U, P.f, k)) return r.fail("realigned map: " + *e);
  std::string bad = boundary_mismatch(U, P, k);
  if (!bad.empty()) r.fail(bad);
}

// A cover of Y: Y ⊔ W -> Y, identity on Y and h on W.
std::pair<Presheaf, PshMap> random_cover(const FiniteCategory& C, const Presheaf& Y, int max_size,
                                         std::mt19937_64& rng) {
  Presheaf W = random_presheaf(C, max_size, rng);
  auto h = random_map(C, W, Y, rng);
  if (!h) return {Y, identity_map(Y)};
  Cone S = coproduct(C, {Y, W});
  PshMap e;
  e.at.assign(C.num_objects(), {});
  for (Ob c = 0; c < C.num_objects(); ++c) {
    e.at[c].assign(S.apex.size[c], 0);
    for (int y = 0; y < Y.size[c]; ++y) e.at[c][S.legs[0].at[c][y]] = y;
    for (int w = 0; w < W.size[c]; ++w) e.at[c][S.legs[1].at[c][w]] = h->at[c][w];
  }
  return {S.apex, e};
}

}  // namespace

AxiomReport check_axiom(const HsUniverse& U, int which, const AxiomConfig& cfg) {
  const FiniteCategory& C = U.C;
  AxiomReport rep;
  rep.axiom = "U" + std::to_string(which);
  rep.checks = PropertyReport(rep.axiom);
  using Tick = std::function<bool()>;
  switch (which) {
    case 1:
      drive(
          cfg, rep,
          [&](const Tick& tick) {
            bool go = true;
            for_each_small_family(C, U.N, [&](const Family& f) {
              for (const Presheaf& Z : enumerate_presheaves(C, 1)) {
                for_each_map(C, Z, f.base, [&](const PshMap& g) {
                  check_u1(U, f, Z, g, rep);
                  return go = tick();
                });
                if (!go) break;
              }
              return go;
            });
          },
          [&](std::mt19937_64& rng) {
            Family f = random_small_family(U, U.N, cfg.max_size, rng);
            Presheaf Z = random_presheaf(C, cfg.max_size, rng);
            if (auto g = random_map(C, Z, f.base, rng)) check_u1(U, f, Z, *g, rep);
          });
      break;
    case 2: {
      auto one = [&](const Presheaf& X, const Subobject& S) {
        ++rep.checks.instances;
        Family m{S.sub, X, S.incl};
        int big = max_fiber(m);
        if (!is_mono(S.incl, X)) return rep.checks.fail("enumerated subobject is not mono");
        if (big > 1) return rep.checks.fail("mono with a fiber of size " + std::to_string(big));
        if (big >= U.N) return note_overflow(rep, big);
        soundness(U, m, rep.checks);
      };
      drive(
          cfg, rep,
          [&](const Tick& tick) {
            for (const Presheaf& X : enumerate_presheaves(C, cfg.max_size))
              for (const Subobject& S : enumerate_subobjects(C, X)) {
                one(X, S);
                if (!tick()) return;
              }
          },
          [&](std::mt19937_64& rng) {
            Presheaf X = random_presheaf(C, cfg.max_size, rng);
            one(X, random_subobject(C, X, rng));
          });
      break;
    }
    case 3:
    case 4: {
      auto one = [&](const Family& f, const Family& g) {
        if (which == 3) check_u3(U, f, g, rep);
        else check_u4(U, f, g, rep);
      };
      drive(
          cfg, rep,
          [&](const Tick& tick) {
            for_each_small_family(C, U.N, [&](const Family& f) {
              Elements E = category_of_elements(C, f.total);
              bool go = true;
              std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
              for (int t = 0; t < 3 && go; ++t) {
                one(f, family_from_elements(C, E, f.total, random_presheaf(E.cat, U.N - 1, rng)));
                go = tick();
              }
              return go;
            });
          },
          [&](std::mt19937_64& rng) {
            Family f = random_small_family(U, U.N, cfg.max_size, rng);
            one(f, random_family(C, f.total, U.N, rng));
          });
      break;
    }
    case 5:
      drive(
          cfg, rep,
          [&](const Tick& tick) {
            for_each_small_family(C, U.N, [&](const Family& f) {
              check_u5(U, f, rep);
              return tick();
            });
          },
          [&](std::mt19937_64& rng) { check_u5(U, random_small_family(U, U.N, cfg.max_size, rng), rep); });
      break;
    case 6: {
      Omega O = subobject_classifier(C);
      Family f{O.omega, terminal_presheaf(C), to_terminal(O.omega)};
      ++rep.checks.instances;
      int big = max_fiber(f);
      if (big >= U.N) note_overflow(rep, big);
      else soundness(U, f, rep.checks);
      break;
    }
    case 7:
      drive(
          cfg, rep,
          [&](const Tick& tick) {
            for_each_small_family(C, U.N + 1, [&](const Family& f) {
              bool go = true;
              for (const Presheaf& Z : enumerate_presheaves(C, 1)) {
                for_each_map(C, Z, f.base, [&](const PshMap& e) {
                  check_u7(U, f, Z, e, rep);
                  return go = tick();
                });
                if (!go) break;
              }
              return go;
            });
          },
          [&](std::mt19937_64& rng) {
            Family f = random_small_family(U, U.N + 1, cfg.max_size, rng);
            auto [Z, e] = random_cover(C, f.base, cfg.max_size, rng);
            check_u7(U, f, Z, e, rep);
          });
      break;
    case 8:
      drive(
          cfg, rep,
          [&](const Tick& tick) {
            std::mt19937_64 rng(cfg.seed ^ 0x51ed270b27b5a1f3ULL);
            for_each_small_family(C, U.N, [&](const Family& f) {
              for (const Subobject& S : enumerate_subobjects(C, f.base)) {
                RealignmentProblem P{f, S.sub, S.incl, {}};
                PulledBack pb = pull_back(C, f, S.sub, S.incl);
                P.partial = classify_aligned(U, pb.family, random_fiber_alignment(pb.family, rng));
                check_u8(U, P, rep);
                if (!tick()) return false;
              }
              return true;
            });
          },
          [&](std::mt19937_64& rng) { check_u8(U, random_problem(U, cfg.max_size, rng), rep); });
      break;
    default:
      throw InputError("unknown axiom U" + std::to_string(which));
  }
  return rep;
}

}  // namespace tf
