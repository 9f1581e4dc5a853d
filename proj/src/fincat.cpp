#include "toposforge/fincat.hpp"

#include <map>
#include <set>

#include "toposforge/errors.hpp"

namespace tf {

std::optional<Ob> FiniteCategory::find_object(const std::string& name) const {
  for (int i = 0; i < num_objects(); ++i)
    if (object_names[i] == name) return i;
  return std::nullopt;
}

std::optional<Mor> FiniteCategory::find_morphism(const std::string& name) const {
  for (int i = 0; i < num_morphisms(); ++i)
    if (morphism_names[i] == name) return i;
  return std::nullopt;
}

void FiniteCategory::finalize() {
  into.assign(num_objects(), {});
  out_of.assign(num_objects(), {});
  for (Mor m = 0; m < num_morphisms(); ++m) {
    into[target[m]].push_back(m);
    out_of[source[m]].push_back(m);
  }
}

std::optional<std::string> check_category_laws(const FiniteCategory& C) {
  const int n = C.num_morphisms();
  const auto& N = C.morphism_names;
  if (static_cast<int>(C.table.size()) != n * n) return "composition table has the wrong size";
  for (Ob c = 0; c < C.num_objects(); ++c) {
    Mor i = C.id(c);
    if (i < 0 || i >= n || C.src(i) != c || C.dst(i) != c)
      return "identity of " + C.object_names[c] + " is not an endomorphism of it";
  }
  for (Mor g = 0; g < n; ++g) {
    for (Mor f = 0; f < n; ++f) {
      Mor gf = C.comp(g, f);
      bool composable = C.dst(f) == C.src(g);
      if (!composable) {
        if (gf != -1) return "composite " + N[g] + "∘" + N[f] + " defined for non-composable pair";
        continue;
      }
      if (gf < 0 || gf >= n) return "missing composite " + N[g] + "∘" + N[f];
      if (C.src(gf) != C.src(f) || C.dst(gf) != C.dst(g))
        return "composite " + N[g] + "∘" + N[f] + " = " + N[gf] + " has the wrong type";
    }
  }
  for (Mor f = 0; f < n; ++f) {
    if (C.comp(C.id(C.dst(f)), f) != f) return "left unit law fails at " + N[f];
    if (C.comp(f, C.id(C.src(f))) != f) return "right unit law fails at " + N[f];
  }
  for (Mor h = 0; h < n; ++h) {
    for (Mor g = 0; g < n; ++g) {
      if (C.dst(g) != C.src(h)) continue;
      Mor hg = C.comp(h, g);
      for (Mor f = 0; f < n; ++f) {
        if (C.dst(f) != C.src(g)) continue;
        Mor a = C.comp(hg, f);
        Mor b = C.comp(h, C.comp(g, f));
        if (a != b)
          return "associativity fails at (" + N[h] + ", " + N[g] + ", " + N[f] + "): (" + N[h] +
                 "∘" + N[g] + ")∘" + N[f] + " = " + N[a] + " but " + N[h] + "∘(" + N[g] + "∘" +
                 N[f] + ") = " + N[b];
      }
    }
  }
  return std::nullopt;
}

FiniteCategory validate_category(const RawCategory& raw) {
  FiniteCategory C;
  std::map<std::string, Ob> obj;
  for (const auto& name : raw.objects) {
    if (name.empty()) throw InputError("empty object id");
    if (!obj.emplace(name, static_cast<Ob>(C.object_names.size())).second)
      throw InputError("duplicate object id '" + name + "'");
    C.object_names.push_back(name);
  }
  std::map<std::string, Mor> mor;
  auto add = [&](const std::string& id, Ob s, Ob d) {
    if (id.empty()) throw InputError("empty morphism id");
    if (!mor.emplace(id, C.num_morphisms()).second)
      throw InputError("duplicate morphism id '" + id + "'");
    C.morphism_names.push_back(id);
    C.source.push_back(s);
    C.target.push_back(d);
  };
  for (Ob c = 0; c < C.num_objects(); ++c) {
    C.identity.push_back(C.num_morphisms());
    add("id_" + C.object_names[c], c, c);
  }
  for (const auto& m : raw.morphisms) {
    auto s = obj.find(m.src);
    auto d = obj.find(m.dst);
    if (s == obj.end()) throw InputError("morphism '" + m.id + "' has unknown source '" + m.src + "'");
    if (d == obj.end()) throw InputError("morphism '" + m.id + "' has unknown target '" + m.dst + "'");
    add(m.id, s->second, d->second);
  }
  const int n = C.num_morphisms();
  C.table.assign(static_cast<std::size_t>(n) * n, -1);
  for (Mor m = 0; m < n; ++m) {
    C.table[C.id(C.dst(m)) * n + m] = m;
    C.table[m * n + C.id(C.src(m))] = m;
  }
  for (const auto& e : raw.compose) {
    Mor ids[3];
    for (int k = 0; k < 3; ++k) {
      auto it = mor.find(e[k]);
      if (it == mor.end()) throw InputError("composition entry references unknown morphism '" + e[k] + "'");
      ids[k] = it->second;
    }
    auto [g, f, gf] = ids;
    if (C.dst(f) != C.src(g))
      throw LawViolation("composition entry " + e[0] + "∘" + e[1] + ": morphisms are not composable");
    if (C.src(gf) != C.src(f) || C.dst(gf) != C.dst(g))
      throw LawViolation("composition entry " + e[0] + "∘" + e[1] + " = " + e[2] + " has the wrong type");
    Mor& slot = C.table[g * n + f];
    if (slot != -1 && slot != gf)
      throw LawViolation("conflicting composites for " + e[0] + "∘" + e[1] + ": " +
                         C.morphism_names[slot] + " and " + e[2]);
    slot = gf;
  }
  C.finalize();
  if (auto err = check_category_laws(C)) throw LawViolation(*err);
  return C;
}

namespace {

FiniteCategory build(std::vector<std::string> objects, std::vector<RawMorphism> morphisms,
                     std::vector<std::array<std::string, 3>> compose = {}) {
  return validate_category(RawCategory{std::move(objects), std::move(morphisms), std::move(compose)});
}

}  // namespace

FiniteCategory empty_category() { return build({}, {}); }

FiniteCategory terminal_category() { return build({"*"}, {}); }

FiniteCategory interval_category() { return build({"0", "1"}, {{"u", "0", "1"}}); }

FiniteCategory parallel_pair() { return build({"0", "1"}, {{"s", "0", "1"}, {"t", "0", "1"}}); }

FiniteCategory span_category() {
  return build({"l", "a", "r"}, {{"p", "a", "l"}, {"q", "a", "r"}});
}

FiniteCategory commuting_square() {
  return build({"a", "b", "c", "d"},
               {{"f", "a", "b"}, {"g", "a", "c"}, {"h", "b", "d"}, {"k", "c", "d"}, {"e", "a", "d"}},
               {{"h", "f", "e"}, {"k", "g", "e"}});
}

std::optional<std::string> check_functor(const FiniteCategory& C, const FiniteCategory& D,
                                         const FunctorData& F) {
  if (static_cast<int>(F.on_objects.size()) != C.num_objects() ||
      static_cast<int>(F.on_morphisms.size()) != C.num_morphisms())
    return "functor data has the wrong shape";
  for (Ob c = 0; c < C.num_objects(); ++c) {
    Ob d = F.on_objects[c];
    if (d < 0 || d >= D.num_objects()) return "object " + C.object_names[c] + " maps outside the target";
    if (F.on_morphisms[C.id(c)] != D.id(d)) return "identity of " + C.object_names[c] + " not preserved";
  }
  for (Mor m = 0; m < C.num_morphisms(); ++m) {
    Mor fm = F.on_morphisms[m];
    if (fm < 0 || fm >= D.num_morphisms()) return "morphism " + C.morphism_names[m] + " maps outside the target";
    if (D.src(fm) != F.on_objects[C.src(m)] || D.dst(fm) != F.on_objects[C.dst(m)])
      return "morphism " + C.morphism_names[m] + " maps to a morphism of the wrong type";
  }
  for (Mor g = 0; g < C.num_morphisms(); ++g)
    for (Mor f : C.into[C.src(g)])
      if (F.on_morphisms[C.comp(g, f)] != D.comp(F.on_morphisms[g], F.on_morphisms[f]))
        return "composite " + C.morphism_names[g] + "∘" + C.morphism_names[f] + " not preserved";
  return std::nullopt;
}

Slice slice_category(const FiniteCategory& C, Ob c) {
  if (c < 0 || c >= C.num_objects()) throw InputError("slice over unknown object");
  Slice S;
  S.base = c;
  S.objects = C.into[c];
  const int k = static_cast<int>(S.objects.size());
  S.object_of.assign(C.num_morphisms(), -1);
  for (int u = 0; u < k; ++u) S.object_of[S.objects[u]] = u;
  S.identity_object = S.object_of[C.id(c)];
  S.arrow_lookup.assign(static_cast<std::size_t>(C.num_morphisms()) * k, -1);

  FiniteCategory& D = S.cat;
  for (int u = 0; u < k; ++u) D.object_names.push_back(C.morphism_names[S.objects[u]]);
  D.identity.assign(k, -1);
  for (Mor w = 0; w < C.num_morphisms(); ++w) {
    for (int u = 0; u < k; ++u) {
      if (C.src(S.objects[u]) != C.dst(w)) continue;
      int a = D.num_morphisms();
      S.arrow_base.push_back(w);
      S.arrow_target.push_back(u);
      S.arrow_lookup[static_cast<std::size_t>(w) * k + u] = a;
      D.morphism_names.push_back(C.morphism_names[w] + "@" + C.morphism_names[S.objects[u]]);
      D.source.push_back(S.object_of[C.comp(S.objects[u], w)]);
      D.target.push_back(u);
      if (C.is_identity(w)) D.identity[u] = a;
    }
  }
  const int n = D.num_morphisms();
  D.table.assign(static_cast<std::size_t>(n) * n, -1);
  for (int a2 = 0; a2 < n; ++a2)
    for (int a1 = 0; a1 < n; ++a1)
      if (D.target[a1] == D.source[a2])
        D.table[a2 * n + a1] = S.arrow(C.comp(S.arrow_base[a2], S.arrow_base[a1]), S.arrow_target[a2]);
  D.finalize();

  for (int u = 0; u < k; ++u) S.projection.on_objects.push_back(C.src(S.objects[u]));
  S.projection.on_morphisms = S.arrow_base;
  return S;
}

FiniteCategory adjoin_terminal(const FiniteCategory& C) {
  FiniteCategory T;
  const int n = C.num_objects();
  const int m = C.num_morphisms();
  std::set<std::string> taken(C.object_names.begin(), C.object_names.end());
  std::string top = "top";
  while (taken.count(top)) top += "'";
  T.object_names = C.object_names;
  T.object_names.push_back(top);
  T.morphism_names = C.morphism_names;
  T.source = C.source;
  T.target = C.target;
  T.identity = C.identity;
  T.identity.push_back(m);
  T.morphism_names.push_back("id_" + top);
  T.source.push_back(n);
  T.target.push_back(n);
  for (Ob x = 0; x < n; ++x) {
    T.morphism_names.push_back("!_" + C.object_names[x]);
    T.source.push_back(x);
    T.target.push_back(n);
  }
  const int t = T.num_morphisms();
  T.table.assign(static_cast<std::size_t>(t) * t, -1);
  for (Mor g = 0; g < m; ++g)
    for (Mor f = 0; f < m; ++f) T.table[g * t + f] = C.comp(g, f);
  const Mor id_top = m;
  T.table[id_top * t + id_top] = id_top;
  for (Ob x = 0; x < n; ++x) {
    Mor bang = m + 1 + x;
    T.table[id_top * t + bang] = bang;
    for (Mor f : C.into[x]) T.table[bang * t + f] = m + 1 + C.src(f);
  }
  T.finalize();
  return T;
}

}  // namespace tf
