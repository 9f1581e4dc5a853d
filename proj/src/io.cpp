#include "toposforge/io.hpp"

#include <fstream>
#include <sstream>

#include "toposforge/errors.hpp"

namespace tf {

namespace {

[[noreturn]] void bad(const std::string& where, const std::string& what) { throw InputError(where + ": " + what); }

const Json& field(const Json& j, const std::string& key, const std::string& where) {
  if (!j.is_object()) bad(where, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) bad(where, "missing field \"" + key + "\"");
  return *it;
}

std::string as_string(const Json& j, const std::string& where) {
  if (!j.is_string()) bad(where, "expected a string");
  return j.get<std::string>();
}

int as_int(const Json& j, const std::string& where) {
  if (!j.is_number_integer()) bad(where, "expected an integer");
  return j.get<int>();
}

std::vector<int> as_table(const Json& j, const std::string& where) {
  if (!j.is_array()) bad(where, "expected an array");
  std::vector<int> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(as_int(j[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

Ob object_named(const FiniteCategory& C, const std::string& name, const std::string& where) {
  auto o = C.find_object(name);
  if (!o) bad(where, "unknown object \"" + name + "\"");
  return *o;
}

Mor morphism_named(const FiniteCategory& C, const std::string& name, const std::string& where) {
  auto m = C.find_morphism(name);
  if (!m) bad(where, "unknown morphism \"" + name + "\"");
  return *m;
}

// Per-object tables keyed by object name; missing objects get empty tables.
std::vector<std::vector<int>> object_tables(const FiniteCategory& C, const Json& j, const std::string& where) {
  if (!j.is_object()) bad(where, "expected an object keyed by object names");
  std::vector<std::vector<int>> out(C.num_objects());
  for (auto it = j.begin(); it != j.end(); ++it)
    out[object_named(C, it.key(), where)] = as_table(it.value(), where + "." + it.key());
  return out;
}

Json object_tables_to_json(const FiniteCategory& C, const std::vector<std::vector<int>>& t) {
  Json j = Json::object();
  for (Ob c = 0; c < C.num_objects(); ++c) j[C.object_names[c]] = t[c];
  return j;
}

void position(const std::string& text, std::size_t byte, std::size_t& line, std::size_t& col) {
  line = 1;
  col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
}

}  // namespace

Json parse_json_text(const std::string& text, const std::string& origin) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    std::size_t line = 0, col = 0;
    position(text, e.byte == 0 ? 0 : e.byte - 1, line, col);
    throw InputError(origin + ":" + std::to_string(line) + ":" + std::to_string(col) + ": malformed JSON");
  }
}

Json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError(path + ": cannot open");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_json_text(ss.str(), path);
}

FiniteCategory parse_category(const Json& j) {
  RawCategory raw;
  const Json& objects = field(j, "objects", "category");
  if (!objects.is_array()) bad("category.objects", "expected an array");
  for (std::size_t i = 0; i < objects.size(); ++i)
    raw.objects.push_back(as_string(objects[i], "category.objects[" + std::to_string(i) + "]"));
  if (j.contains("morphisms")) {
    const Json& ms = j["morphisms"];
    if (!ms.is_array()) bad("category.morphisms", "expected an array");
    for (std::size_t i = 0; i < ms.size(); ++i) {
      std::string w = "category.morphisms[" + std::to_string(i) + "]";
      raw.morphisms.push_back({as_string(field(ms[i], "id", w), w + ".id"), as_string(field(ms[i], "src", w), w + ".src"),
                               as_string(field(ms[i], "dst", w), w + ".dst")});
    }
  }
  if (j.contains("compose")) {
    const Json& cs = j["compose"];
    if (!cs.is_array()) bad("category.compose", "expected an array");
    for (std::size_t i = 0; i < cs.size(); ++i) {
      std::string w = "category.compose[" + std::to_string(i) + "]";
      if (!cs[i].is_array() || cs[i].size() != 3) bad(w, "expected [g, f, g∘f]");
      raw.compose.push_back({as_string(cs[i][0], w), as_string(cs[i][1], w), as_string(cs[i][2], w)});
    }
  }
  return validate_category(raw);
}

Json category_to_json(const FiniteCategory& C) {
  Json j;
  j["objects"] = C.object_names;
  Json ms = Json::array();
  for (Mor m = 0; m < C.num_morphisms(); ++m)
    if (!C.is_identity(m))
      ms.push_back(Json{{"id", C.morphism_names[m]}, {"src", C.object_names[C.src(m)]}, {"dst", C.object_names[C.dst(m)]}});
  j["morphisms"] = ms;
  Json cs = Json::array();
  for (Mor g = 0; g < C.num_morphisms(); ++g)
    for (Mor f = 0; f < C.num_morphisms(); ++f) {
      Mor gf = C.comp(g, f);
      if (gf >= 0 && !C.is_identity(g) && !C.is_identity(f))
        cs.push_back(Json::array({C.morphism_names[g], C.morphism_names[f], C.morphism_names[gf]}));
    }
  j["compose"] = cs;
  return j;
}

Topology parse_topology(const FiniteCategory& C, const Json& covers) {
  if (!covers.is_object()) bad("covers", "expected an object keyed by object names");
  RawCoverage raw;
  for (auto it = covers.begin(); it != covers.end(); ++it) {
    std::string w = "covers." + it.key();
    object_named(C, it.key(), w);
    if (!it.value().is_array()) bad(w, "expected a list of sieves");
    auto& sieves = raw[it.key()];
    for (std::size_t i = 0; i < it.value().size(); ++i) {
      const Json& s = it.value()[i];
      std::string ws = w + "[" + std::to_string(i) + "]";
      if (!s.is_array()) bad(ws, "expected a list of morphism names");
      std::vector<std::string> gens;
      for (const auto& g : s) gens.push_back(as_string(g, ws));
      sieves.push_back(gens);
    }
  }
  return topology_from_generators(C, raw);
}

Site parse_site(const Json& j) {
  Site s{parse_category(j), {}};
  s.J = j.contains("covers") ? parse_topology(s.C, j["covers"]) : trivial_topology(s.C);
  return s;
}

Presheaf parse_presheaf(const FiniteCategory& C, const Json& j, const std::string& where) {
  Presheaf X;
  X.size.assign(C.num_objects(), 0);
  const Json& carriers = field(j, "carriers", where);
  if (!carriers.is_object()) bad(where + ".carriers", "expected an object keyed by object names");
  for (auto it = carriers.begin(); it != carriers.end(); ++it) {
    std::string w = where + ".carriers." + it.key();
    int k = as_int(it.value(), w);
    if (k < 0) bad(w, "negative carrier size");
    X.size[object_named(C, it.key(), w)] = k;
  }
  X.act.assign(C.num_morphisms(), {});
  std::vector<char> given(C.num_morphisms(), 0);
  if (j.contains("restrictions")) {
    const Json& rs = j["restrictions"];
    if (!rs.is_object()) bad(where + ".restrictions", "expected an object keyed by morphism names");
    for (auto it = rs.begin(); it != rs.end(); ++it) {
      std::string w = where + ".restrictions." + it.key();
      Mor u = morphism_named(C, it.key(), w);
      X.act[u] = as_table(it.value(), w);
      given[u] = 1;
    }
  }
  for (Mor u = 0; u < C.num_morphisms(); ++u) {
    if (given[u]) continue;
    if (!C.is_identity(u)) bad(where + ".restrictions", "missing table for " + C.morphism_names[u]);
    for (int x = 0; x < X.size[C.dst(u)]; ++x) X.act[u].push_back(x);
  }
  if (auto e = check_presheaf(C, X)) throw LawViolation(where + ": " + *e);
  return X;
}

Json presheaf_to_json(const FiniteCategory& C, const Presheaf& X) {
  Json j;
  Json carriers = Json::object();
  for (Ob c = 0; c < C.num_objects(); ++c) carriers[C.object_names[c]] = X.size[c];
  j["carriers"] = carriers;
  Json rs = Json::object();
  for (Mor u = 0; u < C.num_morphisms(); ++u)
    if (!C.is_identity(u)) rs[C.morphism_names[u]] = X.act[u];
  j["restrictions"] = rs;
  return j;
}

PshMap parse_map(const FiniteCategory& C, const Presheaf& X, const Presheaf& Y, const Json& j,
                 const std::string& where) {
  PshMap a{object_tables(C, j, where)};
  if (auto e = check_map(C, X, Y, a)) throw LawViolation(where + ": " + *e);
  return a;
}

Json map_to_json(const FiniteCategory& C, const PshMap& a) { return object_tables_to_json(C, a.at); }

Family parse_family(const FiniteCategory& C, const Json& j, const std::string& where) {
  Family f;
  f.base = parse_presheaf(C, field(j, "base", where), where + ".base");
  f.total = parse_presheaf(C, field(j, "total", where), where + ".total");
  f.proj = parse_map(C, f.total, f.base, field(j, "proj", where), where + ".proj");
  return f;
}

Json family_to_json(const FiniteCategory& C, const Family& f) {
  Json j;
  j["base"] = presheaf_to_json(C, f.base);
  j["total"] = presheaf_to_json(C, f.total);
  j["proj"] = map_to_json(C, f.proj);
  return j;
}

Code parse_code(const HsUniverse& U, const Json& j, const std::string& where) {
  Code k;
  k.base = object_named(U.C, as_string(field(j, "base", where), where + ".base"), where + ".base");
  k.p.size = as_table(field(j, "size", where), where + ".size");
  const Json& act = field(j, "act", where);
  if (!act.is_array()) bad(where + ".act", "expected an array of tables");
  for (std::size_t i = 0; i < act.size(); ++i) k.p.act.push_back(as_table(act[i], where + ".act[" + std::to_string(i) + "]"));
  if (auto e = U.check_code(k)) throw InputError(where + ": " + *e);
  return k;
}

Json code_to_json(const HsUniverse& U, const Code& code) {
  Json j;
  j["base"] = U.C.object_names[code.base];
  j["size"] = code.p.size;
  j["act"] = code.p.act;
  return j;
}

Classification parse_classification(const HsUniverse& U, const Json& j, const std::string& where) {
  const FiniteCategory& C = U.C;
  Classification k;
  k.code.assign(C.num_objects(), {});
  const Json& codes = field(j, "codes", where);
  if (!codes.is_object()) bad(where + ".codes", "expected an object keyed by object names");
  for (auto it = codes.begin(); it != codes.end(); ++it) {
    std::string w = where + ".codes." + it.key();
    Ob c = object_named(C, it.key(), w);
    if (!it.value().is_array()) bad(w, "expected a list of codes");
    for (std::size_t i = 0; i < it.value().size(); ++i)
      k.code[c].push_back(parse_code(U, it.value()[i], w + "[" + std::to_string(i) + "]"));
  }
  k.elem = object_tables(C, field(j, "elements", where), where + ".elements");
  return k;
}

Json classification_to_json(const HsUniverse& U, const Classification& k) {
  Json codes = Json::object();
  for (Ob c = 0; c < U.C.num_objects(); ++c) {
    Json list = Json::array();
    for (const Code& code : k.code[c]) list.push_back(code_to_json(U, code));
    codes[U.C.object_names[c]] = list;
  }
  Json j;
  j["codes"] = codes;
  j["elements"] = object_tables_to_json(U.C, k.elem);
  return j;
}

RealignmentProblem parse_problem(const HsUniverse& U, const Json& j) {
  const FiniteCategory& C = U.C;
  RealignmentProblem P;
  P.f = parse_family(C, field(j, "family", "problem"), "problem.family");
  P.A = parse_presheaf(C, field(j, "sub", "problem"), "problem.sub");
  P.m = parse_map(C, P.A, P.f.base, field(j, "mono", "problem"), "problem.mono");
  P.partial = parse_classification(U, field(j, "partial", "problem"), "problem.partial");
  if (auto e = check_problem(U, P)) throw InputError("problem: " + *e);
  return P;
}

Json problem_to_json(const HsUniverse& U, const RealignmentProblem& P) {
  Json j;
  j["family"] = family_to_json(U.C, P.f);
  j["sub"] = presheaf_to_json(U.C, P.A);
  j["mono"] = map_to_json(U.C, P.m);
  j["partial"] = classification_to_json(U, P.partial);
  return j;
}

}  // namespace tf
