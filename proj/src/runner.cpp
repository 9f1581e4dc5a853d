#include "toposforge/runner.hpp"

#include <cstdlib>
#include <random>
#include <sstream>

#include "toposforge/errors.hpp"
#include "toposforge/gluing.hpp"
#include "toposforge/internal.hpp"
#include "toposforge/soa.hpp"

namespace tf {

namespace {

struct Recorder {
  Json instances = Json::array();
  std::ostringstream summary;
  int failed = 0, inconclusive = 0;

  void add(Json inst, const std::string& outcome) {
    inst["outcome"] = outcome;
    if (outcome == "fail") ++failed;
    if (outcome == "inconclusive") ++inconclusive;
    instances.push_back(std::move(inst));
  }
  void line(const std::string& s) { summary << s << '\n'; }
};

std::string tally(int pass, int total) { return std::to_string(pass) + "/" + std::to_string(total); }

int bound_or(const RunConfig& cfg, std::size_t i, int fallback) {
  return cfg.bounds.size() > i ? cfg.bounds[i] : fallback;
}

FiniteCategory load_category(const RunConfig& cfg) {
  if (!cfg.cat.empty()) return parse_category(load_json(cfg.cat));
  if (!cfg.site.empty()) return parse_category(load_json(cfg.site));
  throw InputError("--cat or --site is required");
}

Site load_site(const RunConfig& cfg) {
  if (!cfg.site.empty()) return parse_site(load_json(cfg.site));
  FiniteCategory C = load_category(cfg);
  return Site{C, trivial_topology(C)};
}

std::string first(const std::vector<std::string>& w) { return w.empty() ? std::string() : w.front(); }

// ---------------------------------------------------------------------------

void check_axioms(const RunConfig& cfg, Recorder& r) {
  auto U = hs_universe(load_category(cfg), bound_or(cfg, 0, 2));
  AxiomConfig ac;
  ac.samples = std::max(cfg.samples, 200);
  ac.max_size = cfg.size;
  ac.exhaustive = cfg.exhaustive;
  ac.seed = cfg.seed;
  for (int a = 1; a <= 8; ++a) {
    Json inst{{"axiom", "U" + std::to_string(a)}};
    try {
      AxiomReport rep = check_axiom(U, a, ac);
      inst["instances"] = rep.checks.instances;
      inst["exhaustive"] = rep.exhaustive;
      inst["vacuous"] = rep.checks.vacuous;
      inst["overflow"] = rep.overflow;
      inst["failures"] = rep.checks.failures;
      inst["witnesses"] = rep.checks.witnesses;
      if (rep.required_bound > 0) inst["required_bound"] = rep.required_bound;
      std::string outcome = rep.checks.failures > 0 ? "fail" : rep.required_bound > 0 ? "needs-bound" : "pass";
      std::string detail = std::to_string(rep.checks.instances) + " instances";
      if (outcome == "needs-bound") detail = "needs bound " + std::to_string(rep.required_bound) + ", " + detail;
      if (outcome == "fail") detail += ", first witness: " + first(rep.checks.witnesses);
      r.line(rep.axiom + ": " + outcome + " (" + detail + ")");
      r.add(inst, outcome);
    } catch (const CapExceeded& e) {
      inst["reason"] = e.what();
      r.line("U" + std::to_string(a) + ": inconclusive (" + e.what() + ")");
      r.add(inst, "inconclusive");
    }
  }
}

void classify(const RunConfig& cfg, Recorder& r) {
  FiniteCategory C = load_category(cfg);
  if (cfg.family.empty()) throw InputError("--family is required");
  Family f = parse_family(C, load_json(cfg.family));
  auto U = hs_universe(C, bound_or(cfg, 0, 2));
  Classification k;
  try {
    k = classify_family(U, f);
  } catch (const BoundOverflow& e) {
    throw InputError(std::string("family: ") + e.what());
  }
  auto e = check_classification(U, f, k);
  Json inst{{"family", cfg.family}, {"classification", classification_to_json(U, k)}};
  if (e) inst["witness"] = *e;
  r.line("classification: " + std::string(e ? "fail (" + *e + ")" : "pass (cartesian, witness is an iso)"));
  r.add(inst, e ? "fail" : "pass");
}

void realign(const RunConfig& cfg, Recorder& r) {
  auto U = hs_universe(load_category(cfg), bound_or(cfg, 0, 2));
  std::vector<RealignmentProblem> ps;
  if (!cfg.problem.empty()) {
    ps.push_back(parse_problem(U, load_json(cfg.problem)));
  } else {
    std::mt19937_64 rng(cfg.seed);
    for (int i = 0; i < cfg.samples; ++i) ps.push_back(random_problem(U, cfg.size, rng));
  }
  int strict = 0;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    Json inst{{"id", i}};
    Classification k = realign_presheaf(U, ps[i]);
    std::string mismatch = boundary_mismatch(U, ps[i], k);
    auto bad = check_classification(U, ps[i].f, k);
    if (!cfg.problem.empty()) inst["classification"] = classification_to_json(U, k);
    if (!mismatch.empty()) inst["witness"] = mismatch;
    if (bad) inst["witness"] = *bad;
    bool ok = mismatch.empty() && !bad;
    strict += ok;
    r.add(inst, ok ? "pass" : "fail");
  }
  r.line("strict boundary: " + tally(strict, static_cast<int>(ps.size())));
}

void sheafify_cmd(const RunConfig& cfg, Recorder& r) {
  Site s = load_site(cfg);
  if (cfg.presheaf.empty() && cfg.family.empty()) throw InputError("--presheaf or --family is required");
  if (!cfg.presheaf.empty()) {
    Presheaf X = parse_presheaf(s.C, load_json(cfg.presheaf));
    Sheafified sh = sheafify(s.C, s.J, X);
    SheafReport before = is_sheaf(s.C, s.J, X), after = is_sheaf(s.C, s.J, sh.sheaf);
    Json inst{{"input_is_sheaf", before.sheaf}, {"sheaf", presheaf_to_json(s.C, sh.sheaf)},
              {"unit", map_to_json(s.C, sh.unit)}};
    if (!after.sheaf) inst["witness"] = after.witness;
    r.line("sheafification: " + std::string(after.sheaf ? "pass" : "fail (" + after.witness + ")"));
    r.add(inst, after.sheaf ? "pass" : "fail");
  }
  if (!cfg.family.empty()) {
    Family f = parse_family(s.C, load_json(cfg.family));
    Family g = sheafify_family(s.C, s.J, f);
    int N = bound_or(cfg, 0, 2);
    long long bound = sheafified_fiber_bound(s.C, s.J, N);
    int widest = 0;
    for (const auto& fib : fiber_positions(g))
      for (int p : fib) widest = std::max(widest, p + 1);
    bool small = widest < bound;
    Json inst{{"sheafified_family", family_to_json(s.C, g)}, {"largest_fiber", widest}, {"fiber_bound", bound}};
    r.line("sheafified family fibers: " + std::string(small ? "pass" : "fail") + " (largest " +
           std::to_string(widest) + ", bound " + std::to_string(bound) + ")");
    r.add(inst, small ? "pass" : "fail");
  }
}

void soa(const RunConfig& cfg, Recorder& r) {
  Site s = load_site(cfg);
  int N = bound_or(cfg, 0, 2);
  SoaState S = soa_initial(s.C, s.J, N);
  for (int i = 0; i < cfg.stages; ++i) S = soa_extend_stage(S);
  Json stages = Json::array();
  bool truncated = false;
  for (int n = 0; n <= S.stage(); ++n) {
    const Family& pi = S.stages[n].pi;
    stages.push_back(Json{{"stage", n}, {"U", pi.base.size}, {"E", pi.total.size},
                          {"ledger", S.stages[n].ledger.size()}, {"truncated", S.stages[n].truncated}});
    truncated = truncated || S.stages[n].truncated;
  }
  auto state_error = check_soa_state(S);
  Json st{{"check", "state"}, {"stages", stages}};
  if (state_error) st["witness"] = *state_error;
  r.line("stages and links: " + std::string(state_error ? "fail (" + *state_error + ")" : "pass"));
  r.add(st, state_error ? "fail" : "pass");

  int solved = 0, total = 0;
  for (int n = 0; n < S.stage(); ++n) {
    int count = static_cast<int>(S.stages[n].ledger.size());
    int step = std::max(1, count / std::max(1, cfg.samples));
    for (int i = 0; i < count; i += step) {
      StageProblem P = datum_problem(S, n, i);
      StageSolution sol = soa_solve(S, P);
      auto e = sol.solved ? check_stage_solution(S, P, sol) : std::optional<std::string>(sol.reason);
      ++total;
      solved += !e;
      Json inst{{"check", "datum"}, {"stage", n}, {"index", i}};
      if (e) inst["witness"] = *e;
      r.add(inst, e ? "fail" : "pass");
    }
  }
  r.line("ledger data solved strictly: " + tally(solved, total));

  for (SaturationMode mode : {SaturationMode::Pushout, SaturationMode::Composition, SaturationMode::Retract}) {
    SaturationReport rep = saturation_check(S, mode, std::max(cfg.samples, 1), cfg.seed);
    Json inst{{"check", "saturation"}, {"mode", to_string(mode)}, {"instances", rep.instances},
              {"solved", rep.solved}, {"unresolved", rep.unresolved}, {"failures", rep.failures},
              {"witnesses", rep.witnesses}};
    std::string outcome = rep.failures > 0 ? "fail" : rep.unresolved > 0 || rep.instances == 0 ? "inconclusive" : "pass";
    r.line("saturation under " + to_string(mode) + ": " + outcome + " (" + tally(rep.solved, rep.instances) + ")");
    r.add(inst, outcome);
  }
  if (truncated) {
    r.line("ledger: inconclusive (truncated at the data cap)");
    r.add(Json{{"check", "ledger"}}, "inconclusive");
  }
}

void u8(const RunConfig& cfg, Recorder& r) {
  Site s = load_site(cfg);
  auto U = sheaf_universe(s.C, s.J, bound_or(cfg, 0, 2));
  U8SearchConfig sc;
  sc.max_size = cfg.size;
  U8SearchResult res = u8_search(U, sc);
  Json inst{{"problems", res.problems}, {"extension_candidates", res.extension_candidates}, {"truncated", res.truncated}};
  Json ws = Json::array();
  for (const auto& f : res.failures) ws.push_back(f.witness);
  inst["failures"] = ws;
  std::string outcome = !res.failures.empty() ? "counterexample" : res.truncated ? "inconclusive" : "pass";
  r.line("strict realignment in the sheafified universe: " + outcome + " (" + std::to_string(res.problems) +
         " problems, " + std::to_string(res.failures.size()) + " without strict extension" +
         (res.truncated ? ", search truncated" : "") + ")");
  r.add(inst, !res.failures.empty() ? "counterexample" : res.truncated ? "inconclusive" : "pass");
}

void glue(const RunConfig& cfg, Recorder& r) {
  auto g = build_gluing(load_category(cfg));
  int N = bound_or(cfg, 0, 2), M = bound_or(cfg, 1, 4);
  GluedUniverse G;
  try {
    G = glued_universe(g, N, M);
  } catch (const BoundOverflow& e) {
    r.line("glued universe: inconclusive (outer bound needs " + std::to_string(e.required) + ")");
    r.add(Json{{"check", "glued universe"}, {"required_bound", e.required}}, "inconclusive");
    return;
  }
  auto ge = check_glued_universe(G);
  bool open_part = j_pull(g, G.pi_U.base) == G.mt.ty && j_pull(g, G.pi_U) == G.mt.el;
  Json u{{"check", "glued universe"}, {"U_top", G.pi_U.base.size[g.top]}, {"E_top", G.pi_U.total.size[g.top]},
         {"restricts_to_inner", open_part}};
  if (ge) u["witness"] = *ge;
  bool uok = !ge && open_part;
  r.line("glued universe restricts to the inner one bitwise: " + std::string(uok ? "pass" : "fail"));
  r.add(u, uok ? "pass" : "fail");

  std::mt19937_64 rng(cfg.seed);
  int strict = 0, non_canonical = 0, naive_failures = 0;
  for (int i = 0; i < cfg.samples; ++i) {
    GluedProblem P = random_glued_problem(G, cfg.size, rng);
    CartesianMap x = realign_at_syntax(G, P.f, P.x0);
    auto e = check_glued_solution(G, P.f, P.x0, x);
    std::string naive = naive_glued_mismatch(G, P.f, P.x0);
    non_canonical += !P.canonical;
    naive_failures += !naive.empty();
    strict += !e;
    Json inst{{"id", i}, {"canonical_x0", P.canonical}, {"naive_strict", naive.empty()}};
    if (!naive.empty()) inst["naive_witness"] = naive;
    if (e) inst["witness"] = *e;
    r.add(inst, e ? "fail" : "pass");
  }
  r.line("realign at syntax lies over x0: " + tally(strict, cfg.samples) + " (" + std::to_string(non_canonical) +
         " non-canonical x0)");
  r.line("naive classifier breaks strictness on " + std::to_string(naive_failures) + " samples");
}

void strictify(const RunConfig& cfg, Recorder& r) {
  FiniteCategory C = load_category(cfg);
  int N = bound_or(cfg, 0, 2), M = bound_or(cfg, 1, 6);
  auto S = hs_universe(C, N), L = hs_universe(C, M);
  int data = 0, commuting = 0, naive_breaks = 0, outside = 0;
  bool exhaustive = true;
  for (Ob c = 0; c < C.num_objects(); ++c) {
    auto pairs = enumerate_code_pairs(S, c);
    std::size_t expected = count_code_pairs(S, c);
    exhaustive = exhaustive && pairs.size() == expected;
    Json scan{{"check", "scan"}, {"object", C.object_names[c]}, {"enumerated", pairs.size()}, {"counted", expected}};
    r.add(scan, pairs.size() == expected ? "pass" : "fail");
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      const CodePair& P = pairs[i];
      Code lex;
      try {
        lex = pi_code(S, P);
      } catch (const BoundOverflow&) {
        ++outside;
        continue;
      }
      ++data;
      Code up = hierarchy_include(S, L, lex);
      bool strict = pi_code(L, P) == up && strictified_pi(S, L, P, SectionOrder::Reversed) == up;
      bool naive = ordered_pi(L, P, SectionOrder::Reversed) == up;
      commuting += strict;
      naive_breaks += !naive;
      Json inst{{"object", C.object_names[c]}, {"index", i}, {"unstrictified_equal", naive}};
      r.add(inst, strict ? "pass" : "fail");
    }
  }
  r.line("scan exhaustive (enumerated = counted at every object): " + std::string(exhaustive ? "yes" : "no"));
  r.line("included Π codes equal bitwise: " + tally(commuting, data) + " (" + std::to_string(outside) +
         " data with Π outside level " + std::to_string(N) + ")");
  r.line("unstrictified reversed former differs on " + std::to_string(naive_breaks) + " data");
}

void roundtrip(const RunConfig& cfg, Recorder& r) {
  FiniteCategory C = load_category(cfg);
  auto U = hs_universe(C, bound_or(cfg, 0, 3));
  auto O = subobject_classifier(C);
  std::mt19937_64 rng(cfg.seed);
  std::vector<RealignmentProblem> ps;
  for (int i = 0; i < cfg.samples; ++i) ps.push_back(random_problem(U, cfg.size, rng));
  RoundtripReport rep = external_internal_roundtrip(U, ps);
  Json inst{{"check", "roundtrip"}, {"instances", rep.instances}, {"agree", rep.agree}, {"identical", rep.identical},
            {"failures", rep.failures}};
  bool ok = rep.failures.empty() && rep.agree == rep.instances;
  r.line("external/internal round trip agrees strictly: " + tally(rep.agree, rep.instances) + " (" +
         std::to_string(rep.identical) + " identical)");
  r.add(inst, ok ? "pass" : "fail");

  int glued = 0, good = 0, over = 0;
  for (int i = 0; i < cfg.samples; ++i) {
    GlueInput in = random_glue_input(U, O, cfg.size, rng);
    Json gi{{"check", "glue"}, {"id", i}};
    try {
      GlueResult g = glue_type(U, O, in);
      auto e = check_glue(U, in, g);
      ++glued;
      good += !e;
      if (e) gi["witness"] = *e;
      r.add(gi, e ? "fail" : "pass");
    } catch (const BoundOverflow& e) {
      ++over;
      gi["required_bound"] = e.required;
      r.add(gi, "skipped");
    }
  }
  r.line("Glue equals O on its support: " + tally(good, glued) + " (" + std::to_string(over) +
         " inputs beyond the bound)");
}

Json config_json(const RunConfig& cfg) {
  Json j;
  j["command"] = cfg.command;
  if (!cfg.cat.empty()) j["cat"] = cfg.cat;
  if (!cfg.site.empty()) j["site"] = cfg.site;
  if (!cfg.presheaf.empty()) j["presheaf"] = cfg.presheaf;
  if (!cfg.family.empty()) j["family"] = cfg.family;
  if (!cfg.problem.empty()) j["problem"] = cfg.problem;
  j["bounds"] = cfg.bounds;
  j["stages"] = cfg.stages;
  j["samples"] = cfg.samples;
  j["size"] = cfg.size;
  j["cap"] = size_cap();
  j["seed"] = cfg.seed;
  j["exhaustive"] = cfg.exhaustive;
  return j;
}

}  // namespace

const std::vector<std::string>& commands() {
  static const std::vector<std::string> names{"check-axioms", "classify", "realign", "sheafify", "soa",
                                              "u8-search", "glue", "strictify", "roundtrip"};
  return names;
}

RunResult run(const RunConfig& cfg) {
  RunResult out;
  Recorder r;
  if (cfg.cap && !std::getenv("TOPOSFORGE_CAP")) set_size_cap(*cfg.cap);
  out.report["config"] = config_json(cfg);
  try {
    for (int b : cfg.bounds)
      if (b < 1) throw InputError("bounds must be at least 1");
    if (cfg.samples < 0 || cfg.size < 0 || cfg.stages < 0) throw InputError("counts must be non-negative");
    if (cfg.command == "check-axioms") check_axioms(cfg, r);
    else if (cfg.command == "classify") classify(cfg, r);
    else if (cfg.command == "realign") realign(cfg, r);
    else if (cfg.command == "sheafify") sheafify_cmd(cfg, r);
    else if (cfg.command == "soa") soa(cfg, r);
    else if (cfg.command == "u8-search") u8(cfg, r);
    else if (cfg.command == "glue") glue(cfg, r);
    else if (cfg.command == "strictify") strictify(cfg, r);
    else if (cfg.command == "roundtrip") roundtrip(cfg, r);
    else throw InputError("unknown command \"" + cfg.command + "\"");
    out.status = r.failed > 0 ? ExitStatus::Failed : r.inconclusive > 0 ? ExitStatus::Inconclusive : ExitStatus::Ok;
  } catch (const InputError& e) {
    out.status = ExitStatus::BadInput;
    out.report["error"] = e.what();
    r.line(std::string("input error: ") + e.what());
  } catch (const LawViolation& e) {
    out.status = ExitStatus::BadInput;
    out.report["error"] = e.what();
    r.line(std::string("invalid input: ") + e.what());
  } catch (const CapExceeded& e) {
    out.status = ExitStatus::Inconclusive;
    out.report["error"] = e.what();
    r.line(std::string("inconclusive: ") + e.what());
  } catch (const BoundOverflow& e) {
    out.status = ExitStatus::Inconclusive;
    out.report["error"] = e.what();
    r.line(std::string("inconclusive: ") + e.what());
  }
  static const char* names[] = {"ok", "failed", "inconclusive", "input-error"};
  out.report["status"] = names[static_cast<int>(out.status)];
  out.report["instances"] = std::move(r.instances);
  out.summary = r.summary.str();
  out.report["summary"] = out.summary;
  return out;
}

}  // namespace tf
