#pragma once

#include <string>

#include "json.hpp"
#include "toposforge/site.hpp"
#include "toposforge/universe.hpp"

namespace tf {

using Json = nlohmann::ordered_json;

// Parse errors carry "line:column"; field errors carry a dotted path.
Json load_json(const std::string& path);
Json parse_json_text(const std::string& text, const std::string& origin);

// {"objects":[...], "morphisms":[{"id","src","dst"}...], "compose":[[g,f,gf]...]}
FiniteCategory parse_category(const Json& j);
Json category_to_json(const FiniteCategory& C);

// A site document is a category document with an optional "covers" field:
// {"covers":{"<obj>":[["m1","m2"],...]}}. Without it the topology is trivial.
struct Site {
  FiniteCategory C;
  Topology J;
};
Site parse_site(const Json& j);
Topology parse_topology(const FiniteCategory& C, const Json& covers);

// {"carriers":{"<obj>":k}, "restrictions":{"<morphism>":[table]}}.
// Identity restrictions may be omitted.
Presheaf parse_presheaf(const FiniteCategory& C, const Json& j, const std::string& where = "presheaf");
Json presheaf_to_json(const FiniteCategory& C, const Presheaf& X);

// {"<obj>":[table]} per object.
PshMap parse_map(const FiniteCategory& C, const Presheaf& X, const Presheaf& Y, const Json& j,
                 const std::string& where = "map");
Json map_to_json(const FiniteCategory& C, const PshMap& a);

// {"base": presheaf, "total": presheaf, "proj": map}
Family parse_family(const FiniteCategory& C, const Json& j, const std::string& where = "family");
Json family_to_json(const FiniteCategory& C, const Family& f);

// A code over c: {"base":"<obj>", "size":[...], "act":[[...]...]}, indexed
// densely by the objects and morphisms of C/c.
Code parse_code(const HsUniverse& U, const Json& j, const std::string& where = "code");
Json code_to_json(const HsUniverse& U, const Code& code);

// {"codes":{"<obj>":[code...]}, "elements":{"<obj>":[...]}}
Classification parse_classification(const HsUniverse& U, const Json& j, const std::string& where);
Json classification_to_json(const HsUniverse& U, const Classification& k);

// {"family": family, "sub": presheaf, "mono": map, "partial": classification}.
// Partial elements follow the pullback of the family along the mono, whose
// elements are pairs (a, x) in lexicographic order.
RealignmentProblem parse_problem(const HsUniverse& U, const Json& j);
Json problem_to_json(const HsUniverse& U, const RealignmentProblem& P);

}  // namespace tf
