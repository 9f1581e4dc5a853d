#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace tf {

using Ob = int;
using Mor = int;

struct RawMorphism {
  std::string id;
  std::string src;
  std::string dst;
};

// Identities are implicit: every object X gets a morphism "id_X".
struct RawCategory {
  std::vector<std::string> objects;
  std::vector<RawMorphism> morphisms;
  std::vector<std::array<std::string, 3>> compose;  // {g, f, g∘f}
};

// Dense-index finite category. Morphisms are indexed in declaration order;
// categories built by validate_category list identities first.
struct FiniteCategory {
  std::vector<std::string> object_names;
  std::vector<std::string> morphism_names;
  std::vector<Ob> source;
  std::vector<Ob> target;
  std::vector<Mor> identity;  // per object
  std::vector<Mor> table;     // table[g * |mor| + f] = g∘f, or -1

  // Derived indexes, filled by finalize().
  std::vector<std::vector<Mor>> into;    // morphisms with target c, ascending
  std::vector<std::vector<Mor>> out_of;  // morphisms with source c, ascending

  int num_objects() const { return static_cast<int>(object_names.size()); }
  int num_morphisms() const { return static_cast<int>(morphism_names.size()); }
  Ob src(Mor m) const { return source[m]; }
  Ob dst(Mor m) const { return target[m]; }
  Mor id(Ob c) const { return identity[c]; }
  bool is_identity(Mor m) const { return identity[source[m]] == m; }
  Mor comp(Mor g, Mor f) const { return table[g * num_morphisms() + f]; }

  std::optional<Ob> find_object(const std::string& name) const;
  std::optional<Mor> find_morphism(const std::string& name) const;

  void finalize();

  bool operator==(const FiniteCategory& o) const {
    return object_names == o.object_names && morphism_names == o.morphism_names &&
           source == o.source && target == o.target && identity == o.identity &&
           table == o.table;
  }
};

// First violated unit, typing or associativity law, if any.
std::optional<std::string> check_category_laws(const FiniteCategory& C);

// Throws LawViolation or InputError naming the offending data.
FiniteCategory validate_category(const RawCategory& raw);

FiniteCategory empty_category();
FiniteCategory terminal_category();
FiniteCategory interval_category();   // 0 -u-> 1
FiniteCategory parallel_pair();       // s, t : 0 -> 1
FiniteCategory span_category();       // l <-p- a -q-> r
FiniteCategory commuting_square();    // a -f-> b -h-> d, a -g-> c -k-> d, hf = kg

struct FunctorData {
  std::vector<Ob> on_objects;
  std::vector<Mor> on_morphisms;
};

std::optional<std::string> check_functor(const FiniteCategory& C, const FiniteCategory& D,
                                         const FunctorData& F);

// C/c. Object k of the slice is the morphism objects[k] : c' -> c. A slice
// morphism is a base morphism w : c'' -> c' together with its target slice
// object u; its source is u∘w.
struct Slice {
  Ob base = 0;
  FiniteCategory cat;
  FunctorData projection;
  std::vector<Mor> objects;
  std::vector<Mor> arrow_base;    // slice morphism -> w
  std::vector<int> arrow_target;  // slice morphism -> target slice object
  std::vector<int> object_of;     // base morphism into c -> slice object, else -1
  std::vector<int> arrow_lookup;  // [w * |objects| + u] -> slice morphism, else -1
  int identity_object = 0;

  int arrow(Mor w, int u) const {
    return arrow_lookup[static_cast<std::size_t>(w) * objects.size() + u];
  }
};

Slice slice_category(const FiniteCategory& C, Ob c);

// Cone C⊤: objects of C plus a terminal object appended last. Morphisms of C
// keep their indices; then id_top, then one !_x : x -> top per object x.
FiniteCategory adjoin_terminal(const FiniteCategory& C);

}  // namespace tf
