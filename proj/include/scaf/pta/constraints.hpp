#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "scaf/ir/program.hpp"

namespace scaf::pta {

enum class Origin { SeedSite, ModeledSite };

const char *to_string(Origin origin);

/// An abstract heap object: the allocation statement (or modeled callsite)
/// that creates it, plus the calling context under the 1-callsite mode.
struct HeapObject {
  ir::SiteId site;
  Origin origin = Origin::SeedSite;
  std::optional<ir::SiteId> context;

  auto operator<=>(const HeapObject &) const = default;
  /// e.g. "xmalloc:1", "modeled array_create:1", "xmalloc:1 [array_create:1]".
  std::string str() const;
};

/// A memory location: a cell of a heap object (field "" is the object
/// itself) or the pseudo-object standing for a function's address.
struct Location {
  std::optional<HeapObject> object;
  std::string function;
  std::string field;

  static Location base(HeapObject object) { return {std::move(object), {}, {}}; }
  static Location of_function(std::string name) { return {std::nullopt, std::move(name), {}}; }

  bool is_function() const { return !object; }
  /// The cell reached by `field` from this location. Fields do not nest:
  /// (o, g).f is (o, f). Function pseudo-objects have no fields.
  std::optional<Location> with_field(const std::string &name) const;

  auto operator<=>(const Location &) const = default;
  std::string str() const;
};

/// A top-level SSA value, qualified by the (possibly cloned) function that
/// defines it. Function-address constants use an empty function name and
/// the spelling "@name".
struct ValueId {
  std::string function;
  std::string name;

  bool is_constant() const { return function.empty(); }
  auto operator<=>(const ValueId &) const = default;
  std::string str() const { return function + "." + name; }
};

enum class Mode { Baseline, Enhanced, OneCallsite };

const char *to_string(Mode mode);

/// How a call to a given function is treated when reached indirectly.
enum class Dispatch {
  /// Bind arguments to parameters and returns to the receiver.
  Bind,
  /// A fresh SeedSite object at the callsite.
  SeedObject,
  /// A fresh ModeledSite object at the callsite.
  ModeledObject,
  Ignore,
};

struct Callee {
  Dispatch dispatch = Dispatch::Ignore;
  /// Parameter count; absent for externals, which match any call.
  std::optional<std::size_t> arity;
  std::vector<std::optional<int>> params;
  std::vector<int> returns;
};

struct AddrOf {
  int dst;
  Location location;
};
struct CopyEdge {
  int dst;
  int src;
};
/// dst = *src
struct LoadFrom {
  int dst;
  int src;
};
/// *dst = src
struct StoreTo {
  int dst;
  int src;
};
struct FieldOf {
  int dst;
  int base;
  std::string field;
};
struct IndirectCall {
  ir::SiteId site;
  std::optional<ir::SiteId> context;
  /// Function defining the callsite, possibly a clone.
  std::string caller;
  int callee;
  std::vector<std::optional<int>> args;
  std::optional<int> receiver;
};

struct ConstraintSet {
  std::vector<ValueId> nodes;
  std::map<ValueId, int> index;

  std::vector<AddrOf> addrs;
  std::vector<CopyEdge> copies;
  std::vector<LoadFrom> loads;
  std::vector<StoreTo> stores;
  std::vector<FieldOf> fields;
  std::vector<IndirectCall> icalls;
  std::map<std::string, Callee> callees;

  /// Objects created by direct calls, with their receivers.
  std::map<HeapObject, std::optional<ValueId>> objects;

  int node(const ValueId &value);
  std::optional<int> find(const ValueId &value) const;
};

/// Object created when an indirect call at `call` dispatches to a target
/// handled with `dispatch`.
HeapObject icall_object(const IndirectCall &call, Dispatch dispatch);

/// Generates constraints for the program as given. Baseline and OneCallsite
/// are handled the same here; run one_callsite_transform first for the latter.
/// In Enhanced mode `allocators` lists the allocator functions; bodies of its
/// non-seed members are dropped and their callsites become allocations.
/// Throws std::invalid_argument if an allocator is not a defined function or seed.
ConstraintSet generate_constraints(const ir::Program &program, Mode mode,
                                   const std::set<std::string> &allocators = {});

} // namespace scaf::pta
