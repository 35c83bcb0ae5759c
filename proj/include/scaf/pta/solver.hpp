#pragma once

#include <map>
#include <set>

#include "scaf/pta/constraints.hpp"

namespace scaf::pta {

using LocationSet = std::set<Location>;

struct Solution {
  /// Non-empty points-to sets of program values (constants omitted).
  std::map<ValueId, LocationSet> pts;
  /// Non-empty contents of memory cells.
  std::map<Location, LocationSet> cells;
  /// Arity-compatible function targets seen at each indirect callsite.
  /// Clones of one callsite share an entry.
  std::map<ir::SiteId, std::set<std::string>> icall_targets;
  /// Objects created at indirect callsites, with their receivers.
  std::map<HeapObject, std::optional<ValueId>> icall_objects;

  const LocationSet &points_to(const ValueId &value) const;
  const LocationSet &contents(const Location &cell) const;

  bool operator==(const Solution &) const = default;
};

/// Inclusion-based worklist solver with difference propagation.
Solution solve(const ConstraintSet &constraints);

} // namespace scaf::pta
