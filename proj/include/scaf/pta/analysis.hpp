#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>

#include <json.hpp>

#include "scaf/callgraph/callgraph.hpp"
#include "scaf/pta/solver.hpp"

namespace scaf::pta {

struct ObjectRecord {
  HeapObject object;
  std::optional<ValueId> receiver;
};

struct Analysis {
  Mode mode = Mode::Baseline;
  /// Fingerprint of the program handed to analyze(), before any cloning.
  std::uint64_t source_fingerprint = 0;
  /// The program actually solved (cloned under OneCallsite).
  ir::Program program;
  std::set<std::string> allocators;
  Solution solution;
  std::map<HeapObject, ObjectRecord> objects;

  const LocationSet &points_to(const ValueId &value) const { return solution.points_to(value); }
};

/// Runs one of the three analyses. `allocators` is only read in Enhanced mode.
Analysis analyze(const ir::Program &program, Mode mode, const std::set<std::string> &allocators = {});

/// Target sets of every indirect callsite, from solved points-to sets.
callgraph::IndirectTargets resolve_indirect_calls(const Analysis &analysis);

/// {"mode", "values": {"f.v": [locations]}, "objects": [{id, site, origin, context, receiver}],
///  "icalls": {"site": [targets]}}
nlohmann::json to_json(const Analysis &analysis);

} // namespace scaf::pta
