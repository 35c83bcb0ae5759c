#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>

#include <json.hpp>

#include "scaf/callgraph/callgraph.hpp"
#include "scaf/pta/analysis.hpp"

namespace scaf::metrics {

using pta::HeapObject;
using pta::ValueId;

struct ObjectPartition {
  std::set<HeapObject> killed;
  std::set<HeapObject> added;
  std::set<HeapObject> retained;
};

/// K, A and R for an Enhanced result against its Baseline.
/// Throws std::invalid_argument when the results come from different programs.
ObjectPartition partition_objects(const pta::Analysis &baseline, const pta::Analysis &enhanced,
                                  const std::set<std::string> &allocators);

/// The same split for a OneCallsite result: context-tagged objects are added,
/// untagged ones retained, and baseline objects that were cloned are killed.
ObjectPartition partition_by_context(const pta::Analysis &baseline, const pta::Analysis &one_callsite);

struct DerivedMaps {
  /// Pointer-typed top-level values pointing at each object's base cell.
  std::map<HeapObject, std::set<ValueId>> pbs;
  /// Pointer-typed top-level values sharing a location with each value.
  std::map<ValueId, std::set<ValueId>> as;
  std::map<HeapObject, ValueId> ar;
  /// Clone name to original function, for values of a cloned program.
  std::map<std::string, std::string> origin;

  std::size_t pbs_size(const HeapObject &o) const;
  std::size_t as_size(const ValueId &v) const;
  /// The value as spelled in the uncloned program.
  ValueId original(const ValueId &v) const;
};

DerivedMaps derive_maps(const pta::Analysis &analysis);

struct MetricsReport {
  std::pair<std::size_t, std::size_t> thoc;
  std::size_t sup = 0;
  std::optional<double> k_mean, a_mean, ro_mean, re_mean, aso_mean, ase_mean;
  /// Fractions in [.., 1]; absent when undefined.
  std::optional<double> prr1, prr2, arr, er;
};

MetricsReport compute_metrics(const ObjectPartition &partition, const DerivedMaps &baseline,
                              const DerivedMaps &enhanced);

struct IcallReport {
  std::size_t tn = 0;
  std::size_t on = 0;
  std::optional<double> oa, ea;
};

IcallReport icall_metrics(const callgraph::IndirectTargets &baseline, const callgraph::IndirectTargets &enhanced);

/// Half-up rounding of a fraction to a one-decimal percentage.
double percent(double fraction);

/// {thoc, sup, pc1, prr1, pc2, prr2, anc, arr, er, icalls}
nlohmann::json to_json(const MetricsReport &report, const IcallReport &icalls);
nlohmann::json to_json(const IcallReport &icalls);

} // namespace scaf::metrics
