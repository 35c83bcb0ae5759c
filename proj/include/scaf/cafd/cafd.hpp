#pragma once

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "scaf/callgraph/callgraph.hpp"
#include "scaf/ir/program.hpp"
#include "scaf/oracle/oracle.hpp"

namespace scaf::cafd {

enum class Provenance { Seed, Heuristic, OracleAssisted };

const char *to_string(Provenance p);

/// The allocator list. Members are never removed or re-labelled.
class AllocatorList {
public:
  /// The list holding every ExternalAllocatorSeed function of the program.
  static AllocatorList seeds(const ir::Program &program);

  bool contains(const std::string &name) const { return members_.contains(name); }
  /// Adds `name` unless present. Returns whether it was added.
  bool add(const std::string &name, Provenance provenance);

  const std::map<std::string, Provenance> &members() const { return members_; }
  std::set<std::string> names() const;
  std::size_t size() const { return members_.size(); }
  std::size_t count(Provenance p) const;

  bool operator==(const AllocatorList &) const = default;

private:
  std::map<std::string, Provenance> members_;
};

/// Per-function sets of side-effecting statements.
using SideEffectMap = std::map<std::string, std::set<ir::SiteId>>;

/// Whether a call statement counts as a call to an allocator.
using AllocatorCall = std::function<bool(const ir::Statement &, const ir::Call &)>;

/// Direct calls to members, and indirect calls whose resolved targets are a
/// non-empty subset of the list. Calls into `exclude_component_of`'s own
/// recursive component are not allocator calls.
AllocatorCall allocator_calls(const AllocatorList &al, const callgraph::CallGraph &graph,
                              const callgraph::Components *components = nullptr,
                              const std::string &exclude_component_of = {});

struct TrackState {
  std::map<std::string, bool> fw;
  std::map<std::string, bool> bt;
};

/// BT: a value only carries allocator results or NULL.
TrackState backward_track(const ir::Function &fn, const AllocatorCall &is_al_call);
/// FW: a value only flows, through copies and phis, into returns, and reaches one.
TrackState forward_track(const ir::Function &fn, const AllocatorCall &is_al_call);

SideEffectMap compute_side_effects(const ir::Program &program, const callgraph::CallGraph &graph);

struct Callsites {
  std::set<ir::SiteId> sites;
  std::set<std::string> functions;
};

Callsites collect_callsites(const ir::Program &program, const AllocatorList &al,
                            const callgraph::CallGraph &graph, const std::set<std::string> &visited);

struct Decision {
  std::string function;
  std::size_t iteration = 0;
  bool accepted = false;
  Provenance provenance = Provenance::Heuristic;
  /// "no-return", "backward-track", "dead-allocation", "forward-track" or "side-effects".
  std::string reason;
  std::vector<ir::SiteId> side_effects;
  bool oracle_consulted = false;
  std::optional<oracle::Verdict> verdict;
};

struct IdentifyOptions {
  /// When false, side-effecting candidates are rejected without a query.
  bool consult_oracle = true;
};

/// Decides one candidate. The caller guarantees it has an allocator call.
Decision identify_allocator(const ir::Function &fn, const AllocatorCall &is_al_call, const SideEffectMap &si,
                            oracle::IgnorabilityOracle &oracle, const IdentifyOptions &options = {});

struct Iteration {
  std::size_t index = 0;
  std::vector<std::string> analyzed;
  std::vector<std::string> added;
  std::size_t al_size = 0;
};

struct DetectOptions {
  bool consult_oracle = true;
  /// Resolve indirect calls by signature instead of a baseline points-to run.
  bool signature_targets = false;
};

struct DetectionResult {
  AllocatorList al;
  std::vector<Iteration> iterations;
  std::vector<Decision> decisions;
  oracle::Counters counters;
  double total_seconds = 0;

  std::size_t num1() const;
  std::size_t num2() const;
};

/// The fixpoint loop. Oracle transport errors propagate.
DetectionResult detect_scafs(const ir::Program &program, oracle::IgnorabilityOracle &oracle,
                             const DetectOptions &options = {});

/// Detection report. Timing lives under "timing" and is left out unless asked for.
nlohmann::json to_json(const DetectionResult &result, bool include_timing = true);

} // namespace scaf::cafd
