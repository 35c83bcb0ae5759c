#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "scaf/ir/program.hpp"

namespace scaf::callgraph {

struct Edge {
  std::string caller;
  ir::SiteId site;
  std::string callee;

  auto operator<=>(const Edge &) const = default;
};

/// Candidate targets of each indirect callsite.
using IndirectTargets = std::map<ir::SiteId, std::set<std::string>>;

struct CallGraph {
  std::set<std::string> nodes;
  std::set<Edge> edges;
  IndirectTargets indirect_targets;

  std::set<std::string> callees(const std::string &caller) const;
  /// Targets of the call at `site`: the direct callee, or the indirect candidates.
  std::set<std::string> targets(const ir::SiteId &site, const ir::Call &call) const;
};

/// Functions whose address is taken with `@name` anywhere in the program.
std::set<std::string> address_taken(const ir::Program &program);

/// Whether `target` could be called from `call`: same parameter count and a
/// compatible result kind. External functions have no declared signature and
/// match any call.
bool signature_matches(const ir::Call &call, const ir::Function &target);

/// Builds the call graph. Indirect callsites take their targets from
/// `resolved` when given (sites missing from it get none); otherwise every
/// address-taken function with a matching signature is a candidate.
CallGraph build_call_graph(const ir::Program &program, const IndirectTargets *resolved = nullptr);

struct Components {
  /// Components in callee-first order; members are name-sorted.
  std::vector<std::vector<std::string>> members;
  std::map<std::string, std::size_t> index_of;

  /// True for members of a multi-node component or functions calling themselves.
  bool recursive(const std::string &fn) const { return recursive_.contains(fn); }
  bool same_component(const std::string &a, const std::string &b) const;

  std::set<std::string> recursive_;
};

/// Strongly connected components, ordered so that callees precede callers.
/// Ties between independent components break by their smallest member name.
Components strongly_connected_components(const CallGraph &graph);

/// Bottom-up order over `focus`: callees before callers, members of one
/// component adjacent and name-sorted.
std::vector<std::string> bottom_up_order(const CallGraph &graph, const std::set<std::string> &focus);

} // namespace scaf::callgraph
