#include "scaf/pta/context.hpp"

#include "scaf/callgraph/callgraph.hpp"

namespace scaf::pta {

std::string clone_name(const std::string &function, const ir::SiteId &callsite) {
  return function + "@" + callsite.str();
}

ir::Program one_callsite_transform(const ir::Program &program) {
  // Recursion is judged on direct calls only.
  const callgraph::IndirectTargets none;
  auto comps = callgraph::strongly_connected_components(callgraph::build_call_graph(program, &none));
  auto taken = callgraph::address_taken(program);

  std::map<std::string, std::set<ir::SiteId>> callsites;
  for (const auto &[name, fn] : program.functions)
    for (const auto &stmt : fn.body)
      if (const auto *c = stmt.as<ir::Call>(); c && !c->is_indirect())
        callsites[c->callee].insert(stmt.site);

  auto cloned = [&](const std::string &name) {
    const ir::Function *fn = program.find(name);
    return fn && fn->is_defined() && name != program.entry && !comps.recursive(name) &&
           callsites.contains(name);
  };

  auto retarget = [&](ir::Function &fn) {
    for (auto &stmt : fn.body)
      if (auto *c = stmt.as<ir::Call>(); c && !c->is_indirect() && cloned(c->callee))
        c->callee = clone_name(c->callee, stmt.site);
  };

  ir::Program out;
  out.entry = program.entry;
  for (const auto &[name, fn] : program.functions) {
    if (!cloned(name) || taken.contains(name)) {
      ir::Function copy = fn;
      retarget(copy);
      out.functions.emplace(name, std::move(copy));
    }
    if (!cloned(name))
      continue;
    for (const auto &site : callsites.at(name)) {
      ir::Function copy = fn;
      copy.name = clone_name(name, site);
      copy.clone_of = name;
      copy.context = site;
      retarget(copy);
      out.functions.emplace(copy.name, std::move(copy));
    }
  }
  return out;
}

} // namespace scaf::pta
