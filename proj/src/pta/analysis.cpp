#include "scaf/pta/analysis.hpp"

#include "scaf/pta/context.hpp"

namespace scaf::pta {

Analysis analyze(const ir::Program &program, Mode mode, const std::set<std::string> &allocators) {
  Analysis a;
  a.mode = mode;
  a.source_fingerprint = ir::fingerprint(program);
  a.program = mode == Mode::OneCallsite ? one_callsite_transform(program) : program;
  if (mode == Mode::Enhanced)
    a.allocators = allocators;
  ConstraintSet cs = generate_constraints(a.program, mode, a.allocators);
  a.solution = solve(cs);
  for (const auto &[obj, receiver] : cs.objects)
    a.objects.emplace(obj, ObjectRecord{obj, receiver});
  for (const auto &[obj, receiver] : a.solution.icall_objects)
    a.objects.emplace(obj, ObjectRecord{obj, receiver});
  return a;
}

callgraph::IndirectTargets resolve_indirect_calls(const Analysis &analysis) {
  return analysis.solution.icall_targets;
}

nlohmann::json to_json(const Analysis &analysis) {
  nlohmann::json values = nlohmann::json::object();
  for (const auto &[v, set] : analysis.solution.pts) {
    nlohmann::json locs = nlohmann::json::array();
    for (const auto &l : set)
      locs.push_back(l.str());
    values[v.str()] = std::move(locs);
  }
  nlohmann::json objects = nlohmann::json::array();
  for (const auto &[obj, rec] : analysis.objects) {
    nlohmann::json o = {{"id", obj.str()}, {"site", obj.site.str()}, {"origin", to_string(obj.origin)}};
    o["context"] = obj.context ? nlohmann::json(obj.context->str()) : nlohmann::json(nullptr);
    o["receiver"] = rec.receiver ? nlohmann::json(rec.receiver->str()) : nlohmann::json(nullptr);
    objects.push_back(std::move(o));
  }
  nlohmann::json icalls = nlohmann::json::object();
  for (const auto &[site, targets] : analysis.solution.icall_targets)
    icalls[site.str()] = targets;
  return {{"mode", to_string(analysis.mode)}, {"values", values}, {"objects", objects}, {"icalls", icalls}};
}

} // namespace scaf::pta
