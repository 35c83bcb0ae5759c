#include "scaf/callgraph/callgraph.hpp"

#include <algorithm>
#include <functional>
#include <queue>

namespace scaf::callgraph {

using ir::Call;
using ir::Function;
using ir::Program;

std::set<std::string> CallGraph::callees(const std::string &caller) const {
  std::set<std::string> out;
  for (auto it = edges.lower_bound(Edge{caller, {}, {}}); it != edges.end() && it->caller == caller; ++it)
    out.insert(it->callee);
  return out;
}

std::set<std::string> CallGraph::targets(const ir::SiteId &site, const Call &call) const {
  if (!call.is_indirect())
    return {call.callee};
  auto it = indirect_targets.find(site);
  return it == indirect_targets.end() ? std::set<std::string>{} : it->second;
}

std::set<std::string> address_taken(const Program &program) {
  std::set<std::string> out;
  for (const auto &[name, fn] : program.functions)
    for (const auto &stmt : fn.body)
      for (const ir::Operand *o : stmt.operands())
        if (o->is_function())
          out.insert(o->name);
  return out;
}

bool signature_matches(const Call &call, const Function &target) {
  if (target.is_external())
    return true;
  if (target.params.size() != call.args.size())
    return false;
  if (!call.receiver)
    return true;
  ir::ResultKind want = call.receiver->type == ir::ValueType::Pointer ? ir::ResultKind::Pointer
                                                                      : ir::ResultKind::Scalar;
  return ir::result_kind(target) == want;
}

CallGraph build_call_graph(const Program &program, const IndirectTargets *resolved) {
  CallGraph g;
  std::set<std::string> taken;
  if (!resolved)
    taken = address_taken(program);
  for (const auto &[name, fn] : program.functions) {
    g.nodes.insert(name);
    for (const auto &stmt : fn.body) {
      const Call *call = stmt.as<Call>();
      if (!call)
        continue;
      if (!call->is_indirect()) {
        g.edges.insert({name, stmt.site, call->callee});
        continue;
      }
      std::set<std::string> &targets = g.indirect_targets[stmt.site];
      if (resolved) {
        if (auto it = resolved->find(stmt.site); it != resolved->end())
          targets = it->second;
      } else {
        for (const auto &t : taken)
          if (const Function *target = program.find(t); target && signature_matches(*call, *target))
            targets.insert(t);
      }
      for (const auto &t : targets)
        g.edges.insert({name, stmt.site, t});
    }
  }
  return g;
}

bool Components::same_component(const std::string &a, const std::string &b) const {
  auto ia = index_of.find(a);
  auto ib = index_of.find(b);
  return ia != index_of.end() && ib != index_of.end() && ia->second == ib->second;
}

Components strongly_connected_components(const CallGraph &graph) {
  std::vector<std::string> names(graph.nodes.begin(), graph.nodes.end());
  std::map<std::string, int> id;
  for (std::size_t i = 0; i < names.size(); ++i)
    id[names[i]] = static_cast<int>(i);
  const int n = static_cast<int>(names.size());
  std::vector<std::set<int>> succ(n);
  std::vector<bool> self_loop(n, false);
  for (const Edge &e : graph.edges) {
    auto a = id.find(e.caller);
    auto b = id.find(e.callee);
    if (a == id.end() || b == id.end())
      continue;
    if (a->second == b->second)
      self_loop[a->second] = true;
    else
      succ[a->second].insert(b->second);
  }

  // Tarjan, iterative.
  std::vector<int> index(n, -1), low(n, 0), comp(n, -1);
  std::vector<bool> on_stack(n, false);
  std::vector<int> stack;
  int counter = 0, ncomp = 0;
  for (int root = 0; root < n; ++root) {
    if (index[root] != -1)
      continue;
    std::vector<std::pair<int, std::set<int>::const_iterator>> work;
    auto visit = [&](int v) {
      index[v] = low[v] = counter++;
      stack.push_back(v);
      on_stack[v] = true;
      work.push_back({v, succ[v].begin()});
    };
    visit(root);
    while (!work.empty()) {
      auto &[v, it] = work.back();
      if (it != succ[v].end()) {
        int w = *it++;
        if (index[w] == -1)
          visit(w);
        else if (on_stack[w])
          low[v] = std::min(low[v], index[w]);
        continue;
      }
      if (low[v] == index[v]) {
        for (;;) {
          int w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          comp[w] = ncomp;
          if (w == v)
            break;
        }
        ++ncomp;
      }
      int done = v;
      work.pop_back();
      if (!work.empty())
        low[work.back().first] = std::min(low[work.back().first], low[done]);
    }
  }

  // Kahn over the condensation, callees first.
  std::vector<std::vector<std::string>> members(ncomp);
  for (int v = 0; v < n; ++v)
    members[comp[v]].push_back(names[v]);
  for (auto &m : members)
    std::sort(m.begin(), m.end());
  std::vector<std::set<int>> callers(ncomp);
  std::vector<int> pending(ncomp, 0);
  for (int v = 0; v < n; ++v)
    for (int w : succ[v])
      if (comp[v] != comp[w] && callers[comp[w]].insert(comp[v]).second)
        ++pending[comp[v]];
  auto later = [&](int a, int b) { return members[a].front() > members[b].front(); };
  std::priority_queue<int, std::vector<int>, decltype(later)> ready(later);
  for (int c = 0; c < ncomp; ++c)
    if (pending[c] == 0)
      ready.push(c);

  Components out;
  while (!ready.empty()) {
    int c = ready.top();
    ready.pop();
    std::size_t pos = out.members.size();
    for (const auto &m : members[c]) {
      out.index_of[m] = pos;
      if (members[c].size() > 1 || self_loop[id[m]])
        out.recursive_.insert(m);
    }
    out.members.push_back(members[c]);
    for (int caller : callers[c])
      if (--pending[caller] == 0)
        ready.push(caller);
  }
  return out;
}

std::vector<std::string> bottom_up_order(const CallGraph &graph, const std::set<std::string> &focus) {
  std::vector<std::string> out;
  if (focus.empty())
    return out;
  Components comps = strongly_connected_components(graph);
  for (const auto &component : comps.members)
    for (const auto &m : component)
      if (focus.contains(m))
        out.push_back(m);
  return out;
}

} // namespace scaf::callgraph
