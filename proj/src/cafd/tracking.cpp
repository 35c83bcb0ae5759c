#include "scaf/cafd/cafd.hpp"

namespace scaf::cafd {

using ir::Operand;
using ir::Statement;

AllocatorCall allocator_calls(const AllocatorList &al, const callgraph::CallGraph &graph,
                              const callgraph::Components *components, const std::string &exclude_component_of) {
  return [al, &graph, components, exclude_component_of](const Statement &stmt, const ir::Call &call) {
    auto targets = graph.targets(stmt.site, call);
    if (targets.empty())
      return false;
    for (const auto &t : targets) {
      if (!al.contains(t))
        return false;
      if (components && !exclude_component_of.empty() && components->recursive(exclude_component_of) &&
          components->same_component(t, exclude_component_of))
        return false;
    }
    return true;
  };
}

namespace {

struct Uses {
  // Statements reading each value, in body order.
  std::map<std::string, std::vector<const Statement *>> of;

  explicit Uses(const ir::Function &fn) {
    for (const auto &stmt : fn.body)
      for (const Operand *o : stmt.operands())
        if (o->is_value())
          of[o->name].push_back(&stmt);
  }
  const std::vector<const Statement *> &at(const std::string &v) const {
    static const std::vector<const Statement *> none;
    auto it = of.find(v);
    return it == of.end() ? none : it->second;
  }
};

} // namespace

TrackState backward_track(const ir::Function &fn, const AllocatorCall &is_al_call) {
  TrackState st;
  auto &bt = st.bt;
  for (const auto &p : fn.params)
    bt[p.name] = false;
  for (const auto &stmt : fn.body)
    if (const ir::Def *d = stmt.defined())
      bt[d->name] = true;

  auto operand_ok = [&](const Operand &o) {
    if (o.is_null())
      return true;
    if (o.is_function())
      return false;
    return bt.at(o.name);
  };

  // Greatest fixpoint: start from true and only ever lower.
  for (bool changed = true; changed;) {
    changed = false;
    for (const auto &stmt : fn.body) {
      const ir::Def *d = stmt.defined();
      if (!d || !bt.at(d->name))
        continue;
      bool ok = true;
      if (d->type != ir::ValueType::Pointer) {
        ok = false;
      } else if (const auto *c = stmt.as<ir::Copy>()) {
        ok = operand_ok(c->source);
      } else if (const auto *p = stmt.as<ir::Phi>()) {
        for (const auto &in : p->incoming)
          ok = ok && operand_ok(in);
      } else if (const auto *call = stmt.as<ir::Call>()) {
        ok = is_al_call(stmt, *call);
      } else {
        ok = stmt.as<ir::Addr>() || stmt.as<ir::NullAssign>();
      }
      if (!ok) {
        bt[d->name] = false;
        changed = true;
      }
    }
  }
  return st;
}

TrackState forward_track(const ir::Function &fn, const AllocatorCall &) {
  TrackState st;
  Uses uses(fn);
  std::vector<std::string> values;
  for (const auto &p : fn.params)
    values.push_back(p.name);
  for (const auto &stmt : fn.body)
    if (const ir::Def *d = stmt.defined())
      values.push_back(d->name);

  auto flows_to = [](const Statement &use) -> const ir::Def * {
    if (use.as<ir::Copy>() || use.as<ir::Phi>())
      return use.defined();
    return nullptr;
  };

  // only[v]: every use is a return or moves v into a value with only[] set.
  std::map<std::string, bool> only;
  for (const auto &v : values)
    only[v] = true;
  for (bool changed = true; changed;) {
    changed = false;
    for (const auto &v : values) {
      if (!only[v])
        continue;
      for (const Statement *u : uses.at(v)) {
        const ir::Def *next = flows_to(*u);
        if (u->as<ir::Return>() || (next && only[next->name]))
          continue;
        only[v] = false;
        changed = true;
        break;
      }
    }
  }

  // reaches[v]: some chain of copies and phis from v ends in a return.
  std::map<std::string, bool> reaches;
  for (const auto &v : values)
    reaches[v] = false;
  for (bool changed = true; changed;) {
    changed = false;
    for (const auto &v : values) {
      if (reaches[v])
        continue;
      for (const Statement *u : uses.at(v)) {
        const ir::Def *next = flows_to(*u);
        if (u->as<ir::Return>() || (next && reaches[next->name])) {
          reaches[v] = true;
          changed = true;
          break;
        }
      }
    }
  }

  for (const auto &v : values)
    st.fw[v] = only[v] && reaches[v];
  return st;
}

} // namespace scaf::cafd
