#include "scaf/ir/validate.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace scaf::ir {

namespace {

class FunctionChecker {
public:
  FunctionChecker(const Program &program, const Function &fn, std::vector<Violation> &out)
      : program_(program), fn_(fn), out_(out) {}

  void run() {
    if (fn_.is_external()) {
      if (!fn_.body.empty() || !fn_.params.empty())
        report(std::nullopt, "external-body", "external function has a body or parameters");
      return;
    }
    if (fn_.body.empty())
      report(std::nullopt, "missing-body", "defined function has no statements");

    collect_definitions();
    std::set<std::pair<std::optional<SiteId>, SiteId>> sites;
    for (const auto &stmt : fn_.body) {
      if (!sites.insert({fn_.context, stmt.site}).second)
        report(stmt.site, "duplicate-site", "site id " + stmt.site.str() + " appears twice");
      check_operands(stmt);
      check_types(stmt);
    }
  }

private:
  void report(std::optional<SiteId> site, std::string rule, std::string message) {
    out_.push_back({fn_.name, std::move(site), std::move(rule), std::move(message)});
  }

  void collect_definitions() {
    std::map<std::string, int> count;
    for (const auto &p : fn_.params) {
      types_[p.name] = p.type;
      ++count[p.name];
    }
    for (const auto &stmt : fn_.body) {
      const Def *d = stmt.defined();
      if (!d)
        continue;
      if (++count[d->name] == 2)
        report(stmt.site, "single-assignment", "value '" + d->name + "' is defined more than once");
      types_.try_emplace(d->name, d->type);
    }
  }

  std::optional<ValueType> type(const Operand &o) const {
    if (!o.is_value())
      return ValueType::Pointer;
    auto it = types_.find(o.name);
    if (it == types_.end())
      return std::nullopt;
    return it->second;
  }

  void check_operands(const Statement &stmt) {
    for (const Operand *o : stmt.operands()) {
      if (o->is_value() && !types_.contains(o->name))
        report(stmt.site, "undefined-operand", "value '" + o->name + "' is not defined");
      if (o->is_function() && !program_.find(o->name))
        report(stmt.site, "unknown-function", "no function named '" + o->name + "'");
    }
    if (const auto *c = stmt.as<Call>(); c && !c->is_indirect() && !program_.find(c->callee))
      report(stmt.site, "unknown-callee", "no function named '" + c->callee + "'");

    // NULL may only be stored, returned, or assigned.
    bool null_allowed_everywhere = stmt.as<Return>() != nullptr;
    for (const Operand *o : stmt.operands()) {
      if (!o->is_null() || null_allowed_everywhere)
        continue;
      if (const auto *s = stmt.as<Store>(); s && o == &s->payload)
        continue;
      report(stmt.site, "null-placement", "NULL used outside a store payload or return");
    }
  }

  void require_pointer(const Statement &stmt, const Operand &o, const char *role) {
    if (type(o) == ValueType::Scalar)
      report(stmt.site, "type-agreement", std::string(role) + " '" + o.name + "' must be a pointer");
  }

  void check_types(const Statement &stmt) {
    std::visit(
        [&](const auto &s) {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, Store>) {
            require_pointer(stmt, s.address, "store target");
          } else if constexpr (std::is_same_v<T, Load>) {
            require_pointer(stmt, s.address, "load address");
          } else if constexpr (std::is_same_v<T, Field>) {
            require_pointer(stmt, s.base, "field base");
            if (s.result.type != ValueType::Pointer)
              report(stmt.site, "type-agreement", "field result must be a pointer");
          } else if constexpr (std::is_same_v<T, Addr> || std::is_same_v<T, NullAssign>) {
            if (s.result.type != ValueType::Pointer)
              report(stmt.site, "type-agreement", "'" + s.result.name + "' must be a pointer");
          } else if constexpr (std::is_same_v<T, Copy>) {
            auto src = type(s.source);
            if (src && *src != s.result.type)
              report(stmt.site, "type-agreement", "copy changes the type of '" + s.result.name + "'");
          } else if constexpr (std::is_same_v<T, Phi>) {
            if (s.incoming.empty())
              report(stmt.site, "phi-arity", "phi has no operands");
            for (const auto &in : s.incoming) {
              auto t = type(in);
              if (t && *t != s.result.type) {
                report(stmt.site, "type-agreement", "phi operand types disagree for '" + s.result.name + "'");
                break;
              }
            }
          } else if constexpr (std::is_same_v<T, Call>) {
            if (s.callee_value)
              require_pointer(stmt, *s.callee_value, "indirect callee");
          }
        },
        stmt.op);
  }

  const Program &program_;
  const Function &fn_;
  std::vector<Violation> &out_;
  std::map<std::string, ValueType> types_;
};

} // namespace

std::vector<Violation> validate(const Program &program) {
  std::vector<Violation> out;
  if (program.entry) {
    const Function *entry = program.find(*program.entry);
    if (!entry || entry->is_external())
      out.push_back({*program.entry, std::nullopt, "entry", "entry is not a defined function"});
  }
  for (const auto &[name, fn] : program.functions) {
    if (fn.name != name)
      out.push_back({name, std::nullopt, "name-mismatch", "map key differs from function name"});
    FunctionChecker(program, fn, out).run();
  }
  std::sort(out.begin(), out.end());
  return out;
}

} // namespace scaf::ir
