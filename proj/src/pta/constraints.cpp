#include "scaf/pta/constraints.hpp"

#include <stdexcept>

namespace scaf::pta {

using ir::ExternalClass;
using ir::Function;
using ir::Operand;

const char *to_string(Origin origin) { return origin == Origin::SeedSite ? "seed" : "modeled"; }

const char *to_string(Mode mode) {
  switch (mode) {
  case Mode::Baseline: return "baseline";
  case Mode::Enhanced: return "enhanced";
  case Mode::OneCallsite: return "1ctx";
  }
  return "?";
}

std::string HeapObject::str() const {
  std::string out = origin == Origin::ModeledSite ? "modeled " + site.str() : site.str();
  if (context)
    out += " [" + context->str() + "]";
  return out;
}

std::optional<Location> Location::with_field(const std::string &name) const {
  if (is_function())
    return std::nullopt;
  return Location{object, {}, name};
}

std::string Location::str() const {
  if (is_function())
    return "@" + function;
  return field.empty() ? object->str() : object->str() + "." + field;
}

int ConstraintSet::node(const ValueId &value) {
  auto [it, inserted] = index.emplace(value, static_cast<int>(nodes.size()));
  if (inserted)
    nodes.push_back(value);
  return it->second;
}

std::optional<int> ConstraintSet::find(const ValueId &value) const {
  auto it = index.find(value);
  if (it == index.end())
    return std::nullopt;
  return it->second;
}

HeapObject icall_object(const IndirectCall &call, Dispatch dispatch) {
  Origin origin = dispatch == Dispatch::ModeledObject ? Origin::ModeledSite : Origin::SeedSite;
  return {call.site, origin, call.context};
}

namespace {

class Generator {
public:
  Generator(const ir::Program &program, Mode mode, const std::set<std::string> &allocators)
      : program_(program), mode_(mode), allocators_(allocators) {}

  ConstraintSet run() {
    if (mode_ == Mode::Enhanced)
      for (const auto &name : allocators_) {
        const Function *fn = program_.find(name);
        if (!fn)
          throw std::invalid_argument("allocator '" + name + "' is not in the program");
        if (fn->is_external() && fn->external_class != ExternalClass::ExternalAllocatorSeed)
          throw std::invalid_argument("allocator '" + name + "' is an external non-allocator");
      }
    for (const auto &[name, fn] : program_.functions)
      out_.callees[name] = callee(fn);
    for (const auto &[name, fn] : program_.functions)
      if (fn.is_defined() && !modeled(name))
        body(fn);
    return std::move(out_);
  }

private:
  bool modeled(const std::string &name) const {
    if (mode_ != Mode::Enhanced || !allocators_.contains(name))
      return false;
    const Function *fn = program_.find(name);
    return fn && fn->is_defined();
  }

  Dispatch dispatch(const Function &fn) const {
    if (fn.external_class == ExternalClass::ExternalAllocatorSeed)
      return Dispatch::SeedObject;
    if (modeled(fn.name))
      return Dispatch::ModeledObject;
    return fn.is_defined() ? Dispatch::Bind : Dispatch::Ignore;
  }

  Callee callee(const Function &fn) {
    Callee c;
    c.dispatch = dispatch(fn);
    if (fn.is_external())
      return c;
    c.arity = fn.params.size();
    if (c.dispatch != Dispatch::Bind)
      return c;
    for (const auto &p : fn.params)
      c.params.push_back(out_.node({fn.name, p.name}));
    for (const auto &stmt : fn.body)
      if (const auto *r = stmt.as<ir::Return>(); r && r->value)
        if (auto n = operand(fn, *r->value))
          c.returns.push_back(*n);
    return c;
  }

  std::optional<int> operand(const Function &fn, const Operand &o) {
    switch (o.kind) {
    case Operand::Kind::Null: return std::nullopt;
    case Operand::Kind::Value: return out_.node({fn.name, o.name});
    case Operand::Kind::Function: break;
    }
    ValueId constant{"", "@" + o.name};
    bool fresh = !out_.index.contains(constant);
    int n = out_.node(constant);
    if (fresh)
      out_.addrs.push_back({n, Location::of_function(o.name)});
    return n;
  }

  int def(const Function &fn, const ir::Def &d) { return out_.node({fn.name, d.name}); }

  void allocate(const Function &fn, const ir::Statement &stmt, const ir::Call &call, Origin origin) {
    HeapObject obj{stmt.site, origin, fn.context};
    std::optional<ValueId> receiver;
    if (call.receiver) {
      receiver = ValueId{fn.name, call.receiver->name};
      out_.addrs.push_back({def(fn, *call.receiver), Location::base(obj)});
    }
    out_.objects.emplace(obj, receiver);
  }

  void body(const Function &fn) {
    for (const auto &stmt : fn.body) {
      std::visit(
          [&](const auto &s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, ir::Addr>) {
              HeapObject obj{stmt.site, Origin::SeedSite, fn.context};
              out_.addrs.push_back({def(fn, s.result), Location::base(obj)});
              out_.objects.emplace(obj, ValueId{fn.name, s.result.name});
            } else if constexpr (std::is_same_v<T, ir::Copy>) {
              copy(def(fn, s.result), operand(fn, s.source));
            } else if constexpr (std::is_same_v<T, ir::Phi>) {
              int d = def(fn, s.result);
              for (const auto &in : s.incoming)
                copy(d, operand(fn, in));
            } else if constexpr (std::is_same_v<T, ir::NullAssign>) {
              def(fn, s.result);
            } else if constexpr (std::is_same_v<T, ir::Store>) {
              auto dst = operand(fn, s.address);
              auto src = operand(fn, s.payload);
              if (dst && src)
                out_.stores.push_back({*dst, *src});
            } else if constexpr (std::is_same_v<T, ir::Load>) {
              int d = def(fn, s.result);
              if (auto src = operand(fn, s.address))
                out_.loads.push_back({d, *src});
            } else if constexpr (std::is_same_v<T, ir::Field>) {
              int d = def(fn, s.result);
              if (auto base = operand(fn, s.base))
                out_.fields.push_back({d, *base, s.field});
            } else if constexpr (std::is_same_v<T, ir::Call>) {
              call(fn, stmt, s);
            } else if constexpr (std::is_same_v<T, ir::Return>) {
              if (s.value)
                operand(fn, *s.value);
            }
          },
          stmt.op);
    }
  }

  void copy(int dst, std::optional<int> src) {
    if (src)
      out_.copies.push_back({dst, *src});
  }

  void call(const Function &fn, const ir::Statement &stmt, const ir::Call &c) {
    std::optional<int> receiver;
    if (c.receiver)
      receiver = def(fn, *c.receiver);
    std::vector<std::optional<int>> args;
    for (const auto &a : c.args)
      args.push_back(operand(fn, a));

    if (c.is_indirect()) {
      IndirectCall ic{stmt.site, fn.context, fn.name, 0, std::move(args), receiver};
      auto callee = operand(fn, *c.callee_value);
      if (!callee)
        return;
      ic.callee = *callee;
      out_.icalls.push_back(std::move(ic));
      return;
    }

    const Callee &target = out_.callees.at(c.callee);
    switch (target.dispatch) {
    case Dispatch::SeedObject: allocate(fn, stmt, c, Origin::SeedSite); break;
    case Dispatch::ModeledObject: allocate(fn, stmt, c, Origin::ModeledSite); break;
    case Dispatch::Bind:
      for (std::size_t i = 0; i < args.size() && i < target.params.size(); ++i)
        if (args[i] && target.params[i])
          out_.copies.push_back({*target.params[i], *args[i]});
      if (receiver)
        for (int r : target.returns)
          out_.copies.push_back({*receiver, r});
      break;
    case Dispatch::Ignore: break;
    }
  }

  const ir::Program &program_;
  Mode mode_;
  const std::set<std::string> &allocators_;
  ConstraintSet out_;
};

} // namespace

ConstraintSet generate_constraints(const ir::Program &program, Mode mode,
                                   const std::set<std::string> &allocators) {
  return Generator(program, mode, allocators).run();
}

} // namespace scaf::pta
