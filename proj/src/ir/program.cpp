#include "scaf/ir/program.hpp"

#include <stdexcept>

#include "scaf/ir/text.hpp"

namespace scaf::ir {

const char *to_string(ValueType type) {
  return type == ValueType::Pointer ? "ptr" : "scalar";
}

const char *to_string(StmtKind kind) {
  switch (kind) {
  case StmtKind::Addr: return "addr";
  case StmtKind::Copy: return "copy";
  case StmtKind::Phi: return "phi";
  case StmtKind::NullAssign: return "null";
  case StmtKind::Store: return "store";
  case StmtKind::Load: return "load";
  case StmtKind::Field: return "field";
  case StmtKind::Call: return "call";
  case StmtKind::Return: return "ret";
  }
  return "?";
}

const char *to_string(ExternalClass cls) {
  switch (cls) {
  case ExternalClass::Defined: return "defined";
  case ExternalClass::ExternalPure: return "pure";
  case ExternalClass::ExternalSideEffecting: return "sideeffect";
  case ExternalClass::ExternalDeallocator: return "dealloc";
  case ExternalClass::ExternalAllocatorSeed: return "alloc_seed";
  }
  return "?";
}

std::string SiteId::str() const { return function + ":" + std::to_string(index); }

const Def *Statement::defined() const {
  return std::visit(
      [](const auto &s) -> const Def * {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Store> || std::is_same_v<T, Return>) {
          return nullptr;
        } else if constexpr (std::is_same_v<T, Call>) {
          return s.receiver ? &*s.receiver : nullptr;
        } else {
          return &s.result;
        }
      },
      op);
}

std::vector<const Operand *> Statement::operands() const {
  std::vector<const Operand *> out;
  std::visit(
      [&](const auto &s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Copy>) {
          out.push_back(&s.source);
        } else if constexpr (std::is_same_v<T, Phi>) {
          for (const auto &o : s.incoming)
            out.push_back(&o);
        } else if constexpr (std::is_same_v<T, Store>) {
          out.push_back(&s.address);
          out.push_back(&s.payload);
        } else if constexpr (std::is_same_v<T, Load>) {
          out.push_back(&s.address);
        } else if constexpr (std::is_same_v<T, Field>) {
          out.push_back(&s.base);
        } else if constexpr (std::is_same_v<T, Call>) {
          if (s.callee_value)
            out.push_back(&*s.callee_value);
          for (const auto &a : s.args)
            out.push_back(&a);
        } else if constexpr (std::is_same_v<T, Return>) {
          if (s.value)
            out.push_back(&*s.value);
        }
      },
      op);
  return out;
}

std::optional<ValueType> Function::type_of(const std::string &value) const {
  for (const auto &p : params)
    if (p.name == value)
      return p.type;
  for (const auto &stmt : body)
    if (const Def *d = stmt.defined(); d && d->name == value)
      return d->type;
  return std::nullopt;
}

ResultKind result_kind(const Function &fn) {
  if (fn.is_external())
    return ResultKind::Unknown;
  ResultKind kind = ResultKind::Void;
  for (const auto &stmt : fn.body) {
    const auto *ret = stmt.as<Return>();
    if (!ret || !ret->value)
      continue;
    if (!ret->value->is_value())
      return ResultKind::Pointer;
    auto type = fn.type_of(ret->value->name);
    if (type == ValueType::Pointer)
      return ResultKind::Pointer;
    if (type == ValueType::Scalar)
      kind = ResultKind::Scalar;
  }
  return kind;
}

const Function *Program::find(const std::string &name) const {
  auto it = functions.find(name);
  return it == functions.end() ? nullptr : &it->second;
}

const Function &Program::at(const std::string &name) const {
  const Function *fn = find(name);
  if (!fn)
    throw std::out_of_range("no function named '" + name + "'");
  return *fn;
}

const Statement *Program::statement(const std::string &function, const SiteId &site) const {
  const Function *fn = find(function);
  if (!fn)
    return nullptr;
  for (const auto &stmt : fn->body)
    if (stmt.site == site)
      return &stmt;
  return nullptr;
}

std::uint64_t fingerprint(const Program &program) {
  // FNV-1a over the canonical text.
  std::uint64_t hash = 0xcbf29ce484222325ull;
  for (unsigned char c : print_program(program)) {
    hash ^= c;
    hash *= 0x100000001b3ull;
  }
  return hash;
}

} // namespace scaf::ir
