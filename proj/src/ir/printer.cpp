#include <sstream>

#include "scaf/ir/text.hpp"

namespace scaf::ir {

namespace {

std::string operand(const Operand &o) {
  switch (o.kind) {
  case Operand::Kind::Null: return "null";
  case Operand::Kind::Function: return "@" + o.name;
  case Operand::Kind::Value: break;
  }
  return o.name;
}

// Load and call results default to ptr, so only scalar needs spelling out.
std::string def(const Def &d, bool print_scalar) {
  if (print_scalar && d.type == ValueType::Scalar)
    return d.name + ":scalar";
  return d.name;
}

std::string call(const Call &c) {
  std::string out = c.is_indirect() ? "icall " + operand(*c.callee_value) : "call " + c.callee;
  out += '(';
  for (std::size_t i = 0; i < c.args.size(); ++i) {
    if (i)
      out += ", ";
    out += operand(c.args[i]);
  }
  return out + ')';
}

} // namespace

std::string print_statement(const Statement &stmt) {
  return std::visit(
      [](const auto &s) -> std::string {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Addr>) {
          return def(s.result, false) + " = addr";
        } else if constexpr (std::is_same_v<T, Copy>) {
          return def(s.result, false) + " = copy " + operand(s.source);
        } else if constexpr (std::is_same_v<T, Phi>) {
          std::string out = def(s.result, false) + " = phi ";
          for (std::size_t i = 0; i < s.incoming.size(); ++i) {
            if (i)
              out += ", ";
            out += operand(s.incoming[i]);
          }
          return out;
        } else if constexpr (std::is_same_v<T, NullAssign>) {
          return def(s.result, false) + " = null";
        } else if constexpr (std::is_same_v<T, Store>) {
          return "store " + operand(s.address) + ", " + operand(s.payload);
        } else if constexpr (std::is_same_v<T, Load>) {
          return def(s.result, true) + " = load " + operand(s.address);
        } else if constexpr (std::is_same_v<T, Field>) {
          return def(s.result, false) + " = field " + operand(s.base) + ", " + s.field;
        } else if constexpr (std::is_same_v<T, Call>) {
          if (s.receiver)
            return def(*s.receiver, true) + " = " + call(s);
          return call(s);
        } else {
          return s.value ? "ret " + operand(*s.value) : std::string("ret");
        }
      },
      stmt.op);
}

std::string print_body(const Function &fn) {
  std::string out;
  for (const auto &stmt : fn.body)
    out += print_statement(stmt) + "\n";
  return out;
}

std::string print_program(const Program &program) {
  std::ostringstream os;
  if (program.entry)
    os << "entry " << *program.entry << "\n\n";
  bool first = true;
  for (const auto &[name, fn] : program.functions) {
    if (fn.is_external()) {
      os << "extern " << name << " kind=" << to_string(fn.external_class) << "\n";
      continue;
    }
    if (!first || program.entry)
      os << "\n";
    first = false;
    os << "func " << name << "(";
    for (std::size_t i = 0; i < fn.params.size(); ++i) {
      if (i)
        os << ", ";
      os << fn.params[i].name << ":" << to_string(fn.params[i].type);
    }
    os << ") {\n";
    if (fn.source_text)
      os << "  source <<<\n" << *fn.source_text << "\n  >>>\n";
    for (const auto &stmt : fn.body)
      os << "  " << print_statement(stmt) << "\n";
    os << "}\n";
  }
  return os.str();
}

} // namespace scaf::ir
