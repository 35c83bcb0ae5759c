#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include "scaf/ir/program.hpp"

namespace scaf::ir {

/// Raised by parse_program. Line and column are 1-based.
class ParseError : public std::runtime_error {
public:
  ParseError(std::size_t line, std::size_t column, const std::string &message);

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }
  const std::string &detail() const { return detail_; }

private:
  std::size_t line_;
  std::size_t column_;
  std::string detail_;
};

/// Parses the line-oriented textual IR.
///
///   entry NAME
///   extern NAME kind=pure|sideeffect|dealloc|alloc_seed
///   func NAME(a:ptr, b:scalar) {
///     source <<<
///     ...free text...
///     >>>
///     v = copy w | v = phi w1, w2 | v = null | v = addr
///     store p, q | store p, null
///     v = load p | v = field p, NAME
///     v = call NAME(a, b) | v = icall fp(a, b) | call NAME(...)
///     ret v | ret null | ret
///   }
///
/// Definitions may carry `:ptr` or `:scalar` (`v:scalar = load p`); load,
/// field and call results default to ptr, copy and phi inherit their operand
/// type. `@NAME` denotes the address of a function. `#` starts a comment.
Program parse_program(std::string_view text);

std::string print_program(const Program &program);
std::string print_statement(const Statement &stmt);
/// Prints only the statements of a function body, one per line.
std::string print_body(const Function &fn);

} // namespace scaf::ir
