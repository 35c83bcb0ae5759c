#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace scaf::ir {

enum class ValueType { Pointer, Scalar };

const char *to_string(ValueType type);

/// Identifies a statement by its enclosing (original) function and its
/// 1-based position in that function's body. Clones made by the 1-callsite
/// transform keep the site ids of the statements they were copied from.
struct SiteId {
  std::string function;
  std::uint32_t index = 0;

  auto operator<=>(const SiteId &) const = default;
  std::string str() const;
};

/// An operand is either a named SSA value, the NULL constant, or the address
/// of a function (`@name`).
struct Operand {
  enum class Kind { Value, Null, Function };

  Kind kind = Kind::Value;
  std::string name;

  static Operand value(std::string name) { return {Kind::Value, std::move(name)}; }
  static Operand null() { return {Kind::Null, {}}; }
  static Operand function(std::string name) { return {Kind::Function, std::move(name)}; }

  bool is_value() const { return kind == Kind::Value; }
  bool is_null() const { return kind == Kind::Null; }
  bool is_function() const { return kind == Kind::Function; }

  auto operator<=>(const Operand &) const = default;
};

struct Def {
  std::string name;
  ValueType type = ValueType::Pointer;

  auto operator<=>(const Def &) const = default;
};

// Statement payloads. Field order mirrors the textual syntax.

/// `v = addr`: a synthesized allocation site.
struct Addr {
  Def result;
  auto operator<=>(const Addr &) const = default;
};
struct Copy {
  Def result;
  Operand source;
  auto operator<=>(const Copy &) const = default;
};
struct Phi {
  Def result;
  std::vector<Operand> incoming;
  auto operator<=>(const Phi &) const = default;
};
struct NullAssign {
  Def result;
  auto operator<=>(const NullAssign &) const = default;
};
/// `store address, payload` writes payload into the cell `address` points to.
struct Store {
  Operand address;
  Operand payload;
  auto operator<=>(const Store &) const = default;
};
struct Load {
  Def result;
  Operand address;
  auto operator<=>(const Load &) const = default;
};
struct Field {
  Def result;
  Operand base;
  std::string field;
  auto operator<=>(const Field &) const = default;
};
struct Call {
  std::optional<Def> receiver;
  /// Direct callee name; empty for indirect calls.
  std::string callee;
  /// Function-pointer value for indirect calls.
  std::optional<Operand> callee_value;
  std::vector<Operand> args;

  bool is_indirect() const { return callee_value.has_value(); }
  auto operator<=>(const Call &) const = default;
};
struct Return {
  std::optional<Operand> value;
  auto operator<=>(const Return &) const = default;
};

enum class StmtKind { Addr, Copy, Phi, NullAssign, Store, Load, Field, Call, Return };

const char *to_string(StmtKind kind);

struct Statement {
  SiteId site;
  std::variant<Addr, Copy, Phi, NullAssign, Store, Load, Field, Call, Return> op;

  StmtKind kind() const { return static_cast<StmtKind>(op.index()); }

  template <typename T> const T *as() const { return std::get_if<T>(&op); }
  template <typename T> T *as() { return std::get_if<T>(&op); }

  /// The value this statement defines, if any.
  const Def *defined() const;
  /// Every operand this statement reads, in syntactic order (including the
  /// callee value of an indirect call).
  std::vector<const Operand *> operands() const;

  auto operator<=>(const Statement &) const = default;
};

enum class ExternalClass {
  Defined,
  ExternalPure,
  ExternalSideEffecting,
  ExternalDeallocator,
  ExternalAllocatorSeed,
};

const char *to_string(ExternalClass cls);

struct Param {
  std::string name;
  ValueType type = ValueType::Pointer;
  auto operator<=>(const Param &) const = default;
};

struct Function {
  std::string name;
  std::vector<Param> params;
  std::vector<Statement> body;
  std::optional<std::string> source_text;
  ExternalClass external_class = ExternalClass::Defined;

  // Set only on clones produced by the 1-callsite transform.
  std::optional<std::string> clone_of;
  std::optional<SiteId> context;

  bool is_defined() const { return external_class == ExternalClass::Defined; }
  bool is_external() const { return !is_defined(); }
  /// Name of the function this one was cloned from, or its own name.
  const std::string &origin_name() const { return clone_of ? *clone_of : name; }

  /// Type of a parameter or statement-defined value.
  std::optional<ValueType> type_of(const std::string &value) const;

  auto operator<=>(const Function &) const = default;
};

/// Coarse classification of what a function returns, used for indirect-call
/// signature matching.
enum class ResultKind { Unknown, Void, Pointer, Scalar };

ResultKind result_kind(const Function &fn);

struct Program {
  std::map<std::string, Function> functions;
  std::optional<std::string> entry;

  const Function *find(const std::string &name) const;
  const Function &at(const std::string &name) const;
  /// Locates the statement with the given site in the named function.
  const Statement *statement(const std::string &function, const SiteId &site) const;

  auto operator<=>(const Program &) const = default;
  bool operator==(const Program &) const = default;
};

/// Stable 64-bit fingerprint of a program's printed form.
std::uint64_t fingerprint(const Program &program);

} // namespace scaf::ir
