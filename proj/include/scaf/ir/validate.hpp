#pragma once

#include <compare>
#include <optional>
#include <string>
#include <vector>

#include "scaf/ir/program.hpp"

namespace scaf::ir {

struct Violation {
  std::string function;
  std::optional<SiteId> site;
  /// Short rule tag, e.g. "single-assignment" or "type-agreement".
  std::string rule;
  std::string message;

  auto operator<=>(const Violation &) const = default;
};

/// Checks the structural invariants of a program. The result is sorted and
/// does not depend on how the function map is iterated.
std::vector<Violation> validate(const Program &program);

} // namespace scaf::ir
