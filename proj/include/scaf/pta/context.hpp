#pragma once

#include "scaf/ir/program.hpp"

namespace scaf::pta {

/// Clones every defined, non-entry, non-recursive function once per direct
/// callsite that targets it and retargets those calls to the clone. A clone of
/// `f` for the call at `g:3` is named "f@g:3" and records clone_of and context.
/// Originals survive when they are the entry, address-taken, recursive, or
/// never called directly.
ir::Program one_callsite_transform(const ir::Program &program);

std::string clone_name(const std::string &function, const ir::SiteId &callsite);

} // namespace scaf::pta
