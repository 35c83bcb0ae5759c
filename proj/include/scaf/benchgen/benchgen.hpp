#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "scaf/ir/program.hpp"
#include "scaf/oracle/oracle.hpp"
#include "scaf/pta/analysis.hpp"

namespace scaf::benchgen {

struct GenSpec {
  std::uint64_t seed = 1;
  /// Non-entry defined functions. 0 means exactly the chain.
  std::size_t functions = 0;
  std::size_t wrapper_chain_depth = 0;
  double side_effect_rate = 0;
  double error_path_rate = 0;
  double icall_rate = 0;
  bool executable_subset = true;
  /// Chain link (0 = FuncA) that always gets an error path.
  std::optional<std::size_t> forced_error_link;
};

enum class Label { SCaf, CCaf, NonAllocator };

const char *to_string(Label label);

struct GroundTruth {
  std::map<std::string, Label> labels;

  std::set<std::string> with(Label label) const;
  /// Oracle entries that encode the generator's knowledge: S-CAFs are
  /// ignorable, everything else is not.
  std::map<std::string, oracle::Decision> annotations() const;
  nlohmann::json to_json() const;
};

struct Generated {
  ir::Program program;
  GroundTruth truth;
};

/// Builds a labeled program. Throws std::invalid_argument on an infeasible spec.
Generated generate(const GenSpec &spec);

/// Chain link names from the top: FuncA, FuncB, ...
std::string chain_link(std::size_t index);

struct FuzzOptions {
  std::size_t max_statements = 60;
  /// No phi and no indirect calls, and calls only go to earlier functions.
  bool executable = false;
};

/// A random valid program with entry "main".
ir::Program random_program(std::uint64_t seed, const FuzzOptions &options = {});

class BudgetExceeded : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class NotExecutable : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A dynamic call frame. `callsite` is the call statement in the parent.
struct Frame {
  std::string function;
  std::optional<ir::SiteId> callsite;
  std::optional<std::size_t> parent;
};

/// Concrete objects are numbered by creation; `site` is the allocating
/// statement and `frame` the frame that executed it.
struct ConcreteObject {
  ir::SiteId site;
  std::size_t frame;
};

/// A concrete pointer: a cell of an object, a function address.
struct Pointee {
  std::optional<std::size_t> object;
  std::string field;
  std::string function;

  auto operator<=>(const Pointee &) const = default;
};

struct ValueFact {
  std::size_t frame;
  std::string name;
  Pointee pointee;

  auto operator<=>(const ValueFact &) const = default;
};

/// `cell` held `pointee` at some point.
struct CellFact {
  std::size_t frame;
  Pointee cell;
  Pointee pointee;

  auto operator<=>(const CellFact &) const = default;
};

struct Facts {
  std::vector<Frame> frames;
  std::vector<ConcreteObject> objects;
  std::set<ValueFact> values;
  std::set<CellFact> cells;
  std::uint64_t steps = 0;

  /// Pairs "f.v" < "g.w" of values that held the same concrete object.
  std::set<std::pair<std::string, std::string>> alias_pairs() const;
  nlohmann::json to_json() const;
};

/// Runs `entry` with null pointer parameters. Throws BudgetExceeded or
/// NotExecutable; no partial facts are returned.
Facts interpret(const ir::Program &program, const std::string &entry, std::uint64_t step_budget);

/// Observed facts the analysis does not cover, one line each. Facts from
/// frames inside modeled allocator bodies are skipped for Enhanced results.
std::vector<std::string> soundness_violations(const Facts &facts, const pta::Analysis &analysis);

} // namespace scaf::benchgen
