#include "scaf/benchgen/benchgen.hpp"
#include "scaf/pta/context.hpp"

namespace scaf::benchgen {

namespace {

using Value = std::optional<Pointee>;

constexpr std::size_t kMaxDepth = 2000;

class Machine {
public:
  Machine(const ir::Program &program, std::uint64_t budget) : program_(program), budget_(budget) {}

  void run(const std::string &entry) {
    const ir::Function *fn = program_.find(entry);
    if (!fn || fn->is_external())
      throw std::invalid_argument("entry '" + entry + "' is not a defined function");
    call(*fn, std::nullopt, std::nullopt, {});
  }

  Facts facts;

private:
  struct Env {
    std::size_t frame;
    const ir::Function *fn;
    std::map<std::string, Value> values;
  };

  Value eval(const Env &env, const ir::Operand &o) const {
    switch (o.kind) {
    case ir::Operand::Kind::Null: return std::nullopt;
    case ir::Operand::Kind::Function: return Pointee{std::nullopt, {}, o.name};
    case ir::Operand::Kind::Value: break;
    }
    auto it = env.values.find(o.name);
    return it == env.values.end() ? std::nullopt : it->second;
  }

  void define(Env &env, const ir::Def &d, Value v) {
    if (d.type != ir::ValueType::Pointer)
      return;
    env.values[d.name] = v;
    if (v)
      facts.values.insert({env.frame, d.name, *v});
  }

  Pointee allocate(const Env &env, const ir::SiteId &site) {
    facts.objects.push_back({site, env.frame});
    return Pointee{facts.objects.size() - 1, {}, {}};
  }

  Value call(const ir::Function &fn, std::optional<ir::SiteId> site, std::optional<std::size_t> parent,
             const std::vector<Value> &args) {
    if (++depth_ > kMaxDepth)
      throw BudgetExceeded("call depth limit reached");
    facts.frames.push_back({fn.name, site, parent});
    Env env{facts.frames.size() - 1, &fn, {}};
    for (std::size_t i = 0; i < fn.params.size(); ++i)
      define(env, {fn.params[i].name, fn.params[i].type}, i < args.size() ? args[i] : std::nullopt);

    Value result;
    for (const auto &stmt : fn.body) {
      if (++facts.steps > budget_)
        throw BudgetExceeded("step budget of " + std::to_string(budget_) + " exhausted");
      if (const auto *r = stmt.as<ir::Return>()) {
        if (r->value)
          result = eval(env, *r->value);
        break;
      }
      step(env, stmt);
    }
    --depth_;
    return result;
  }

  void step(Env &env, const ir::Statement &stmt) {
    std::visit(
        [&](const auto &s) {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, ir::Addr>) {
            define(env, s.result, allocate(env, stmt.site));
          } else if constexpr (std::is_same_v<T, ir::Copy>) {
            define(env, s.result, eval(env, s.source));
          } else if constexpr (std::is_same_v<T, ir::NullAssign>) {
            define(env, s.result, std::nullopt);
          } else if constexpr (std::is_same_v<T, ir::Phi>) {
            throw NotExecutable("phi at " + stmt.site.str());
          } else if constexpr (std::is_same_v<T, ir::Store>) {
            Value cell = eval(env, s.address);
            if (!cell || !cell->object)
              return;
            Value payload = eval(env, s.payload);
            auto key = std::make_pair(*cell->object, cell->field);
            if (!payload) {
              memory_.erase(key);
              return;
            }
            memory_[key] = *payload;
            facts.cells.insert({env.frame, *cell, *payload});
          } else if constexpr (std::is_same_v<T, ir::Load>) {
            Value cell = eval(env, s.address);
            Value v;
            if (cell && cell->object)
              if (auto it = memory_.find({*cell->object, cell->field}); it != memory_.end())
                v = it->second;
            define(env, s.result, v);
          } else if constexpr (std::is_same_v<T, ir::Field>) {
            Value base = eval(env, s.base);
            Value v;
            if (base && base->object)
              v = Pointee{base->object, s.field, {}};
            define(env, s.result, v);
          } else if constexpr (std::is_same_v<T, ir::Call>) {
            if (s.is_indirect())
              throw NotExecutable("indirect call at " + stmt.site.str());
            const ir::Function &callee = program_.at(s.callee);
            Value v;
            if (callee.external_class == ir::ExternalClass::ExternalAllocatorSeed) {
              v = allocate(env, stmt.site);
            } else if (callee.is_defined()) {
              std::vector<Value> args;
              for (const auto &a : s.args)
                args.push_back(eval(env, a));
              v = call(callee, stmt.site, env.frame, args);
            }
            if (s.receiver)
              define(env, *s.receiver, v);
          }
        },
        stmt.op);
  }

  const ir::Program &program_;
  std::uint64_t budget_;
  std::size_t depth_ = 0;
  std::map<std::pair<std::size_t, std::string>, Pointee> memory_;
};

std::string spell(const Pointee &p) {
  if (!p.object)
    return "@" + p.function;
  std::string s = "#" + std::to_string(*p.object);
  return p.field.empty() ? s : s + "." + p.field;
}

// Maps concrete frames and objects onto one analysis' abstractions.
class Abstraction {
public:
  explicit Abstraction(const Facts &facts, const pta::Analysis &a) : facts_(facts), a_(a) {}

  std::string function(std::size_t frame) const {
    const Frame &f = facts_.frames[frame];
    if (a_.mode == pta::Mode::OneCallsite && f.callsite) {
      std::string clone = pta::clone_name(f.function, *f.callsite);
      if (a_.program.find(clone))
        return clone;
    }
    return f.function;
  }

  /// Innermost-first walk; the outermost frame that runs a modeled allocator.
  std::optional<std::size_t> modeled_frame(std::size_t frame) const {
    if (a_.mode != pta::Mode::Enhanced)
      return std::nullopt;
    std::optional<std::size_t> found;
    for (std::optional<std::size_t> f = frame; f; f = facts_.frames[*f].parent) {
      const std::string &name = facts_.frames[*f].function;
      const ir::Function *fn = a_.program.find(name);
      if (fn && fn->is_defined() && a_.allocators.contains(name))
        found = f;
    }
    return found;
  }

  std::optional<pta::HeapObject> object(std::size_t id) const {
    const ConcreteObject &o = facts_.objects[id];
    if (auto m = modeled_frame(o.frame)) {
      const auto &site = facts_.frames[*m].callsite;
      if (!site)
        return std::nullopt;
      return pta::HeapObject{*site, pta::Origin::ModeledSite, std::nullopt};
    }
    std::optional<ir::SiteId> context;
    if (const ir::Function *fn = a_.program.find(function(o.frame)))
      context = fn->context;
    return pta::HeapObject{o.site, pta::Origin::SeedSite, context};
  }

  std::optional<pta::Location> location(const Pointee &p) const {
    if (!p.object)
      return pta::Location::of_function(p.function);
    auto o = object(*p.object);
    if (!o)
      return std::nullopt;
    return pta::Location{*o, {}, p.field};
  }

private:
  const Facts &facts_;
  const pta::Analysis &a_;
};

} // namespace

std::set<std::pair<std::string, std::string>> Facts::alias_pairs() const {
  std::map<Pointee, std::set<std::string>> holders;
  for (const auto &v : values)
    if (v.pointee.object)
      holders[v.pointee].insert(frames[v.frame].function + "." + v.name);
  std::set<std::pair<std::string, std::string>> out;
  for (const auto &[p, names] : holders)
    for (auto i = names.begin(); i != names.end(); ++i)
      for (auto j = std::next(i); j != names.end(); ++j)
        out.insert({*i, *j});
  return out;
}

nlohmann::json Facts::to_json() const {
  nlohmann::json objs = nlohmann::json::array();
  for (std::size_t i = 0; i < objects.size(); ++i)
    objs.push_back({{"id", i}, {"site", objects[i].site.str()}, {"function", frames[objects[i].frame].function}});
  std::map<std::string, std::set<std::string>> held;
  for (const auto &v : values)
    held[frames[v.frame].function + "." + v.name].insert(spell(v.pointee));
  nlohmann::json vals = nlohmann::json::object();
  for (const auto &[k, s] : held)
    vals[k] = s;
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto &[a, b] : alias_pairs())
    pairs.push_back({a, b});
  return {{"steps", steps}, {"objects", objs}, {"values", vals}, {"alias_pairs", pairs}};
}

Facts interpret(const ir::Program &program, const std::string &entry, std::uint64_t step_budget) {
  Machine m(program, step_budget);
  m.run(entry);
  return std::move(m.facts);
}

std::vector<std::string> soundness_violations(const Facts &facts, const pta::Analysis &analysis) {
  Abstraction abs(facts, analysis);
  std::vector<std::string> out;
  auto skipped = [&](std::size_t frame) { return abs.modeled_frame(frame).has_value(); };

  // Values holding the same concrete cell, keyed by that cell.
  std::map<Pointee, std::set<pta::ValueId>> sharing;
  for (const auto &v : facts.values) {
    if (skipped(v.frame))
      continue;
    pta::ValueId id{abs.function(v.frame), v.name};
    auto loc = abs.location(v.pointee);
    if (!loc) {
      out.push_back("unmapped object held by " + id.str());
      continue;
    }
    if (!analysis.points_to(id).contains(*loc))
      out.push_back("value " + id.str() + " may hold " + loc->str());
    if (v.pointee.object)
      sharing[v.pointee].insert(id);
  }
  for (const auto &c : facts.cells) {
    if (skipped(c.frame))
      continue;
    auto cell = abs.location(c.cell);
    auto target = abs.location(c.pointee);
    if (!cell || !target) {
      out.push_back("unmapped object in a store");
      continue;
    }
    if (!analysis.solution.contents(*cell).contains(*target))
      out.push_back("cell " + cell->str() + " may hold " + target->str());
  }
  for (const auto &[p, ids] : sharing) {
    for (auto i = ids.begin(); i != ids.end(); ++i) {
      for (auto j = std::next(i); j != ids.end(); ++j) {
        const auto &a = analysis.points_to(*i);
        const auto &b = analysis.points_to(*j);
        bool overlap = false;
        for (const auto &l : a)
          overlap = overlap || b.contains(l);
        if (!overlap)
          out.push_back("alias " + i->str() + " ~ " + j->str() + " missed");
      }
    }
  }
  return out;
}

} // namespace scaf::benchgen
