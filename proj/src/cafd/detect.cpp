#include <chrono>

#include "scaf/cafd/cafd.hpp"
#include "scaf/pta/analysis.hpp"

namespace scaf::cafd {

using ir::ExternalClass;
using ir::Program;

const char *to_string(Provenance p) {
  switch (p) {
  case Provenance::Seed: return "seed";
  case Provenance::Heuristic: return "heuristic";
  case Provenance::OracleAssisted: return "oracle";
  }
  return "?";
}

AllocatorList AllocatorList::seeds(const Program &program) {
  AllocatorList al;
  for (const auto &[name, fn] : program.functions)
    if (fn.external_class == ExternalClass::ExternalAllocatorSeed)
      al.members_.emplace(name, Provenance::Seed);
  return al;
}

bool AllocatorList::add(const std::string &name, Provenance provenance) {
  return members_.emplace(name, provenance).second;
}

std::set<std::string> AllocatorList::names() const {
  std::set<std::string> out;
  for (const auto &[n, p] : members_)
    out.insert(n);
  return out;
}

std::size_t AllocatorList::count(Provenance p) const {
  std::size_t n = 0;
  for (const auto &[name, prov] : members_)
    n += prov == p;
  return n;
}

SideEffectMap compute_side_effects(const Program &program, const callgraph::CallGraph &graph) {
  SideEffectMap si;
  for (const auto &[name, fn] : program.functions)
    if (fn.is_defined())
      si[name];

  auto contributes = [&](const std::string &target) {
    const ir::Function *fn = program.find(target);
    if (!fn)
      return false;
    switch (fn->external_class) {
    case ExternalClass::ExternalDeallocator:
    case ExternalClass::ExternalSideEffecting: return true;
    case ExternalClass::Defined: return !si.at(target).empty();
    default: return false;
    }
  };

  for (bool changed = true; changed;) {
    changed = false;
    for (const auto &[name, fn] : program.functions) {
      if (fn.is_external())
        continue;
      auto &mine = si.at(name);
      for (const auto &stmt : fn.body) {
        if (mine.contains(stmt.site))
          continue;
        bool effect = false;
        if (const auto *s = stmt.as<ir::Store>()) {
          const ir::Operand &v = s->payload;
          effect = v.is_function() || (v.is_value() && fn.type_of(v.name) == ir::ValueType::Pointer);
        } else if (const auto *c = stmt.as<ir::Call>()) {
          for (const auto &t : graph.targets(stmt.site, *c))
            effect = effect || contributes(t);
        }
        if (effect) {
          mine.insert(stmt.site);
          changed = true;
        }
      }
    }
  }
  return si;
}

namespace {

// Allocator callees of `fn`, as seen when collecting candidates.
std::set<std::string> allocator_callees(const ir::Function &fn, const AllocatorList &al,
                                        const callgraph::CallGraph &graph, std::set<ir::SiteId> *sites) {
  std::set<std::string> out;
  auto is_al = allocator_calls(al, graph);
  for (const auto &stmt : fn.body) {
    const auto *c = stmt.as<ir::Call>();
    if (!c || !is_al(stmt, *c))
      continue;
    for (const auto &t : graph.targets(stmt.site, *c))
      out.insert(t);
    if (sites)
      sites->insert(stmt.site);
  }
  return out;
}

} // namespace

Callsites collect_callsites(const Program &program, const AllocatorList &al, const callgraph::CallGraph &graph,
                            const std::set<std::string> &visited) {
  Callsites out;
  for (const auto &[name, fn] : program.functions) {
    if (fn.is_external())
      continue;
    std::set<ir::SiteId> sites;
    allocator_callees(fn, al, graph, &sites);
    if (sites.empty())
      continue;
    out.sites.insert(sites.begin(), sites.end());
    if (!visited.contains(name) && !al.contains(name))
      out.functions.insert(name);
  }
  return out;
}

Decision identify_allocator(const ir::Function &fn, const AllocatorCall &is_al_call, const SideEffectMap &si,
                            oracle::IgnorabilityOracle &oracle, const IdentifyOptions &options) {
  Decision d;
  d.function = fn.name;
  auto reject = [&](const char *reason) {
    d.accepted = false;
    d.reason = reason;
    return d;
  };

  std::vector<const ir::Return *> returns;
  for (const auto &stmt : fn.body)
    if (const auto *r = stmt.as<ir::Return>())
      returns.push_back(r);
  if (returns.empty())
    return reject("no-return");

  TrackState bt = backward_track(fn, is_al_call);
  for (const auto *r : returns) {
    if (!r->value || r->value->is_function())
      return reject("backward-track");
    if (r->value->is_value() && !bt.bt.at(r->value->name))
      return reject("backward-track");
  }

  TrackState fw = forward_track(fn, is_al_call);
  bool dead = false, escaped = false;
  for (const auto &stmt : fn.body) {
    const auto *c = stmt.as<ir::Call>();
    if (!c || !is_al_call(stmt, *c))
      continue;
    if (!c->receiver) {
      dead = true;
      continue;
    }
    if (!fw.fw.at(c->receiver->name)) {
      bool unused = true;
      for (const auto &other : fn.body)
        for (const ir::Operand *o : other.operands())
          unused = unused && !(o->is_value() && o->name == c->receiver->name);
      (unused ? dead : escaped) = true;
    }
  }
  if (escaped)
    return reject("forward-track");
  if (dead)
    return reject("dead-allocation");

  if (auto it = si.find(fn.name); it != si.end())
    d.side_effects.assign(it->second.begin(), it->second.end());
  if (d.side_effects.empty()) {
    d.accepted = true;
    d.provenance = Provenance::Heuristic;
    return d;
  }
  if (!options.consult_oracle)
    return reject("side-effects");

  d.oracle_consulted = true;
  d.verdict = oracle.classify(oracle::make_query(fn, d.side_effects));
  if (d.verdict->value != oracle::Decision::Ignorable)
    return reject("side-effects");
  d.accepted = true;
  d.provenance = Provenance::OracleAssisted;
  return d;
}

std::size_t DetectionResult::num1() const { return al.size() - al.count(Provenance::Seed); }
std::size_t DetectionResult::num2() const { return al.count(Provenance::OracleAssisted); }

DetectionResult detect_scafs(const Program &program, oracle::IgnorabilityOracle &oracle,
                             const DetectOptions &options) {
  auto start = std::chrono::steady_clock::now();
  DetectionResult result;
  result.al = AllocatorList::seeds(program);
  const oracle::Counters before = oracle.totals();

  callgraph::CallGraph graph;
  if (options.signature_targets) {
    graph = callgraph::build_call_graph(program);
  } else {
    auto resolved = pta::resolve_indirect_calls(pta::analyze(program, pta::Mode::Baseline));
    graph = callgraph::build_call_graph(program, &resolved);
  }
  const callgraph::Components components = callgraph::strongly_connected_components(graph);
  const SideEffectMap si = compute_side_effects(program, graph);

  // Allocator callees each analyzed function had when last decided; a
  // rejected function is looked at again once this set grows.
  std::map<std::string, std::set<std::string>> snapshot;
  IdentifyOptions identify{options.consult_oracle};

  for (std::size_t k = 1;; ++k) {
    std::set<std::string> visited;
    for (const auto &[name, callees] : snapshot)
      if (allocator_callees(program.at(name), result.al, graph, nullptr) == callees)
        visited.insert(name);
    Callsites cs = collect_callsites(program, result.al, graph, visited);

    Iteration it;
    it.index = k;
    for (const auto &name : callgraph::bottom_up_order(graph, cs.functions)) {
      const ir::Function &fn = program.at(name);
      snapshot[name] = allocator_callees(fn, result.al, graph, nullptr);
      Decision d = identify_allocator(fn, allocator_calls(result.al, graph, &components, name), si, oracle, identify);
      d.iteration = k;
      it.analyzed.push_back(name);
      if (d.accepted && result.al.add(name, d.provenance))
        it.added.push_back(name);
      result.decisions.push_back(std::move(d));
    }
    it.al_size = result.al.size();
    bool done = it.added.empty();
    result.iterations.push_back(std::move(it));
    if (done)
      break;
  }

  result.counters = oracle.totals();
  result.counters.queries -= before.queries;
  result.counters.input_tokens -= before.input_tokens;
  result.counters.output_tokens -= before.output_tokens;
  result.counters.latency_seconds -= before.latency_seconds;
  result.total_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

nlohmann::json to_json(const DetectionResult &r, bool include_timing) {
  using nlohmann::json;
  json allocators = json::array();
  for (const auto &[name, prov] : r.al.members())
    allocators.push_back({{"name", name}, {"provenance", to_string(prov)}});
  json iterations = json::array();
  for (const auto &it : r.iterations)
    iterations.push_back({{"iteration", it.index}, {"al_size", it.al_size}, {"analyzed", it.analyzed}, {"added", it.added}});
  json decisions = json::array();
  for (const auto &d : r.decisions) {
    json sites = json::array();
    for (const auto &s : d.side_effects)
      sites.push_back(s.str());
    json j = {{"function", d.function},
              {"iteration", d.iteration},
              {"decision", d.accepted ? "accept" : "reject"},
              {"side_effects", sites}};
    if (d.accepted)
      j["provenance"] = to_string(d.provenance);
    else
      j["reason"] = d.reason;
    if (d.verdict) {
      json votes = json::array();
      for (const auto &v : d.verdict->votes)
        votes.push_back(v.parsed ? (v.yes ? "YES" : "NO") : "UNPARSABLE");
      j["oracle"] = {{"verdict", oracle::to_string(d.verdict->value)},
                     {"votes", votes},
                     {"missing_annotation", d.verdict->missing_annotation}};
    }
    decisions.push_back(std::move(j));
  }
  json out = {{"allocators", allocators},
              {"num1", r.num1()},
              {"num2", r.num2()},
              {"iterations", iterations},
              {"per_function_decisions", decisions},
              {"oracle_counters",
               {{"QN", r.counters.queries}, {"IT", r.counters.input_tokens}, {"OT", r.counters.output_tokens}}}};
  if (include_timing)
    out["timing"] = {{"TT", r.total_seconds}, {"LT", r.counters.latency_seconds}};
  return out;
}

} // namespace scaf::cafd
