#include "scaf/metrics/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace scaf::metrics {

namespace {

bool in_allocator_body(const HeapObject &o, const pta::Analysis &a, const std::set<std::string> &allocators) {
  const ir::Function *fn = a.program.find(o.site.function);
  return allocators.contains(o.site.function) && fn && !fn->is_external();
}

template <class T> std::optional<double> mean(const std::set<T> &items, auto size) {
  if (items.empty())
    return std::nullopt;
  double sum = 0;
  for (const auto &x : items)
    sum += static_cast<double>(size(x));
  return sum / static_cast<double>(items.size());
}

// 1 - after/before, with 0/0 read as no change.
std::optional<double> reduction(std::optional<double> before, std::optional<double> after) {
  if (!before || !after)
    return std::nullopt;
  if (*before == 0)
    return *after == 0 ? std::optional<double>(0.0) : std::nullopt;
  return 1.0 - *after / *before;
}

nlohmann::json opt(std::optional<double> v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); }

nlohmann::json opt_percent(std::optional<double> v) {
  return v ? nlohmann::json(percent(*v)) : nlohmann::json(nullptr);
}

} // namespace

ObjectPartition partition_objects(const pta::Analysis &baseline, const pta::Analysis &enhanced,
                                  const std::set<std::string> &allocators) {
  if (baseline.source_fingerprint != enhanced.source_fingerprint)
    throw std::invalid_argument("baseline and enhanced results come from different programs");
  if (enhanced.mode == pta::Mode::Enhanced && enhanced.allocators != allocators)
    throw std::invalid_argument("enhanced result was computed with a different allocator list");
  ObjectPartition p;
  for (const auto &[o, rec] : baseline.objects) {
    if (o.origin != pta::Origin::SeedSite)
      continue;
    (in_allocator_body(o, baseline, allocators) ? p.killed : p.retained).insert(o);
  }
  for (const auto &[o, rec] : enhanced.objects) {
    if (o.origin == pta::Origin::ModeledSite)
      p.added.insert(o);
    else if (!in_allocator_body(o, enhanced, allocators))
      p.retained.insert(o);
  }
  return p;
}

ObjectPartition partition_by_context(const pta::Analysis &baseline, const pta::Analysis &one_callsite) {
  if (baseline.source_fingerprint != one_callsite.source_fingerprint)
    throw std::invalid_argument("baseline and 1-callsite results come from different programs");
  ObjectPartition p;
  for (const auto &[o, rec] : one_callsite.objects)
    (o.context ? p.added : p.retained).insert(o);
  for (const auto &[o, rec] : baseline.objects)
    if (!p.retained.contains(o))
      p.killed.insert(o);
  return p;
}

std::size_t DerivedMaps::pbs_size(const HeapObject &o) const {
  auto it = pbs.find(o);
  return it == pbs.end() ? 0 : it->second.size();
}

std::size_t DerivedMaps::as_size(const ValueId &v) const {
  auto it = as.find(v);
  return it == as.end() ? 0 : it->second.size();
}

ValueId DerivedMaps::original(const ValueId &v) const {
  auto it = origin.find(v.function);
  return it == origin.end() ? v : ValueId{it->second, v.name};
}

DerivedMaps derive_maps(const pta::Analysis &analysis) {
  DerivedMaps m;
  std::map<std::string, std::map<std::string, ir::ValueType>> types;
  for (const auto &[name, fn] : analysis.program.functions) {
    if (fn.clone_of)
      m.origin[name] = *fn.clone_of;
    auto &t = types[name];
    for (const auto &p : fn.params)
      t[p.name] = p.type;
    for (const auto &stmt : fn.body)
      if (const ir::Def *d = stmt.defined())
        t.emplace(d->name, d->type);
  }
  auto is_pointer = [&](const ValueId &v) {
    if (v.is_constant())
      return false;
    auto f = types.find(v.function);
    if (f == types.end())
      return false;
    auto t = f->second.find(v.name);
    return t != f->second.end() && t->second == ir::ValueType::Pointer;
  };

  std::map<pta::Location, std::set<ValueId>> by_location;
  for (const auto &[v, locs] : analysis.solution.pts) {
    if (!is_pointer(v))
      continue;
    for (const auto &l : locs) {
      by_location[l].insert(v);
      if (l.object && l.field.empty())
        m.pbs[*l.object].insert(v);
    }
  }
  for (const auto &[l, values] : by_location)
    for (const auto &p : values)
      for (const auto &q : values)
        if (p != q)
          m.as[p].insert(q);
  for (const auto &[o, rec] : analysis.objects)
    if (rec.receiver)
      m.ar.emplace(o, *rec.receiver);
  return m;
}

MetricsReport compute_metrics(const ObjectPartition &partition, const DerivedMaps &baseline,
                              const DerivedMaps &enhanced) {
  MetricsReport r;
  r.sup = partition.retained.size();
  r.thoc = {partition.killed.size() + r.sup, partition.added.size() + r.sup};

  auto pbs_o = [&](const HeapObject &o) { return baseline.pbs_size(o); };
  auto pbs_e = [&](const HeapObject &o) { return enhanced.pbs_size(o); };
  r.k_mean = mean(partition.killed, pbs_o);
  r.a_mean = mean(partition.added, pbs_e);
  r.ro_mean = mean(partition.retained, pbs_o);
  r.re_mean = mean(partition.retained, pbs_e);

  std::set<ValueId> receivers;
  for (const auto *set : {&partition.added, &partition.retained})
    for (const auto &o : *set)
      if (auto it = enhanced.ar.find(o); it != enhanced.ar.end())
        receivers.insert(it->second);
  r.aso_mean = mean(receivers, [&](const ValueId &p) { return baseline.as_size(enhanced.original(p)); });
  r.ase_mean = mean(receivers, [&](const ValueId &p) { return enhanced.as_size(p); });

  r.prr1 = reduction(r.k_mean, r.a_mean);
  r.prr2 = reduction(r.ro_mean, r.re_mean);
  r.arr = reduction(r.aso_mean, r.ase_mean);
  if (r.thoc.first > 0)
    r.er = static_cast<double>(r.thoc.second) / static_cast<double>(r.thoc.first);
  return r;
}

IcallReport icall_metrics(const callgraph::IndirectTargets &baseline, const callgraph::IndirectTargets &enhanced) {
  IcallReport r;
  std::set<ir::SiteId> sites;
  for (const auto &[s, t] : baseline)
    sites.insert(s);
  for (const auto &[s, t] : enhanced)
    sites.insert(s);
  r.tn = sites.size();
  double before = 0, after = 0;
  static const std::set<std::string> none;
  for (const auto &s : sites) {
    auto b = baseline.find(s);
    auto e = enhanced.find(s);
    const auto &bt = b == baseline.end() ? none : b->second;
    const auto &et = e == enhanced.end() ? none : e->second;
    if (et.size() >= bt.size())
      continue;
    ++r.on;
    before += static_cast<double>(bt.size());
    after += static_cast<double>(et.size());
  }
  if (r.on) {
    r.oa = before / static_cast<double>(r.on);
    r.ea = after / static_cast<double>(r.on);
  }
  return r;
}

double percent(double fraction) { return std::floor(fraction * 1000.0 + 0.5) / 10.0; }

nlohmann::json to_json(const IcallReport &icalls) {
  return {{"tn", icalls.tn}, {"on", icalls.on}, {"oa", opt(icalls.oa)}, {"ea", opt(icalls.ea)}};
}

nlohmann::json to_json(const MetricsReport &r, const IcallReport &icalls) {
  nlohmann::json j;
  j["thoc"] = {r.thoc.first, r.thoc.second};
  j["sup"] = r.sup;
  j["pc1"] = {opt(r.k_mean), opt(r.a_mean)};
  j["prr1"] = opt_percent(r.prr1);
  if (r.ro_mean && r.re_mean)
    j["pc2"] = {*r.ro_mean, *r.re_mean};
  else
    j["pc2"] = nullptr;
  j["prr2"] = opt_percent(r.prr2);
  j["anc"] = {opt(r.aso_mean), opt(r.ase_mean)};
  j["arr"] = opt_percent(r.arr);
  j["er"] = opt(r.er);
  j["icalls"] = to_json(icalls);
  return j;
}

} // namespace scaf::metrics
