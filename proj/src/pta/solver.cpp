#include "scaf/pta/solver.hpp"

#include <deque>

namespace scaf::pta {

namespace {

const LocationSet kEmpty;

class Worklist {
public:
  explicit Worklist(const ConstraintSet &cs) : cs_(cs) {
    for (std::size_t i = 0; i < cs.nodes.size(); ++i)
      add_node();
    value_nodes_ = cs.nodes.size();
    for (const auto &c : cs.copies)
      succ_[c.src].insert(c.dst);
    for (const auto &l : cs.loads)
      loads_[l.src].push_back(l.dst);
    for (const auto &s : cs.stores)
      stores_[s.dst].push_back(s.src);
    for (const auto &f : cs.fields)
      fields_[f.base].push_back({f.dst, f.field});
    for (std::size_t i = 0; i < cs.icalls.size(); ++i) {
      icalls_[cs.icalls[i].callee].push_back(i);
      out_.icall_targets[cs.icalls[i].site];
    }
    for (const auto &a : cs.addrs)
      insert(a.dst, intern(a.location));
  }

  Solution run() {
    while (!queue_.empty()) {
      int n = queue_.front();
      queue_.pop_front();
      queued_[n] = false;

      std::vector<int> delta;
      for (int l : pts_[n])
        if (!done_[n].contains(l))
          delta.push_back(l);
      if (delta.empty())
        continue;
      done_[n].insert(delta.begin(), delta.end());

      // Copies: cell() may grow the per-node tables.
      const auto loads = loads_[n];
      const auto stores = stores_[n];
      const auto fields = fields_[n];
      const auto icalls = icalls_[n];
      for (int l : delta) {
        const Location loc = locations_[l];
        for (int dst : loads)
          if (!loc.is_function())
            add_edge(cell(l), dst);
        for (int src : stores)
          if (!loc.is_function())
            add_edge(src, cell(l));
        for (const auto &[dst, name] : fields)
          if (auto f = loc.with_field(name))
            insert(dst, intern(*f));
        for (std::size_t ic : icalls)
          if (loc.is_function())
            dispatch(cs_.icalls[ic], loc.function);
      }
      for (int s : succ_[n])
        for (int l : delta)
          insert(s, l);
    }
    return export_solution();
  }

private:
  int add_node() {
    pts_.emplace_back();
    done_.emplace_back();
    succ_.emplace_back();
    loads_.emplace_back();
    stores_.emplace_back();
    fields_.emplace_back();
    icalls_.emplace_back();
    queued_.push_back(false);
    return static_cast<int>(pts_.size()) - 1;
  }

  int intern(const Location &loc) {
    auto [it, inserted] = location_ids_.emplace(loc, static_cast<int>(locations_.size()));
    if (inserted)
      locations_.push_back(loc);
    return it->second;
  }

  int cell(int location) {
    auto [it, inserted] = cells_.emplace(location, 0);
    if (inserted)
      it->second = add_node();
    return it->second;
  }

  void push(int n) {
    if (!queued_[n]) {
      queued_[n] = true;
      queue_.push_back(n);
    }
  }

  void insert(int n, int location) {
    if (pts_[n].insert(location).second)
      push(n);
  }

  void add_edge(int src, int dst) {
    if (src == dst || !succ_[src].insert(dst).second)
      return;
    for (int l : done_[src])
      insert(dst, l);
  }

  void dispatch(const IndirectCall &call, const std::string &target) {
    auto it = cs_.callees.find(target);
    if (it == cs_.callees.end())
      return;
    const Callee &callee = it->second;
    if (callee.arity && *callee.arity != call.args.size())
      return;
    out_.icall_targets[call.site].insert(target);
    switch (callee.dispatch) {
    case Dispatch::SeedObject:
    case Dispatch::ModeledObject: {
      HeapObject obj = icall_object(call, callee.dispatch);
      std::optional<ValueId> receiver;
      if (call.receiver)
        receiver = cs_.nodes[*call.receiver];
      out_.icall_objects.emplace(obj, receiver);
      if (call.receiver)
        insert(*call.receiver, intern(Location::base(obj)));
      break;
    }
    case Dispatch::Bind:
      for (std::size_t i = 0; i < call.args.size() && i < callee.params.size(); ++i)
        if (call.args[i] && callee.params[i])
          add_edge(*call.args[i], *callee.params[i]);
      if (call.receiver)
        for (int r : callee.returns)
          add_edge(r, *call.receiver);
      break;
    case Dispatch::Ignore: break;
    }
  }

  Solution export_solution() {
    for (std::size_t n = 0; n < value_nodes_; ++n) {
      if (pts_[n].empty() || cs_.nodes[n].is_constant())
        continue;
      LocationSet &set = out_.pts[cs_.nodes[n]];
      for (int l : pts_[n])
        set.insert(locations_[l]);
    }
    for (const auto &[loc, n] : cells_) {
      if (pts_[n].empty())
        continue;
      LocationSet &set = out_.cells[locations_[loc]];
      for (int l : pts_[n])
        set.insert(locations_[l]);
    }
    return std::move(out_);
  }

  const ConstraintSet &cs_;
  std::size_t value_nodes_ = 0;

  std::vector<std::set<int>> pts_;
  std::vector<std::set<int>> done_;
  std::vector<std::set<int>> succ_;
  std::vector<std::vector<int>> loads_;
  std::vector<std::vector<int>> stores_;
  std::vector<std::vector<std::pair<int, std::string>>> fields_;
  std::vector<std::vector<std::size_t>> icalls_;
  std::vector<bool> queued_;
  std::deque<int> queue_;

  std::vector<Location> locations_;
  std::map<Location, int> location_ids_;
  std::map<int, int> cells_;

  Solution out_;
};

} // namespace

const LocationSet &Solution::points_to(const ValueId &value) const {
  auto it = pts.find(value);
  return it == pts.end() ? kEmpty : it->second;
}

const LocationSet &Solution::contents(const Location &cell) const {
  auto it = cells.find(cell);
  return it == cells.end() ? kEmpty : it->second;
}

Solution solve(const ConstraintSet &constraints) { return Worklist(constraints).run(); }

} // namespace scaf::pta
