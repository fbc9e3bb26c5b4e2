#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <vector>

#include "opera/dfg.hpp"
#include "opera/process_tree.hpp"

namespace opera {

// A partition of a DFG's activities found by one of the cut detectors.
// For loop cuts the first part is the body; sequence parts are ordered.
struct Cut {
  ProcessTree::Kind kind;
  std::vector<std::set<Activity>> parts;
};

namespace detail {

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
    return x;
  }

  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent_[std::max(a, b)] = std::min(a, b);
    return true;
  }

 private:
  std::vector<std::size_t> parent_;
};

// Dense view of a DFG: activities indexed in sorted order.
struct DfgIndex {
  std::vector<Activity> names;
  std::map<Activity, std::size_t> index;
  std::vector<std::vector<bool>> edge;
  std::vector<bool> start;
  std::vector<bool> end;

  explicit DfgIndex(const Dfg& dfg) : names(dfg.activities.begin(), dfg.activities.end()) {
    const auto n = names.size();
    for (std::size_t i = 0; i < n; ++i) index[names[i]] = i;
    edge.assign(n, std::vector<bool>(n, false));
    start.assign(n, false);
    end.assign(n, false);
    for (const auto& [e, count] : dfg.edges) edge[index.at(e.first)][index.at(e.second)] = true;
    for (const auto& [a, count] : dfg.start_activities) start[index.at(a)] = true;
    for (const auto& [a, count] : dfg.end_activities) end[index.at(a)] = true;
  }

  std::size_t size() const { return names.size(); }

  // reach[i][j]: a non-empty path i ~> j exists.
  std::vector<std::vector<bool>> reachability() const {
    const auto n = size();
    auto reach = edge;
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t i = 0; i < n; ++i)
        if (reach[i][k])
          for (std::size_t j = 0; j < n; ++j)
            if (reach[k][j]) reach[i][j] = true;
    return reach;
  }

  // Groups of a union-find over all activities, ordered by smallest member.
  std::vector<std::vector<std::size_t>> groups(UnionFind& uf) const {
    std::map<std::size_t, std::vector<std::size_t>> by_root;
    for (std::size_t i = 0; i < size(); ++i) by_root[uf.find(i)].push_back(i);
    std::vector<std::vector<std::size_t>> out;
    for (auto& [root, members] : by_root) out.push_back(std::move(members));
    return out;
  }

  std::set<Activity> to_set(const std::vector<std::size_t>& members) const {
    std::set<Activity> out;
    for (auto i : members) out.insert(names[i]);
    return out;
  }
};

}  // namespace detail

// Connected components of the undirected DFG.
inline std::optional<Cut> find_xor_cut(const Dfg& dfg) {
  detail::DfgIndex g(dfg);
  detail::UnionFind uf(g.size());
  for (std::size_t i = 0; i < g.size(); ++i)
    for (std::size_t j = 0; j < g.size(); ++j)
      if (g.edge[i][j]) uf.unite(i, j);
  auto groups = g.groups(uf);
  if (groups.size() < 2) return std::nullopt;
  Cut cut{ProcessTree::Kind::exclusive, {}};
  for (const auto& grp : groups) cut.parts.push_back(g.to_set(grp));
  return cut;
}

// Ordered partition where every activity of an earlier part reaches every
// activity of a later part and never the other way round.
inline std::optional<Cut> find_sequence_cut(const Dfg& dfg) {
  detail::DfgIndex g(dfg);
  const auto n = g.size();
  if (n < 2) return std::nullopt;
  const auto reach = g.reachability();
  detail::UnionFind uf(n);
  // Mutually reachable (same SCC) or mutually unreachable activities cannot be
  // separated by a sequence cut.
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (reach[i][j] == reach[j][i]) uf.unite(i, j);
  auto groups = g.groups(uf);
  if (groups.size() < 2) return std::nullopt;

  auto reaches = [&](const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
    for (auto x : a)
      for (auto y : b)
        if (reach[x][y]) return true;
    return false;
  };
  std::vector<std::size_t> predecessors(groups.size(), 0);
  for (std::size_t a = 0; a < groups.size(); ++a)
    for (std::size_t b = 0; b < groups.size(); ++b)
      if (a != b && reaches(groups[b], groups[a])) ++predecessors[a];
  std::vector<std::size_t> order(groups.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return predecessors[a] < predecessors[b]; });

  for (std::size_t i = 0; i < order.size(); ++i)
    for (std::size_t j = i + 1; j < order.size(); ++j)
      for (auto x : groups[order[i]])
        for (auto y : groups[order[j]])
          if (!reach[x][y] || reach[y][x]) return std::nullopt;

  Cut cut{ProcessTree::Kind::sequence, {}};
  for (auto idx : order) cut.parts.push_back(g.to_set(groups[idx]));
  return cut;
}

// Parts pairwise connected by edges in both directions, each holding a start
// and an end activity.
inline std::optional<Cut> find_parallel_cut(const Dfg& dfg) {
  detail::DfgIndex g(dfg);
  const auto n = g.size();
  if (n < 2) return std::nullopt;
  detail::UnionFind uf(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (!(g.edge[i][j] && g.edge[j][i])) uf.unite(i, j);
  auto groups = g.groups(uf);

  auto complete = [&](const std::vector<std::size_t>& grp) {
    bool s = false, e = false;
    for (auto i : grp) {
      s = s || g.start[i];
      e = e || g.end[i];
    }
    return s && e;
  };
  std::vector<std::vector<std::size_t>> parts;
  std::vector<std::size_t> deficient;
  for (auto& grp : groups) {
    if (complete(grp))
      parts.push_back(std::move(grp));
    else
      deficient.insert(deficient.end(), grp.begin(), grp.end());
  }
  if (parts.empty()) return std::nullopt;
  // Merging keeps the pairwise-connection property, so deficient parts are
  // folded into the first complete one.
  parts.front().insert(parts.front().end(), deficient.begin(), deficient.end());
  if (parts.size() < 2) return std::nullopt;

  Cut cut{ProcessTree::Kind::parallel, {}};
  for (const auto& p : parts) cut.parts.push_back(g.to_set(p));
  return cut;
}

// Body holds every start and end activity; each redo component is entered
// only from end activities and left only towards start activities.
inline std::optional<Cut> find_loop_cut(const Dfg& dfg) {
  detail::DfgIndex g(dfg);
  const auto n = g.size();
  if (n < 2) return std::nullopt;
  std::vector<bool> body(n, false);
  for (std::size_t i = 0; i < n; ++i) body[i] = g.start[i] || g.end[i];

  std::vector<std::vector<std::size_t>> redo;
  for (bool changed = true; changed;) {
    changed = false;
    detail::UnionFind uf(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (g.edge[i][j] && !body[i] && !body[j]) uf.unite(i, j);
    redo.clear();
    for (auto& grp : g.groups(uf)) {
      if (body[grp.front()]) continue;
      std::vector<bool> in(n, false);
      for (auto i : grp) in[i] = true;
      bool ok = true;
      for (std::size_t u = 0; u < n && ok; ++u)
        for (std::size_t v = 0; v < n && ok; ++v) {
          if (!g.edge[u][v]) continue;
          if (body[u] && in[v] && !g.end[u]) ok = false;
          if (in[u] && body[v] && !g.start[v]) ok = false;
        }
      if (ok) {
        redo.push_back(std::move(grp));
      } else {
        for (auto i : grp) body[i] = true;
        changed = true;
      }
    }
  }
  if (redo.empty()) return std::nullopt;

  Cut cut{ProcessTree::Kind::loop, {}};
  std::set<Activity> body_set;
  for (std::size_t i = 0; i < n; ++i)
    if (body[i]) body_set.insert(g.names[i]);
  cut.parts.push_back(std::move(body_set));
  for (const auto& r : redo) cut.parts.push_back(g.to_set(r));
  return cut;
}

// Cut detection in the fixed order exclusive, sequence, parallel, loop.
inline std::optional<Cut> find_cut(const Dfg& dfg) {
  if (auto c = find_xor_cut(dfg)) return c;
  if (auto c = find_sequence_cut(dfg)) return c;
  if (auto c = find_parallel_cut(dfg)) return c;
  if (auto c = find_loop_cut(dfg)) return c;
  return std::nullopt;
}

// Sub-problem handed to the recursion. Two implementations exist: a DFG
// projected along the cut (directly-follows variant) and an actual trace
// set split along the cut.
template <class S>
concept DiscoverySource = requires(const S& s, const Cut& cut) {
  { s.dfg() } -> std::convertible_to<const Dfg&>;
  { s.has_empty_traces() } -> std::convertible_to<bool>;
  { s.without_empty_traces() } -> std::convertible_to<S>;
  { s.split(cut) } -> std::convertible_to<std::vector<S>>;
};

// Directly-follows source: children are projections of the DFG. Sequence
// parts that some behaviour can bypass are marked as containing the empty
// trace.
class DfgSource {
 public:
  explicit DfgSource(Dfg dfg, bool empty = false) : dfg_(std::move(dfg)), empty_(empty) {}

  const Dfg& dfg() const { return dfg_; }
  bool has_empty_traces() const { return empty_; }
  DfgSource without_empty_traces() const { return DfgSource(dfg_, false); }

  std::vector<DfgSource> split(const Cut& cut) const {
    using K = ProcessTree::Kind;
    std::map<Activity, std::size_t> part_of;
    for (std::size_t i = 0; i < cut.parts.size(); ++i)
      for (const auto& a : cut.parts[i]) part_of[a] = i;

    std::vector<Dfg> subs(cut.parts.size());
    for (std::size_t i = 0; i < cut.parts.size(); ++i) subs[i].activities = cut.parts[i];
    for (const auto& [e, count] : dfg_.edges) {
      const auto pu = part_of.at(e.first);
      const auto pv = part_of.at(e.second);
      if (pu == pv) {
        subs[pu].edges[e] += count;
      } else if (cut.kind == K::sequence || cut.kind == K::loop) {
        subs[pu].end_activities[e.first] += count;
        subs[pv].start_activities[e.second] += count;
      }
    }
    for (const auto& [a, count] : dfg_.start_activities)
      subs[part_of.at(a)].start_activities[a] += count;
    for (const auto& [a, count] : dfg_.end_activities)
      subs[part_of.at(a)].end_activities[a] += count;

    std::vector<bool> skippable(cut.parts.size(), false);
    if (cut.kind == K::sequence) {
      for (std::size_t i = 0; i < cut.parts.size(); ++i) {
        for (const auto& [e, count] : dfg_.edges)
          if (part_of.at(e.first) < i && part_of.at(e.second) > i) skippable[i] = true;
        for (const auto& [a, count] : dfg_.start_activities)
          if (part_of.at(a) > i) skippable[i] = true;
        for (const auto& [a, count] : dfg_.end_activities)
          if (part_of.at(a) < i) skippable[i] = true;
      }
    }
    std::vector<DfgSource> out;
    for (std::size_t i = 0; i < subs.size(); ++i) out.emplace_back(std::move(subs[i]), skippable[i]);
    return out;
  }

 private:
  Dfg dfg_;
  bool empty_;
};

// Trace-set source: children are the actual sub-traces, so every child DFG
// is exact.
class TraceSource {
 public:
  explicit TraceSource(std::vector<ActivityTrace> traces)
      : traces_(std::move(traces)), dfg_(build_dfg(traces_)) {}

  const Dfg& dfg() const { return dfg_; }

  bool has_empty_traces() const {
    return std::any_of(traces_.begin(), traces_.end(), [](const auto& t) { return t.empty(); });
  }

  TraceSource without_empty_traces() const {
    std::vector<ActivityTrace> kept;
    for (const auto& t : traces_)
      if (!t.empty()) kept.push_back(t);
    return TraceSource(std::move(kept));
  }

  std::vector<TraceSource> split(const Cut& cut) const {
    using K = ProcessTree::Kind;
    std::map<Activity, std::size_t> part_of;
    for (std::size_t i = 0; i < cut.parts.size(); ++i)
      for (const auto& a : cut.parts[i]) part_of[a] = i;
    std::vector<std::vector<ActivityTrace>> subs(cut.parts.size());

    for (const auto& trace : traces_) {
      if (trace.empty()) continue;
      switch (cut.kind) {
        case K::exclusive:
          subs[part_of.at(trace.front())].push_back(trace);
          break;
        case K::sequence:
        case K::parallel: {
          std::vector<ActivityTrace> proj(cut.parts.size());
          for (const auto& a : trace) proj[part_of.at(a)].push_back(a);
          for (std::size_t i = 0; i < proj.size(); ++i) subs[i].push_back(std::move(proj[i]));
          break;
        }
        case K::loop: {
          ActivityTrace run;
          std::size_t run_part = part_of.at(trace.front());
          for (const auto& a : trace) {
            const auto p = part_of.at(a);
            if (p != run_part) {
              subs[run_part].push_back(std::move(run));
              run.clear();
              run_part = p;
            }
            run.push_back(a);
          }
          subs[run_part].push_back(std::move(run));
          break;
        }
        default:
          break;
      }
    }
    std::vector<TraceSource> out;
    for (auto& s : subs) out.emplace_back(std::move(s));
    return out;
  }

 private:
  std::vector<ActivityTrace> traces_;
  Dfg dfg_;
};

// Loop over a choice of all activities; accepts any non-empty sequence.
inline ProcessTree flower_model(const std::set<Activity>& activities) {
  std::vector<ProcessTree> leaves;
  for (const auto& a : activities) leaves.push_back(ProcessTree::leaf(a));
  ProcessTree body = leaves.size() == 1 ? std::move(leaves.front())
                                        : ProcessTree::xor_(std::move(leaves));
  return ProcessTree::loop({std::move(body), ProcessTree::tau()});
}

template <DiscoverySource Source>
ProcessTree discover_tree(const Source& source) {
  const Dfg& dfg = source.dfg();
  if (dfg.activities.empty()) return ProcessTree::tau();
  if (source.has_empty_traces())
    return ProcessTree::xor_({ProcessTree::tau(), discover_tree(source.without_empty_traces())});
  if (dfg.activities.size() == 1) {
    const auto& a = *dfg.activities.begin();
    if (dfg.has_edge(a, a)) return ProcessTree::loop({ProcessTree::leaf(a), ProcessTree::tau()});
    return ProcessTree::leaf(a);
  }
  if (auto cut = find_cut(dfg)) {
    std::vector<ProcessTree> children;
    for (const auto& child : source.split(*cut)) children.push_back(discover_tree(child));
    return ProcessTree::op(cut->kind, std::move(children));
  }
  return flower_model(dfg.activities);
}

// Inductive Miner directly-follows: recursion driven purely by the DFG.
inline ProcessTree imd_discover(const Dfg& dfg) { return discover_tree(DfgSource(dfg)); }

// Same cut detection, but recursing on the split trace sets. Every trace of
// `traces` is in the language of the result.
inline ProcessTree discover_from_traces(std::vector<ActivityTrace> traces) {
  return discover_tree(TraceSource(std::move(traces)));
}

}  // namespace opera
