#pragma once

#include <cstddef>
#include <map>
#include <set>
#include <utility>
#include <vector>

#include "opera/ocel.hpp"

namespace opera {

// Directly-follows graph with edge frequencies.
struct Dfg {
  std::set<Activity> activities;
  std::map<std::pair<Activity, Activity>, std::size_t> edges;
  std::map<Activity, std::size_t> start_activities;
  std::map<Activity, std::size_t> end_activities;

  bool has_edge(const Activity& a, const Activity& b) const {
    return edges.count({a, b}) != 0;
  }

  void add_trace(const std::vector<Activity>& trace) {
    if (trace.empty()) return;
    activities.insert(trace.begin(), trace.end());
    ++start_activities[trace.front()];
    ++end_activities[trace.back()];
    for (std::size_t i = 1; i < trace.size(); ++i) ++edges[{trace[i - 1], trace[i]}];
  }

  friend bool operator==(const Dfg&, const Dfg&) = default;
};

using ActivityTrace = std::vector<Activity>;

inline std::vector<ActivityTrace> activity_traces(const FlatLog& flat) {
  std::vector<ActivityTrace> out;
  out.reserve(flat.traces.size());
  for (const auto& trace : flat.traces) {
    ActivityTrace acts;
    acts.reserve(trace.events.size());
    for (const auto* e : trace.events) acts.push_back(e->activity);
    out.push_back(std::move(acts));
  }
  return out;
}

inline Dfg build_dfg(const std::vector<ActivityTrace>& traces) {
  Dfg dfg;
  for (const auto& t : traces) dfg.add_trace(t);
  return dfg;
}

// Empty traces contribute nothing.
inline Dfg build_dfg(const FlatLog& flat) { return build_dfg(activity_traces(flat)); }

}  // namespace opera
