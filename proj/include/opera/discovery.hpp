#pragma once

#include <map>
#include <set>
#include <string>

#include "opera/dfg.hpp"
#include "opera/error.hpp"
#include "opera/inductive_miner.hpp"
#include "opera/ocel.hpp"
#include "opera/petri_net.hpp"
#include "opera/process_tree.hpp"

namespace opera {

// Node ids used for the per-type net of `type` inside a merged OCPN.
inline NetNaming naming_for_type(const ObjectType& type) {
  return NetNaming{"p:" + type + ":", "tau:" + type + ":",
                   [](const Activity& a) { return "t:" + a; }};
}

inline ProcessTree discover_type_tree(const Ocel& log, const ObjectType& type) {
  return discover_from_traces(activity_traces(flatten(log, type)));
}

// Per object type: flatten, discover a tree, convert to an accepting net.
// The nets are merged by unifying labeled transitions with equal activity;
// silent transitions stay per type. An arc at transition t on a place of
// type ot is variable iff some event of t's activity does not carry exactly
// one object of ot.
inline Ocpn discover_ocpn(const Ocel& log) {
  if (log.empty()) throw EmptyLog("cannot discover a model from an empty log");

  PetriNet merged;
  std::map<PlaceId, ObjectType> place_types;
  for (const auto& type : log.event_object_types()) {
    const auto net = tree_to_net(discover_type_tree(log, type), naming_for_type(type));
    for (const auto& p : net.net.places()) {
      merged.add_place(p);
      place_types[p] = type;
    }
    for (const auto& [t, label] : net.net.transitions()) merged.add_transition(t, label);
    for (const auto& a : net.net.arcs()) merged.add_arc(a.source, a.target);
  }

  // activity -> types for which some event has a count other than one
  std::map<Activity, std::set<ObjectType>> variable_types;
  std::map<Activity, std::set<ObjectType>> seen_types;
  for (const auto& e : log.events())
    for (const auto& [type, ids] : e.omap) seen_types[e.activity].insert(type);
  for (const auto& e : log.events())
    for (const auto& type : seen_types[e.activity]) {
      auto it = e.omap.find(type);
      if (it == e.omap.end() || it->second.size() != 1) variable_types[e.activity].insert(type);
    }

  std::set<Arc> variable;
  for (const auto& a : merged.arcs()) {
    const bool from_place = merged.has_place(a.source);
    const auto& place = from_place ? a.source : a.target;
    const auto& transition = from_place ? a.target : a.source;
    const auto& label = merged.label(transition);
    if (!label) continue;
    auto it = variable_types.find(*label);
    if (it != variable_types.end() && it->second.count(place_types.at(place))) variable.insert(a);
  }
  return Ocpn(std::move(merged), std::move(place_types), std::move(variable));
}

}  // namespace opera
