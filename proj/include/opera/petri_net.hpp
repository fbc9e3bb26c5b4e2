#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "opera/error.hpp"
#include "opera/ocel.hpp"

namespace opera {

using PlaceId = std::string;
using TransitionId = std::string;
using NodeId = std::string;

struct Arc {
  NodeId source;
  NodeId target;

  friend auto operator<=>(const Arc&, const Arc&) = default;
};

// Labeled Petri net. Transitions without a label are silent.
class PetriNet {
 public:
  void add_place(const PlaceId& id) {
    if (transitions_.count(id)) throw InvalidModel("'" + id + "' is already a transition");
    places_.insert(id);
  }

  void add_transition(const TransitionId& id, std::optional<Activity> label = std::nullopt) {
    if (places_.count(id)) throw InvalidModel("'" + id + "' is already a place");
    transitions_[id] = std::move(label);
  }

  void add_arc(const NodeId& source, const NodeId& target) {
    const bool p_to_t = places_.count(source) && transitions_.count(target);
    const bool t_to_p = transitions_.count(source) && places_.count(target);
    if (!p_to_t && !t_to_p)
      throw InvalidModel("arc " + source + " -> " + target +
                         " must connect a place and a transition");
    arcs_.insert(Arc{source, target});
    outputs_[source].insert(target);
    inputs_[target].insert(source);
  }

  const std::set<PlaceId>& places() const { return places_; }
  const std::map<TransitionId, std::optional<Activity>>& transitions() const {
    return transitions_;
  }
  const std::set<Arc>& arcs() const { return arcs_; }

  bool has_place(const NodeId& id) const { return places_.count(id) != 0; }
  bool has_transition(const NodeId& id) const { return transitions_.count(id) != 0; }
  bool has_arc(const NodeId& s, const NodeId& t) const { return arcs_.count(Arc{s, t}) != 0; }

  const std::optional<Activity>& label(const TransitionId& t) const {
    auto it = transitions_.find(t);
    if (it == transitions_.end()) throw InvalidModel("unknown transition '" + t + "'");
    return it->second;
  }

  bool is_silent(const TransitionId& t) const { return !label(t).has_value(); }

  // Preset of a node (for a transition: its input places).
  const std::set<NodeId>& inputs(const NodeId& node) const { return lookup(inputs_, node); }
  // Postset of a node (for a transition: its output places).
  const std::set<NodeId>& outputs(const NodeId& node) const { return lookup(outputs_, node); }

  std::vector<TransitionId> transitions_labeled(const Activity& a) const {
    std::vector<TransitionId> out;
    for (const auto& [t, l] : transitions_)
      if (l && *l == a) out.push_back(t);
    return out;
  }

  friend bool operator==(const PetriNet& a, const PetriNet& b) {
    return a.places_ == b.places_ && a.transitions_ == b.transitions_ && a.arcs_ == b.arcs_;
  }

 private:
  static const std::set<NodeId>& lookup(const std::map<NodeId, std::set<NodeId>>& m,
                                        const NodeId& node) {
    static const std::set<NodeId> none;
    auto it = m.find(node);
    return it == m.end() ? none : it->second;
  }

  std::set<PlaceId> places_;
  std::map<TransitionId, std::optional<Activity>> transitions_;
  std::set<Arc> arcs_;
  std::map<NodeId, std::set<NodeId>> inputs_;
  std::map<NodeId, std::set<NodeId>> outputs_;
};

// Petri net with designated initial and final places; the initial (final)
// marking holds one token in each initial (final) place.
struct AcceptingPetriNet {
  PetriNet net;
  std::set<PlaceId> initial;
  std::set<PlaceId> final;

  friend bool operator==(const AcceptingPetriNet&, const AcceptingPetriNet&) = default;
};

// Object-centric Petri net: typed places plus a set of variable arcs.
// Variability is uniform per (transition, object type).
class Ocpn {
 public:
  Ocpn() = default;

  Ocpn(PetriNet net, std::map<PlaceId, ObjectType> place_types, std::set<Arc> variable_arcs = {})
      : net_(std::move(net)),
        place_types_(std::move(place_types)),
        variable_arcs_(std::move(variable_arcs)) {
    validate();
  }

  const PetriNet& net() const { return net_; }
  const std::map<PlaceId, ObjectType>& place_types() const { return place_types_; }
  const std::set<Arc>& variable_arcs() const { return variable_arcs_; }

  const ObjectType& place_type(const PlaceId& p) const {
    auto it = place_types_.find(p);
    if (it == place_types_.end()) throw InvalidModel("unknown place '" + p + "'");
    return it->second;
  }

  bool is_variable(const Arc& a) const { return variable_arcs_.count(a) != 0; }

  std::set<ObjectType> object_types() const {
    std::set<ObjectType> out;
    for (const auto& [p, t] : place_types_) out.insert(t);
    return out;
  }

  // Types of the places around `t`.
  std::set<ObjectType> surrounding_types(const TransitionId& t) const {
    std::set<ObjectType> out;
    for (const auto& p : net_.inputs(t)) out.insert(place_type(p));
    for (const auto& p : net_.outputs(t)) out.insert(place_type(p));
    return out;
  }

  bool is_variable(const TransitionId& t, const ObjectType& type) const {
    for (const auto& p : net_.inputs(t))
      if (place_type(p) == type) return is_variable(Arc{p, t});
    for (const auto& p : net_.outputs(t))
      if (place_type(p) == type) return is_variable(Arc{t, p});
    return false;
  }

  friend bool operator==(const Ocpn& a, const Ocpn& b) {
    return a.net_ == b.net_ && a.place_types_ == b.place_types_ &&
           a.variable_arcs_ == b.variable_arcs_;
  }

 private:
  void validate() const {
    for (const auto& p : net_.places())
      if (!place_types_.count(p)) throw InvalidModel("place '" + p + "' has no object type");
    for (const auto& [p, t] : place_types_)
      if (!net_.has_place(p)) throw InvalidModel("typed node '" + p + "' is not a place");
    for (const auto& a : variable_arcs_)
      if (!net_.arcs().count(a))
        throw InvalidModel("variable arc " + a.source + " -> " + a.target + " is not in the flow");
    for (const auto& [t, label] : net_.transitions()) {
      std::map<ObjectType, std::set<bool>> seen;
      for (const auto& p : net_.inputs(t)) seen[place_type(p)].insert(is_variable(Arc{p, t}));
      for (const auto& p : net_.outputs(t)) seen[place_type(p)].insert(is_variable(Arc{t, p}));
      for (const auto& [type, kinds] : seen)
        if (kinds.size() > 1)
          throw InvalidModel("transition '" + t + "' mixes variable and fixed arcs for type '" +
                             type + "'");
    }
  }

  PetriNet net_;
  std::map<PlaceId, ObjectType> place_types_;
  std::set<Arc> variable_arcs_;
};

using Token = std::pair<PlaceId, ObjectId>;

// Multiset of tokens.
class Marking {
 public:
  Marking() = default;
  Marking(std::initializer_list<Token> tokens) {
    for (const auto& t : tokens) add(t);
  }

  void add(const Token& t, std::size_t n = 1) {
    if (n) counts_[t] += n;
  }

  // Removes one occurrence; false if the token is absent.
  bool remove(const Token& t) {
    auto it = counts_.find(t);
    if (it == counts_.end()) return false;
    if (--it->second == 0) counts_.erase(it);
    return true;
  }

  std::size_t count(const Token& t) const {
    auto it = counts_.find(t);
    return it == counts_.end() ? 0 : it->second;
  }

  bool contains(const Token& t) const { return count(t) != 0; }

  std::size_t size() const {
    std::size_t n = 0;
    for (const auto& [t, c] : counts_) n += c;
    return n;
  }

  bool empty() const { return counts_.empty(); }
  auto begin() const { return counts_.begin(); }
  auto end() const { return counts_.end(); }

  friend bool operator==(const Marking&, const Marking&) = default;

 private:
  std::map<Token, std::size_t> counts_;
};

struct Binding {
  TransitionId transition;
  std::map<ObjectType, std::set<ObjectId>> objects;
};

inline void check_binding(const Ocpn& net, const Binding& bd) {
  if (!net.net().has_transition(bd.transition))
    throw MalformedBinding("unknown transition '" + bd.transition + "'");
  const auto types = net.surrounding_types(bd.transition);
  for (const auto& [type, ids] : bd.objects)
    if (!types.count(type))
      throw MalformedBinding("type '" + type + "' does not surround '" + bd.transition + "'");
  for (const auto& type : types) {
    auto it = bd.objects.find(type);
    if (it == bd.objects.end())
      throw MalformedBinding("binding of '" + bd.transition + "' lacks type '" + type + "'");
    const bool variable = net.is_variable(bd.transition, type);
    if (!variable && it->second.size() != 1)
      throw MalformedBinding("fixed arcs of '" + bd.transition + "' need exactly one '" +
                             type + "' object");
    if (variable && it->second.empty())
      throw MalformedBinding("variable arcs of '" + bd.transition + "' need at least one '" +
                             type + "' object");
  }
}

// True iff every bound object sits in every input place of its type.
inline bool is_enabled(const Ocpn& net, const Marking& m, const Binding& bd) {
  check_binding(net, bd);
  for (const auto& p : net.net().inputs(bd.transition))
    for (const auto& oi : bd.objects.at(net.place_type(p)))
      if (!m.contains({p, oi})) return false;
  return true;
}

inline Marking fire(const Ocpn& net, const Marking& m, const Binding& bd) {
  if (!is_enabled(net, m, bd))
    throw NotEnabled("binding of '" + bd.transition + "' is not enabled");
  Marking next = m;
  for (const auto& p : net.net().inputs(bd.transition))
    for (const auto& oi : bd.objects.at(net.place_type(p))) next.remove({p, oi});
  for (const auto& p : net.net().outputs(bd.transition))
    for (const auto& oi : bd.objects.at(net.place_type(p))) next.add({p, oi});
  return next;
}

// Accepting net of one object type: its places, the transitions touching
// them and the arcs between the two. Sources become initial, sinks final.
inline AcceptingPetriNet project(const Ocpn& ocpn, const ObjectType& type) {
  AcceptingPetriNet out;
  const auto& net = ocpn.net();
  for (const auto& [p, t] : ocpn.place_types())
    if (t == type) out.net.add_place(p);
  if (out.net.places().empty())
    throw UnknownObjectType("no place has object type '" + type + "'");
  for (const auto& p : out.net.places()) {
    for (const auto& t : net.inputs(p)) out.net.add_transition(t, net.label(t));
    for (const auto& t : net.outputs(p)) out.net.add_transition(t, net.label(t));
  }
  for (const auto& p : out.net.places()) {
    for (const auto& t : net.inputs(p)) out.net.add_arc(t, p);
    for (const auto& t : net.outputs(p)) out.net.add_arc(p, t);
  }
  for (const auto& p : out.net.places()) {
    if (out.net.inputs(p).empty()) out.initial.insert(p);
    if (out.net.outputs(p).empty()) out.final.insert(p);
  }
  return out;
}

}  // namespace opera
