#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "opera/error.hpp"
#include "opera/ocel.hpp"
#include "opera/petri_net.hpp"

namespace opera {

struct ProcessTree {
  enum class Kind { activity, silent, sequence, exclusive, parallel, loop };

  Kind kind = Kind::silent;
  Activity label;  // activity leaves only
  std::vector<ProcessTree> children;

  static ProcessTree leaf(Activity a) { return {Kind::activity, std::move(a), {}}; }
  static ProcessTree tau() { return {Kind::silent, {}, {}}; }
  static ProcessTree op(Kind k, std::vector<ProcessTree> children) {
    return {k, {}, std::move(children)};
  }
  static ProcessTree seq(std::vector<ProcessTree> c) { return op(Kind::sequence, std::move(c)); }
  static ProcessTree xor_(std::vector<ProcessTree> c) { return op(Kind::exclusive, std::move(c)); }
  static ProcessTree par(std::vector<ProcessTree> c) { return op(Kind::parallel, std::move(c)); }
  static ProcessTree loop(std::vector<ProcessTree> c) { return op(Kind::loop, std::move(c)); }

  bool is_leaf() const { return kind == Kind::activity || kind == Kind::silent; }

  bool well_formed() const {
    if (is_leaf()) return children.empty() && (kind == Kind::silent || !label.empty());
    if (children.empty() || (kind == Kind::loop && children.size() < 2)) return false;
    for (const auto& c : children)
      if (!c.well_formed()) return false;
    return true;
  }

  // `->(a, X(b, tau))`-style notation; `+` is parallel, `*` loop.
  std::string to_string() const {
    switch (kind) {
      case Kind::activity: return label;
      case Kind::silent: return "tau";
      default: break;
    }
    std::string out = kind == Kind::sequence    ? "->("
                      : kind == Kind::exclusive ? "X("
                      : kind == Kind::parallel  ? "+("
                                                : "*(";
    for (std::size_t i = 0; i < children.size(); ++i) {
      if (i) out += ", ";
      out += children[i].to_string();
    }
    return out + ")";
  }

  friend bool operator==(const ProcessTree&, const ProcessTree&) = default;
};

// Identifier scheme for nodes created by tree_to_net.
struct NetNaming {
  std::string place_prefix = "p";
  std::string silent_prefix = "tau";
  std::function<TransitionId(const Activity&)> labeled = [](const Activity& a) {
    return "t:" + a;
  };
};

namespace detail {

class TreeNetBuilder {
 public:
  explicit TreeNetBuilder(const NetNaming& naming) : naming_(naming) {}

  AcceptingPetriNet build(const ProcessTree& tree) {
    if (!tree.well_formed()) throw InvalidModel("malformed process tree " + tree.to_string());
    const auto source = place();
    const auto sink = place();
    emit(tree, source, sink);
    return {std::move(net_), {source}, {sink}};
  }

 private:
  PlaceId place() {
    auto id = naming_.place_prefix + std::to_string(places_++);
    net_.add_place(id);
    return id;
  }

  TransitionId silent() {
    auto id = naming_.silent_prefix + std::to_string(silents_++);
    net_.add_transition(id);
    return id;
  }

  TransitionId labeled(const Activity& a) {
    auto id = naming_.labeled(a);
    for (int n = 2; net_.has_transition(id) || net_.has_place(id); ++n)
      id = naming_.labeled(a) + "#" + std::to_string(n);
    net_.add_transition(id, a);
    return id;
  }

  void link(const NodeId& from, const TransitionId& t, const NodeId& to) {
    net_.add_arc(from, t);
    net_.add_arc(t, to);
  }

  void emit(const ProcessTree& node, const PlaceId& in, const PlaceId& out) {
    using K = ProcessTree::Kind;
    switch (node.kind) {
      case K::activity: link(in, labeled(node.label), out); return;
      case K::silent: link(in, silent(), out); return;
      case K::sequence: {
        PlaceId prev = in;
        for (std::size_t i = 0; i + 1 < node.children.size(); ++i) {
          auto next = place();
          emit(node.children[i], prev, next);
          prev = next;
        }
        emit(node.children.back(), prev, out);
        return;
      }
      case K::exclusive:
        for (const auto& c : node.children) emit(c, in, out);
        return;
      case K::parallel: {
        const auto split = silent();
        net_.add_arc(in, split);
        std::vector<PlaceId> ends;
        for (const auto& c : node.children) {
          auto begin = place();
          auto end = place();
          net_.add_arc(split, begin);
          emit(c, begin, end);
          ends.push_back(end);
        }
        const auto join = silent();
        for (const auto& e : ends) net_.add_arc(e, join);
        net_.add_arc(join, out);
        return;
      }
      case K::loop: {
        // Private entry/exit places keep redo iterations from leaking into
        // the siblings that share `in`/`out`.
        const auto head = place();
        const auto tail = place();
        link(in, silent(), head);
        emit(node.children.front(), head, tail);
        for (std::size_t i = 1; i < node.children.size(); ++i) emit(node.children[i], tail, head);
        link(tail, silent(), out);
        return;
      }
    }
  }

  const NetNaming& naming_;
  PetriNet net_;
  std::size_t places_ = 0;
  std::size_t silents_ = 0;
};

}  // namespace detail

// Block-structured accepting net with one source and one sink place.
inline AcceptingPetriNet tree_to_net(const ProcessTree& tree, const NetNaming& naming = {}) {
  return detail::TreeNetBuilder(naming).build(tree);
}

}  // namespace opera
