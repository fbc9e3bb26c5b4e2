#pragma once

#include <algorithm>
#include <cstddef>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "opera/error.hpp"
#include "opera/ocel.hpp"
#include "opera/petri_net.hpp"
#include "opera/time.hpp"

namespace opera {

struct EventOccurrence {
  TransitionId transition;
  const Event* event = nullptr;
};

struct TokenVisit {
  PlaceId place;
  ObjectId object;
  Timestamp begin;
  Timestamp end;

  friend bool operator==(const TokenVisit&, const TokenVisit&) = default;
};

// Outcome of replaying a log. `consumed[i]` lists the indices (into
// `visits`) of the token visits that occurrence i consumed.
struct ReplayResult {
  std::vector<EventOccurrence> occurrences;
  std::vector<TokenVisit> visits;
  std::vector<std::vector<std::size_t>> consumed;
  // Tokens left outside the final marking once every trace was replayed.
  std::size_t remaining_tokens = 0;

  std::optional<std::size_t> occurrence_index(const EventId& id) const {
    for (std::size_t i = 0; i < occurrences.size(); ++i)
      if (occurrences[i].event->id == id) return i;
    return std::nullopt;
  }
};

// Replay of one object trace on one accepting net. Entry i of `fired` and
// `consumed` belongs to event i of the trace.
struct ObjectReplay {
  std::vector<TokenVisit> visits;
  std::vector<TransitionId> fired;
  std::vector<std::vector<std::size_t>> consumed;
  std::size_t remaining_tokens = 0;
  bool reached_final = false;
};

namespace detail {

// Token game of a single object on an accepting net. Silent transitions fire
// on demand along the shortest sequence that enables the next visible step
// (ties resolved by transition id); they take no time and fire at the
// latest begin time among the tokens they consume.
class TokenGame {
 public:
  static constexpr std::size_t kMaxSearchStates = 20000;

  TokenGame(const AcceptingPetriNet& pn, const ObjectId& object) : pn_(pn), object_(object) {
    std::size_t i = 0;
    for (const auto& p : pn.net.places()) {
      place_index_[p] = i++;
      place_names_.push_back(p);
    }
    open_.resize(place_names_.size());
    for (const auto& [t, label] : pn.net.transitions()) {
      if (label) continue;
      silent_.push_back(t);
      silent_in_.push_back(indices(pn.net.inputs(t)));
      silent_out_.push_back(indices(pn.net.outputs(t)));
    }
    final_.assign(place_names_.size(), 0);
    for (const auto& p : pn.final) final_[place_index_.at(p)] = 1;
  }

  ObjectReplay run(const std::vector<const Event*>& events,
                   const std::map<const Event*, TransitionId>* assigned) {
    ObjectReplay out;
    visits_ = &out.visits;
    if (events.empty()) return out;

    for (const auto& p : pn_.initial) produce(place_index_.at(p), events.front()->start);

    for (const auto* e : events) {
      auto candidates = pn_.net.transitions_labeled(e->activity);
      if (assigned) {
        if (auto it = assigned->find(e); it != assigned->end() &&
                                         std::find(candidates.begin(), candidates.end(),
                                                   it->second) != candidates.end())
          candidates = {it->second};
      }
      if (candidates.empty())
        throw NonFittingTrace(object_, e->id, "<no transition labeled '" + e->activity + "'>");

      std::vector<std::vector<std::size_t>> inputs;
      for (const auto& t : candidates) inputs.push_back(indices(pn_.net.inputs(t)));
      auto enabled = [&](const std::vector<std::size_t>& counts) -> std::optional<std::size_t> {
        for (std::size_t c = 0; c < inputs.size(); ++c)
          if (std::all_of(inputs[c].begin(), inputs[c].end(),
                          [&](std::size_t p) { return counts[p] > 0; }))
            return c;
        return std::nullopt;
      };

      auto path = search(enabled);
      if (!path) {
        std::string missing = "?";
        for (auto p : inputs.front())
          if (open_[p].empty()) {
            missing = place_names_[p];
            break;
          }
        throw NonFittingTrace(object_, e->id, missing);
      }
      for (auto s : path->first) fire_silent(s);

      const auto c = path->second;
      std::vector<std::size_t> consumed;
      for (auto p : inputs[c]) consumed.push_back(consume(p, e->start));
      for (auto p : indices(pn_.net.outputs(candidates[c]))) produce(p, e->complete);
      out.fired.push_back(candidates[c]);
      out.consumed.push_back(std::move(consumed));
    }

    auto at_final = [&](const std::vector<std::size_t>& counts) -> std::optional<std::size_t> {
      if (counts == final_) return 0;
      return std::nullopt;
    };
    if (auto path = search(at_final)) {
      for (auto s : path->first) fire_silent(s);
      out.reached_final = true;
    }
    const auto counts = current_counts();
    for (std::size_t p = 0; p < counts.size(); ++p)
      if (counts[p] > final_[p]) out.remaining_tokens += counts[p] - final_[p];

    const auto last = events.back()->complete;
    for (auto& q : open_)
      for (auto v : q) out.visits[v].end = last;
    return out;
  }

 private:
  std::vector<std::size_t> indices(const std::set<NodeId>& places) const {
    std::vector<std::size_t> out;
    for (const auto& p : places) out.push_back(place_index_.at(p));
    return out;
  }

  std::vector<std::size_t> current_counts() const {
    std::vector<std::size_t> c(open_.size());
    for (std::size_t p = 0; p < open_.size(); ++p) c[p] = open_[p].size();
    return c;
  }

  void produce(std::size_t place, Timestamp at) {
    open_[place].push_back(visits_->size());
    visits_->push_back(TokenVisit{place_names_[place], object_, at, at});
  }

  std::size_t consume(std::size_t place, Timestamp at) {
    const auto v = open_[place].front();
    open_[place].pop_front();
    (*visits_)[v].end = at;
    return v;
  }

  void fire_silent(std::size_t s) {
    Timestamp at = Timestamp::min();
    for (auto p : silent_in_[s]) at = std::max(at, (*visits_)[open_[p].front()].begin);
    for (auto p : silent_in_[s]) consume(p, at);
    for (auto p : silent_out_[s]) produce(p, at);
  }

  // Breadth-first search over markings reachable by silent firings only.
  // Returns the silent sequence and the goal's payload.
  template <class Goal>
  std::optional<std::pair<std::vector<std::size_t>, std::size_t>> search(Goal goal) const {
    const auto start = current_counts();
    if (auto g = goal(start)) return std::pair{std::vector<std::size_t>{}, *g};
    if (silent_.empty()) return std::nullopt;

    struct Node {
      std::vector<std::size_t> counts;
      std::size_t parent;
      std::size_t via;
    };
    std::vector<Node> nodes{{start, 0, 0}};
    std::set<std::vector<std::size_t>> seen{start};
    for (std::size_t head = 0; head < nodes.size() && nodes.size() < kMaxSearchStates; ++head) {
      for (std::size_t s = 0; s < silent_.size(); ++s) {
        const auto& cur = nodes[head].counts;
        if (!std::all_of(silent_in_[s].begin(), silent_in_[s].end(),
                         [&](std::size_t p) { return cur[p] > 0; }))
          continue;
        auto next = cur;
        for (auto p : silent_in_[s]) --next[p];
        for (auto p : silent_out_[s]) ++next[p];
        if (!seen.insert(next).second) continue;
        nodes.push_back({next, head, s});
        if (auto g = goal(nodes.back().counts)) {
          std::vector<std::size_t> path;
          for (auto n = nodes.size() - 1; n != 0; n = nodes[n].parent) path.push_back(nodes[n].via);
          std::reverse(path.begin(), path.end());
          return std::pair{std::move(path), *g};
        }
      }
    }
    return std::nullopt;
  }

  const AcceptingPetriNet& pn_;
  const ObjectId& object_;
  std::map<PlaceId, std::size_t> place_index_;
  std::vector<PlaceId> place_names_;
  std::vector<std::deque<std::size_t>> open_;
  std::vector<TransitionId> silent_;
  std::vector<std::vector<std::size_t>> silent_in_;
  std::vector<std::vector<std::size_t>> silent_out_;
  std::vector<std::size_t> final_;
  std::vector<TokenVisit>* visits_ = nullptr;
};

}  // namespace detail

// Token-based replay of one object's trace. Initial tokens appear at the
// start of the first event; tokens still present at the end are closed at
// the completion of the last event.
inline ObjectReplay replay_object(const FlatTrace& trace, const AcceptingPetriNet& pn,
                                  const std::map<const Event*, TransitionId>* assigned = nullptr) {
  return detail::TokenGame(pn, trace.case_id).run(trace.events, assigned);
}

// Replays every object of every type on the projection of `net` for its
// type and merges the results. Events whose activity labels no transition
// of `net` are ignored; every other event yields exactly one occurrence.
inline ReplayResult replay(const Ocel& log, const Ocpn& net) {
  ReplayResult out;
  if (log.empty()) return out;

  std::set<Activity> labels;
  for (const auto& [t, l] : net.net().transitions())
    if (l) labels.insert(*l);
  const auto net_types = net.object_types();

  std::map<const Event*, TransitionId> assigned;
  std::map<const Event*, std::vector<std::size_t>> consumed;
  for (const auto& type : log.event_object_types()) {
    const auto flat = flatten(log, type);
    if (!net_types.count(type)) {
      const auto& first = flat.traces.front();
      throw NonFittingLog(NonFittingTrace(first.case_id, first.events.front()->id,
                                          "<no place of type '" + type + "'>"));
    }
    const auto projection = project(net, type);
    for (const auto& trace : flat.traces) {
      FlatTrace visible{trace.case_id, {}};
      for (const auto* e : trace.events)
        if (labels.count(e->activity)) visible.events.push_back(e);

      ObjectReplay r;
      try {
        r = replay_object(visible, projection, &assigned);
      } catch (const NonFittingTrace& err) {
        throw NonFittingLog(err);
      }
      const auto offset = out.visits.size();
      out.visits.insert(out.visits.end(), r.visits.begin(), r.visits.end());
      out.remaining_tokens += r.remaining_tokens;
      for (std::size_t i = 0; i < visible.events.size(); ++i) {
        const auto* e = visible.events[i];
        assigned.emplace(e, r.fired[i]);
        auto& sink = consumed[e];
        for (auto v : r.consumed[i]) sink.push_back(v + offset);
      }
    }
  }

  for (const auto& e : log.events()) {
    auto it = assigned.find(&e);
    if (it == assigned.end()) continue;
    out.occurrences.push_back(EventOccurrence{it->second, &e});
    auto c = std::move(consumed[&e]);
    std::sort(c.begin(), c.end());
    out.consumed.push_back(std::move(c));
  }
  return out;
}

// Tab-separated diagnostics: `token_visit place object begin end` and
// `event_occurrence transition event`.
inline std::string diagnostics_dump(const ReplayResult& rr) {
  std::ostringstream out;
  for (const auto& v : rr.visits)
    out << "token_visit\t" << v.place << '\t' << v.object << '\t' << format_timestamp(v.begin)
        << '\t' << format_timestamp(v.end) << '\n';
  for (const auto& o : rr.occurrences)
    out << "event_occurrence\t" << o.transition << '\t' << o.event->id << '\n';
  return out.str();
}

}  // namespace opera
