#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "opera/error.hpp"
#include "opera/time.hpp"

namespace opera {

using EventId = std::string;
using Activity = std::string;
using ObjectId = std::string;
using ObjectType = std::string;

// Objects an event touches, grouped by type. Empty sets never appear.
using ObjectMap = std::map<ObjectType, std::set<ObjectId>>;

struct Event {
  EventId id;
  Activity activity;
  Timestamp start;
  Timestamp complete;
  ObjectMap omap;

  bool involves(const ObjectType& type) const { return omap.count(type) != 0; }

  // All objects of the event, across types.
  std::set<ObjectId> objects() const {
    std::set<ObjectId> out;
    for (const auto& [type, ids] : omap) out.insert(ids.begin(), ids.end());
    return out;
  }

  std::size_t object_count() const {
    std::size_t n = 0;
    for (const auto& [type, ids] : omap) n += ids.size();
    return n;
  }

  friend bool operator==(const Event&, const Event&) = default;
};

// Object-centric event log. Immutable once constructed: the constructor
// validates every invariant and fixes the event order to (complete, id).
class Ocel {
 public:
  Ocel() = default;

  explicit Ocel(std::vector<Event> events,
                std::map<ObjectId, ObjectType> objects = {})
      : events_(std::move(events)), objects_(std::move(objects)) {
    validate();
  }

  const std::vector<Event>& events() const { return events_; }
  const std::map<ObjectId, ObjectType>& objects() const { return objects_; }
  bool empty() const { return events_.empty(); }
  std::size_t size() const { return events_.size(); }

  const ObjectType& type_of(const ObjectId& id) const {
    auto it = objects_.find(id);
    if (it == objects_.end()) throw SchemaError("unknown object '" + id + "'");
    return it->second;
  }

  const Event* find(const EventId& id) const {
    auto it = index_.find(id);
    return it == index_.end() ? nullptr : &events_[it->second];
  }

  // Types that at least one event refers to.
  std::set<ObjectType> event_object_types() const {
    std::set<ObjectType> out;
    for (const auto& e : events_)
      for (const auto& [type, ids] : e.omap) out.insert(type);
    return out;
  }

  friend bool operator==(const Ocel& a, const Ocel& b) {
    return a.events_ == b.events_ && a.objects_ == b.objects_;
  }

 private:
  void validate() {
    for (auto& e : events_) {
      if (e.id.empty()) throw SchemaError("event without identifier");
      if (e.activity.empty())
        throw SchemaError("event '" + e.id + "' has no activity");
      if (e.start > e.complete)
        throw TimestampError("event '" + e.id + "' starts after it completes");
      std::erase_if(e.omap, [](const auto& kv) { return kv.second.empty(); });
      if (e.omap.empty())
        throw SchemaError("event '" + e.id + "' references no objects");
      for (const auto& [type, ids] : e.omap) {
        if (type.empty())
          throw SchemaError("event '" + e.id + "' has an empty object type");
        for (const auto& oi : ids) {
          if (oi.empty())
            throw SchemaError("event '" + e.id + "' has an empty object id");
          auto [it, inserted] = objects_.emplace(oi, type);
          if (!inserted && it->second != type)
            throw TypeConflict("object '" + oi + "' has types '" + it->second +
                               "' and '" + type + "'");
        }
      }
    }
    std::sort(events_.begin(), events_.end(), [](const Event& a, const Event& b) {
      if (a.complete != b.complete) return a.complete < b.complete;
      return a.id < b.id;
    });
    index_.clear();
    index_.reserve(events_.size());
    for (std::size_t i = 0; i < events_.size(); ++i) {
      if (!index_.emplace(events_[i].id, i).second)
        throw SchemaError("duplicate event identifier '" + events_[i].id + "'");
    }
  }

  std::vector<Event> events_;
  std::map<ObjectId, ObjectType> objects_;
  std::unordered_map<EventId, std::size_t> index_;
};

// One object's view of the log. Event pointers refer into the Ocel the trace
// was flattened from, which must outlive it.
struct FlatTrace {
  ObjectId case_id;
  std::vector<const Event*> events;
};

struct FlatLog {
  ObjectType type;
  std::vector<FlatTrace> traces;  // ordered by case id
};

// Single-case view on `type`: events without the type disappear, events with
// k objects of the type are replicated into k traces.
inline FlatLog flatten(const Ocel& log, const ObjectType& type) {
  std::map<ObjectId, std::vector<const Event*>> by_object;
  for (const auto& e : log.events()) {
    auto it = e.omap.find(type);
    if (it == e.omap.end()) continue;
    for (const auto& oi : it->second) by_object[oi].push_back(&e);
  }
  if (by_object.empty())
    throw UnknownObjectType("no event refers to object type '" + type + "'");

  FlatLog out{type, {}};
  out.traces.reserve(by_object.size());
  for (auto& [oi, events] : by_object)
    out.traces.push_back(FlatTrace{oi, std::move(events)});
  return out;
}

// Keeps the events completing inside [from, to] and the objects they use.
inline Ocel filter_window(const Ocel& log, Timestamp from, Timestamp to) {
  if (from > to)
    throw InvalidWindow("window start " + format_timestamp(from) +
                        " is after its end " + format_timestamp(to));
  std::vector<Event> kept;
  std::map<ObjectId, ObjectType> objects;
  for (const auto& e : log.events()) {
    if (e.complete < from || e.complete > to) continue;
    kept.push_back(e);
    for (const auto& [type, ids] : e.omap)
      for (const auto& oi : ids) objects.emplace(oi, type);
  }
  return Ocel(std::move(kept), std::move(objects));
}

struct TimeWindow {
  Timestamp from;
  Timestamp to;

  friend bool operator==(const TimeWindow&, const TimeWindow&) = default;
};

inline Ocel filter_window(const Ocel& log, const TimeWindow& window) {
  return filter_window(log, window.from, window.to);
}

struct LogStats {
  std::size_t events = 0;
  std::size_t objects = 0;
  std::map<ObjectType, std::size_t> objects_per_type;
  std::map<Activity, std::size_t> events_per_activity;
  std::optional<Timestamp> first;
  std::optional<Timestamp> last;
};

inline LogStats stats(const Ocel& log) {
  LogStats s;
  s.events = log.size();
  s.objects = log.objects().size();
  for (const auto& [oi, type] : log.objects()) ++s.objects_per_type[type];
  for (const auto& e : log.events()) {
    ++s.events_per_activity[e.activity];
    if (!s.first || e.start < *s.first) s.first = e.start;
    if (!s.last || e.complete > *s.last) s.last = e.complete;
  }
  return s;
}

}  // namespace opera
