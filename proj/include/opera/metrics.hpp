#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstddef>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "opera/error.hpp"
#include "opera/ocel.hpp"
#include "opera/petri_net.hpp"
#include "opera/replay.hpp"
#include "opera/time.hpp"

namespace opera {

enum class Measure { flow, sojourn, wait, service, sync, pool, lag, object_freq, object_type_freq };

// A measure plus, for pool and lag, the object type it refers to.
struct MeasureKind {
  Measure measure;
  std::optional<ObjectType> type;

  bool is_duration() const {
    return measure != Measure::object_freq && measure != Measure::object_type_freq;
  }

  std::string key() const {
    switch (measure) {
      case Measure::flow: return "flow";
      case Measure::sojourn: return "sojourn";
      case Measure::wait: return "wait";
      case Measure::service: return "service";
      case Measure::sync: return "sync";
      case Measure::pool: return "pool:" + type.value_or("");
      case Measure::lag: return "lag:" + type.value_or("");
      case Measure::object_freq: return "object_freq";
      case Measure::object_type_freq: return "object_type_freq";
    }
    return {};
  }

  friend auto operator<=>(const MeasureKind&, const MeasureKind&) = default;
};

// Parses measure keys. A bare `pool` or `lag` expands to one entry per type in
// `types`.
inline std::vector<MeasureKind> parse_measures(const std::vector<std::string>& keys,
                                               const std::set<ObjectType>& types) {
  static const std::map<std::string_view, Measure> plain = {
      {"flow", Measure::flow},
      {"sojourn", Measure::sojourn},
      {"wait", Measure::wait},
      {"service", Measure::service},
      {"sync", Measure::sync},
      {"object_freq", Measure::object_freq},
      {"object_type_freq", Measure::object_type_freq},
  };
  std::vector<MeasureKind> out;
  auto push = [&out](MeasureKind k) {
    if (std::find(out.begin(), out.end(), k) == out.end()) out.push_back(std::move(k));
  };
  for (const auto& key : keys) {
    if (auto it = plain.find(key); it != plain.end()) {
      push({it->second, std::nullopt});
      continue;
    }
    const auto colon = key.find(':');
    const auto head = key.substr(0, colon);
    if (head != "pool" && head != "lag") throw UnknownMeasure("unknown measure '" + key + "'");
    const auto m = head == "pool" ? Measure::pool : Measure::lag;
    if (colon == std::string::npos) {
      for (const auto& t : types) push({m, t});
      continue;
    }
    auto type = key.substr(colon + 1);
    if (type.empty()) throw UnknownMeasure("measure '" + key + "' names no object type");
    push({m, std::move(type)});
  }
  return out;
}

inline std::vector<std::string> all_measure_keys() {
  return {"flow", "sojourn", "wait",        "service",         "sync",
          "pool", "lag",     "object_freq", "object_type_freq"};
}

namespace detail {

inline const ObjectType* type_in_event(const Event& e, const ObjectId& oi) {
  for (const auto& [type, ids] : e.omap)
    if (ids.count(oi)) return &type;
  return nullptr;
}

}  // namespace detail

// Token visits related to occurrence `index`: for each object of the event,
// the visit with the latest begin time among those the occurrence consumed
// from its transition's input places. Restricting to consumed visits keeps
// the choice well-defined when a loop revisits a place.
inline std::vector<TokenVisit> related_token_visits(const ReplayResult& rr, std::size_t index) {
  const auto& occ = rr.occurrences.at(index);
  const auto& consumed = rr.consumed.at(index);
  std::vector<TokenVisit> out;
  for (const auto& oi : occ.event->objects()) {
    const TokenVisit* best = nullptr;
    for (auto v : consumed) {
      const auto& tv = rr.visits[v];
      if (tv.object != oi) continue;
      if (!best || tv.begin >= best->begin) best = &tv;
    }
    if (!best)
      throw MissingVisit("occurrence of event '" + occ.event->id +
                         "' consumed no token of object '" + oi + "'");
    out.push_back(*best);
  }
  return out;
}

inline std::vector<TokenVisit> related_token_visits(const ReplayResult& rr,
                                                    const EventOccurrence& eo) {
  for (std::size_t i = 0; i < rr.occurrences.size(); ++i)
    if (rr.occurrences[i].event == eo.event && rr.occurrences[i].transition == eo.transition)
      return related_token_visits(rr, i);
  throw MissingVisit("event '" + eo.event->id + "' is not an occurrence of '" + eo.transition +
                     "'");
}

// Flow, sojourn, wait, service or sync time of occurrence `index`, in seconds.
inline double measure_basic(Measure kind, const ReplayResult& rr, std::size_t index) {
  const auto& e = *rr.occurrences.at(index).event;
  if (kind == Measure::service) return seconds_between(e.start, e.complete);
  const auto related = related_token_visits(rr, index);
  if (related.empty()) throw MissingVisit("event '" + e.id + "' has no related token visits");
  Timestamp lo = related.front().begin, hi = lo;
  for (const auto& tv : related) {
    lo = std::min(lo, tv.begin);
    hi = std::max(hi, tv.begin);
  }
  switch (kind) {
    case Measure::flow: return seconds_between(lo, e.complete);
    case Measure::sojourn: return seconds_between(hi, e.complete);
    case Measure::wait: return seconds_between(hi, e.start);
    case Measure::sync: return seconds_between(lo, hi);
    default: break;
  }
  throw UnknownMeasure("not a basic measure");
}

// Pooling or lagging time w.r.t. `type`. Pooling is undefined when the event
// carries no object of `type`; lagging is 0 unless the latest arrival among
// the other types is later than the earliest arrival overall.
inline std::optional<double> measure_typed(Measure kind, const ObjectType& type,
                                           const ReplayResult& rr, std::size_t index) {
  const auto& e = *rr.occurrences.at(index).event;
  const auto related = related_token_visits(rr, index);
  std::optional<Timestamp> all_min, own_min, own_max, other_max;
  for (const auto& tv : related) {
    const auto* t = detail::type_in_event(e, tv.object);
    all_min = all_min ? std::min(*all_min, tv.begin) : tv.begin;
    if (t && *t == type) {
      own_min = own_min ? std::min(*own_min, tv.begin) : tv.begin;
      own_max = own_max ? std::max(*own_max, tv.begin) : tv.begin;
    } else {
      other_max = other_max ? std::max(*other_max, tv.begin) : tv.begin;
    }
  }
  if (kind == Measure::pool) {
    if (!own_min) return std::nullopt;
    return seconds_between(*own_min, *own_max);
  }
  if (kind == Measure::lag) {
    if (other_max && all_min && *other_max > *all_min) return seconds_between(*all_min, *other_max);
    return 0.0;
  }
  throw UnknownMeasure("not a typed measure");
}

inline std::size_t measure_frequency(Measure kind, const Event& e) {
  if (kind == Measure::object_freq) return e.object_count();
  if (kind == Measure::object_type_freq) return e.omap.size();
  throw UnknownMeasure("not a frequency measure");
}

// Value of any measure for occurrence `index`; nullopt means undefined.
inline std::optional<double> evaluate(const MeasureKind& kind, const ReplayResult& rr,
                                      std::size_t index) {
  switch (kind.measure) {
    case Measure::flow:
    case Measure::sojourn:
    case Measure::wait:
    case Measure::service:
    case Measure::sync: return measure_basic(kind.measure, rr, index);
    case Measure::pool:
    case Measure::lag: return measure_typed(kind.measure, kind.type.value_or(""), rr, index);
    case Measure::object_freq:
    case Measure::object_type_freq:
      return static_cast<double>(measure_frequency(kind.measure, *rr.occurrences.at(index).event));
  }
  return std::nullopt;
}

enum class Aggregation { mean, median, min, max };

inline std::string_view to_string(Aggregation a) {
  switch (a) {
    case Aggregation::mean: return "mean";
    case Aggregation::median: return "median";
    case Aggregation::min: return "min";
    case Aggregation::max: return "max";
  }
  return "mean";
}

inline std::optional<Aggregation> parse_aggregation(std::string_view s) {
  if (s == "mean" || s == "avg" || s == "average") return Aggregation::mean;
  if (s == "median") return Aggregation::median;
  if (s == "min") return Aggregation::min;
  if (s == "max") return Aggregation::max;
  return std::nullopt;
}

inline std::vector<Aggregation> all_aggregations() {
  return {Aggregation::mean, Aggregation::median, Aggregation::min, Aggregation::max};
}

struct MeasureStats {
  std::vector<double> samples;  // one per occurrence with a defined value
  std::size_t undefined = 0;

  std::size_t count() const { return samples.size(); }

  std::optional<double> aggregate(Aggregation a) const {
    if (samples.empty()) return std::nullopt;
    switch (a) {
      case Aggregation::mean:
        return std::accumulate(samples.begin(), samples.end(), 0.0) /
               static_cast<double>(samples.size());
      case Aggregation::median: {
        auto s = samples;
        std::sort(s.begin(), s.end());
        const auto n = s.size();
        return n % 2 ? s[n / 2] : (s[n / 2 - 1] + s[n / 2]) / 2.0;
      }
      case Aggregation::min: return *std::min_element(samples.begin(), samples.end());
      case Aggregation::max: return *std::max_element(samples.begin(), samples.end());
    }
    return std::nullopt;
  }
};

struct PerformanceReport {
  std::optional<TimeWindow> window;
  std::vector<MeasureKind> measures;
  // transition -> measure key -> statistics
  std::map<TransitionId, std::map<std::string, MeasureStats>> transitions;

  const MeasureStats* find(const TransitionId& t, const std::string& key) const {
    auto it = transitions.find(t);
    if (it == transitions.end()) return nullptr;
    auto jt = it->second.find(key);
    return jt == it->second.end() ? nullptr : &jt->second;
  }
};

// Measures every occurrence of `rr` and groups the values per labeled
// transition of `net`. Transitions without occurrences get empty entries.
inline PerformanceReport build_report(const Ocpn& net, const ReplayResult& rr,
                                      const std::vector<MeasureKind>& kinds,
                                      std::optional<TimeWindow> window = std::nullopt) {
  PerformanceReport report;
  report.window = window;
  report.measures = kinds;
  if (kinds.empty()) return report;
  for (const auto& [t, label] : net.net().transitions()) {
    if (!label) continue;
    auto& row = report.transitions[t];
    for (const auto& k : kinds) row[k.key()];
  }
  for (std::size_t i = 0; i < rr.occurrences.size(); ++i) {
    auto& row = report.transitions[rr.occurrences[i].transition];
    for (const auto& k : kinds) {
      auto& stats = row[k.key()];
      if (auto v = evaluate(k, rr, i))
        stats.samples.push_back(*v);
      else
        ++stats.undefined;
    }
  }
  return report;
}

// Replays the (optionally windowed) log on `net` and reports the requested
// measures per transition.
inline PerformanceReport analyze(const Ocel& log, const Ocpn& net,
                                 const std::vector<MeasureKind>& kinds,
                                 std::optional<TimeWindow> window = std::nullopt) {
  if (window) {
    const auto windowed = filter_window(log, *window);
    return build_report(net, replay(windowed, net), kinds, window);
  }
  return build_report(net, replay(log, net), kinds, window);
}

struct ReportOptions {
  std::vector<Aggregation> aggregations = all_aggregations();
  bool samples = false;
};

inline nlohmann::json report_to_json(const PerformanceReport& report,
                                     const ReportOptions& options = {}) {
  using nlohmann::json;
  json out = json::object();
  for (const auto& [t, row] : report.transitions) {
    json measures = json::object();
    for (const auto& [key, stats] : row) {
      json entry = {{"count", stats.count()}, {"undefined_count", stats.undefined}};
      for (auto a : options.aggregations) {
        auto v = stats.aggregate(a);
        entry[std::string(to_string(a))] = v ? json(*v) : json(nullptr);
      }
      if (options.samples) entry["samples"] = stats.samples;
      measures[key] = std::move(entry);
    }
    out[t] = std::move(measures);
  }
  return out;
}

inline std::string serialize_report(const PerformanceReport& report,
                                    const ReportOptions& options = {}) {
  return report_to_json(report, options).dump(2) + "\n";
}

// Renders a value of `kind` for display: durations as `1m 30s`, counts as
// plain numbers.
inline std::string format_measure(const MeasureKind& kind, double value) {
  if (kind.is_duration()) return format_duration(value);
  std::ostringstream out;
  out << value;
  return out.str();
}

// Per-transition `<measure> <aggregation>: <value>` labels for DOT export.
// Transitions without samples are left out.
inline std::map<TransitionId, std::string> annotations(const PerformanceReport& report,
                                                       const MeasureKind& kind,
                                                       Aggregation aggregation) {
  std::map<TransitionId, std::string> out;
  const auto key = kind.key();
  for (const auto& [t, row] : report.transitions) {
    auto it = row.find(key);
    if (it == row.end()) continue;
    if (auto v = it->second.aggregate(aggregation))
      out[t] = key + " " + std::string(to_string(aggregation)) + ": " + format_measure(kind, *v);
  }
  return out;
}

}  // namespace opera
