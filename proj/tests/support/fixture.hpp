#pragma once

// Blood-test example: one test T1 and two samples S1, S2 meeting in a single
// "conduct test" event, plus the hand-built net it is replayed on.

#include <string>

#include "opera/ocel.hpp"
#include "opera/ocel_io.hpp"
#include "opera/petri_net.hpp"
#include "opera/time.hpp"

namespace opera::testing {

inline Timestamp at(double seconds) { return from_epoch_seconds(seconds); }

inline const std::string kFixtureCsv =
    "event_id,activity,start_timestamp,complete_timestamp,test,sample\n"
    "e1,prepare test,,1970-01-01T00:00:15Z,T1,\n"
    "e2,take sample,,1970-01-01T00:02:00Z,,S1\n"
    "e3,take sample,,1970-01-01T00:02:30Z,,S2\n"
    "e4,conduct test,1970-01-01T00:03:00Z,1970-01-01T00:04:00Z,T1,S1;S2\n";

inline Ocel fixture_log() { return import_csv(kFixtureCsv); }

inline Event make_event(std::string id, std::string activity, double start, double complete,
                        ObjectMap omap) {
  return Event{std::move(id), std::move(activity), at(start), at(complete), std::move(omap)};
}

// test:   p1 -t1-> p3 -t3-> p5 -t4-> p7
// sample: p2 -t2-> p4 -t3-> p6 -t5-> p8 -t6-> p9
// t3 consumes and produces samples through variable arcs, as does t5.
inline Ocpn build_on1() {
  PetriNet net;
  for (int i = 1; i <= 9; ++i) net.add_place("p" + std::to_string(i));
  net.add_transition("t1", "prepare test");
  net.add_transition("t2", "take sample");
  net.add_transition("t3", "conduct test");
  net.add_transition("t4", "examine test");
  net.add_transition("t5", "transfer samples");
  net.add_transition("t6", "clear sample");
  const std::pair<const char*, const char*> arcs[] = {
      {"p1", "t1"}, {"t1", "p3"}, {"p2", "t2"}, {"t2", "p4"}, {"p3", "t3"}, {"p4", "t3"},
      {"t3", "p5"}, {"t3", "p6"}, {"p5", "t4"}, {"t4", "p7"}, {"p6", "t5"}, {"t5", "p8"},
      {"p8", "t6"}, {"t6", "p9"}};
  for (const auto& [s, t] : arcs) net.add_arc(s, t);
  std::map<PlaceId, ObjectType> types = {{"p1", "test"},   {"p3", "test"},   {"p5", "test"},
                                         {"p7", "test"},   {"p2", "sample"}, {"p4", "sample"},
                                         {"p6", "sample"}, {"p8", "sample"}, {"p9", "sample"}};
  std::set<Arc> variable = {{"p4", "t3"}, {"t3", "p6"}, {"p6", "t5"}, {"t5", "p8"}};
  return Ocpn(std::move(net), std::move(types), std::move(variable));
}

}  // namespace opera::testing
