#include <catch2/catch_amalgamated.hpp>

#include <algorithm>

#include "opera/discovery.hpp"
#include "opera/replay.hpp"
#include "support/fixture.hpp"
#include "support/generators.hpp"
#include "support/on1_sim.hpp"

using namespace opera;
using namespace opera::testing;
using PT = ProcessTree;

namespace {

bool has_visit(const ReplayResult& rr, const PlaceId& p, const ObjectId& o, double bt, double et) {
  const TokenVisit want{p, o, at(bt), at(et)};
  return std::count(rr.visits.begin(), rr.visits.end(), want) == 1;
}

}  // namespace

TEST_CASE("replaying the fixture on ON1") {
  const auto log = fixture_log();
  const auto rr = replay(log, build_on1());
  CHECK(has_visit(rr, "p3", "T1", 15, 180));
  CHECK(has_visit(rr, "p4", "S1", 120, 180));
  CHECK(has_visit(rr, "p4", "S2", 150, 180));

  REQUIRE(rr.occurrences.size() == 4);
  std::map<EventId, TransitionId> occ;
  for (const auto& o : rr.occurrences) occ[o.event->id] = o.transition;
  CHECK(occ == std::map<EventId, TransitionId>{{"e1", "t1"}, {"e2", "t2"}, {"e3", "t2"}, {"e4", "t3"}});

  const auto i4 = rr.occurrence_index("e4");
  REQUIRE(i4);
  CHECK(rr.consumed[*i4].size() == 3);
  for (auto v : rr.consumed[*i4]) CHECK(rr.visits[v].end == at(180));
  // Tokens in p5 and p6 are never consumed and close at the objects' last event.
  CHECK(has_visit(rr, "p5", "T1", 240, 240));
  CHECK(rr.remaining_tokens == 3);
}

TEST_CASE("replaying an empty log") {
  const auto rr = replay(Ocel{}, build_on1());
  CHECK(rr.occurrences.empty());
  CHECK(rr.visits.empty());
}

TEST_CASE("single-object replay") {
  const auto log = fixture_log();
  const auto test_trace = flatten(log, "test").traces.front();
  const auto r = replay_object(test_trace, project(build_on1(), "test"));
  CHECK(r.fired == std::vector<TransitionId>{"t1", "t3"});
  CHECK(std::count(r.visits.begin(), r.visits.end(), TokenVisit{"p3", "T1", at(15), at(180)}) == 1);

  const auto pn = tree_to_net(PT::leaf("a"));
  const Ocel one({make_event("x", "a", 3, 7, {{"case", {"c"}}})});
  const auto single = replay_object(flatten(one, "case").traces.front(), pn);
  REQUIRE(single.visits.size() == 2);
  CHECK(single.visits[0] == TokenVisit{*pn.initial.begin(), "c", at(3), at(3)});
  CHECK(single.visits[1] == TokenVisit{*pn.final.begin(), "c", at(7), at(7)});
  CHECK(single.reached_final);
  CHECK(single.remaining_tokens == 0);
}

TEST_CASE("skipping a mandatory step does not fit") {
  const auto pn = tree_to_net(PT::seq({PT::leaf("a"), PT::leaf("b"), PT::leaf("c")}));
  const Ocel log({make_event("1", "a", 1, 1, {{"case", {"c1"}}}),
                  make_event("2", "c", 2, 2, {{"case", {"c1"}}})});
  try {
    replay_object(flatten(log, "case").traces.front(), pn);
    FAIL("expected NonFittingTrace");
  } catch (const NonFittingTrace& e) {
    CHECK(e.object == "c1");
    CHECK(e.event == "2");
    CHECK(e.place == "p3");
  }

  // The same through the log-level entry point.
  const Ocpn ocpn(pn.net, [&] {
    std::map<PlaceId, ObjectType> types;
    for (const auto& p : pn.net.places()) types[p] = "case";
    return types;
  }(), {});
  CHECK_THROWS_AS(replay(log, ocpn), NonFittingLog);
  try {
    replay(log, ocpn);
  } catch (const NonFittingLog& e) {
    CHECK(e.code() == ErrorCode::non_fitting_log);
    CHECK(e.event == "2");
  }
}

TEST_CASE("silent steps propagate tokens as soon as they are enabled") {
  // ->(a, X(tau, b), c) replayed on <a, c>: the skip fires when a's token
  // appears, so c waits from a's completion.
  const auto pn = tree_to_net(PT::seq({PT::leaf("a"), PT::xor_({PT::tau(), PT::leaf("b")}), PT::leaf("c")}));
  const Ocel log({make_event("1", "a", 0, 5, {{"case", {"k"}}}),
                  make_event("2", "c", 20, 30, {{"case", {"k"}}})});
  const auto r = replay_object(flatten(log, "case").traces.front(), pn);
  REQUIRE(r.consumed.size() == 2);
  REQUIRE(r.consumed[1].size() == 1);
  const auto& before_c = r.visits[r.consumed[1][0]];
  CHECK(before_c.begin == at(5));
  CHECK(before_c.end == at(20));
  CHECK(r.reached_final);
}

TEST_CASE("the shortest silent path wins and ties go to the smaller id") {
  // Two silent routes from p0 to p1; the direct one is shorter.
  AcceptingPetriNet pn;
  for (auto p : {"p0", "p1", "p2", "pm"}) pn.net.add_place(p);
  pn.net.add_transition("tau_long_1");
  pn.net.add_transition("tau_long_2");
  pn.net.add_transition("tau_short");
  pn.net.add_transition("tau_also_short");
  pn.net.add_transition("t:a", "a");
  pn.net.add_arc("p0", "tau_long_1");
  pn.net.add_arc("tau_long_1", "pm");
  pn.net.add_arc("pm", "tau_long_2");
  pn.net.add_arc("tau_long_2", "p1");
  pn.net.add_arc("p0", "tau_short");
  pn.net.add_arc("tau_short", "p1");
  pn.net.add_arc("p0", "tau_also_short");
  pn.net.add_arc("tau_also_short", "p1");
  pn.net.add_arc("p1", "t:a");
  pn.net.add_arc("t:a", "p2");
  pn.initial = {"p0"};
  pn.final = {"p2"};
  const Ocel log({make_event("1", "a", 0, 1, {{"case", {"k"}}})});
  const auto r = replay_object(flatten(log, "case").traces.front(), pn);
  // p0, then p1 via exactly one silent step, then p2.
  REQUIRE(r.visits.size() == 3);
  CHECK(r.visits[1].place == "p1");
  CHECK(r.remaining_tokens == 0);
}

TEST_CASE("every event yields exactly one occurrence") {
  Rng rng(99);
  for (int round = 0; round < 40; ++round) {
    const auto sync = random_sync_log(rng);
    const auto net = discover_ocpn(sync.log);
    const auto rr = replay(sync.log, net);
    CHECK(rr.occurrences.size() == sync.log.size());
    CHECK(rr.consumed.size() == rr.occurrences.size());
    CHECK(rr.remaining_tokens == 0);
    std::set<const Event*> seen;
    for (std::size_t i = 0; i < rr.occurrences.size(); ++i) {
      const auto& occ = rr.occurrences[i];
      CHECK(seen.insert(occ.event).second);
      CHECK(net.net().label(occ.transition) == occ.event->activity);
      // Consumed visits end at the event's start and belong to its objects.
      const auto objects = occ.event->objects();
      for (auto v : rr.consumed[i]) {
        CHECK(rr.visits[v].end == occ.event->start);
        CHECK(objects.count(rr.visits[v].object));
      }
    }
    for (const auto& v : rr.visits) {
      CHECK(v.begin <= v.end);
      CHECK(net.place_type(v.place) == sync.log.type_of(v.object));
    }
  }
}

TEST_CASE("replay reproduces the token visits of simulated ON1 runs") {
  Rng rng(123);
  const auto on1 = build_on1();
  for (int round = 0; round < 50; ++round) {
    const auto run = simulate_on1(rng, uniform(rng, 1, 6));
    const auto rr = replay(run.log, on1);
    CHECK(rr.occurrences.size() == run.log.size());
    std::multiset<SimVisit> got;
    for (const auto& v : rr.visits) got.insert({v.place, v.object, v.begin, v.end});
    CHECK(got == run.visits);
    for (const auto& o : rr.occurrences) CHECK(on1.net().label(o.transition) == o.event->activity);
  }
}

TEST_CASE("events whose activity is not in the model are ignored") {
  auto events = fixture_log().events();
  events.push_back(make_event("e9", "coffee break", 10, 11, {{"test", {"T1"}}}));
  const auto rr = replay(Ocel(events), build_on1());
  CHECK(rr.occurrences.size() == 4);
}

TEST_CASE("a log type without places in the model does not fit") {
  auto events = fixture_log().events();
  events.push_back(make_event("e9", "prepare test", 10, 11, {{"patient", {"P1"}}, {"test", {"T9"}}}));
  CHECK_THROWS_AS(replay(Ocel(events), build_on1()), NonFittingLog);
}

TEST_CASE("diagnostics dump lists visits and occurrences") {
  const auto dump = diagnostics_dump(replay(fixture_log(), build_on1()));
  CHECK(dump.find("token_visit\tp3\tT1\t1970-01-01T00:00:15Z\t1970-01-01T00:03:00Z\n") !=
        std::string::npos);
  CHECK(dump.find("event_occurrence\tt3\te4\n") != std::string::npos);
  std::size_t lines = std::count(dump.begin(), dump.end(), '\n');
  const auto rr = replay(fixture_log(), build_on1());
  CHECK(lines == rr.visits.size() + rr.occurrences.size());
}
