#include <catch2/catch_amalgamated.hpp>

#include "opera/discovery.hpp"
#include "opera/model_io.hpp"
#include "opera/replay.hpp"
#include "support/fixture.hpp"
#include "support/generators.hpp"
#include "support/languages.hpp"

using namespace opera;
using namespace opera::testing;
using PT = ProcessTree;

namespace {

Dfg dfg_of(std::map<std::pair<Activity, Activity>, std::size_t> edges,
           std::map<Activity, std::size_t> starts, std::map<Activity, std::size_t> ends) {
  Dfg d;
  for (const auto& [e, n] : edges) d.activities.insert({e.first, e.second});
  for (const auto& [a, n] : starts) d.activities.insert(a);
  for (const auto& [a, n] : ends) d.activities.insert(a);
  d.edges = std::move(edges);
  d.start_activities = std::move(starts);
  d.end_activities = std::move(ends);
  return d;
}

bool fits(const AcceptingPetriNet& pn, const std::vector<Activity>& trace) {
  std::vector<Event> events;
  for (std::size_t i = 0; i < trace.size(); ++i)
    events.push_back(make_event("e" + std::to_string(i), trace[i], double(i), double(i),
                                {{"case", {"c"}}}));
  if (events.empty()) return net_language(pn, 0).count({}) != 0;
  const Ocel log(std::move(events));
  const auto flat = flatten(log, "case");
  try {
    const auto r = replay_object(flat.traces.front(), pn);
    return r.reached_final && r.remaining_tokens == 0;
  } catch (const NonFittingTrace&) {
    return false;
  }
}

}  // namespace

TEST_CASE("DFG of the fixture's sample log") {
  const auto dfg = build_dfg(flatten(fixture_log(), "sample"));
  CHECK(dfg.edges == std::map<std::pair<Activity, Activity>, std::size_t>{
                         {{"take sample", "conduct test"}, 2}});
  CHECK(dfg.start_activities == std::map<Activity, std::size_t>{{"take sample", 2}});
  CHECK(dfg.end_activities == std::map<Activity, std::size_t>{{"conduct test", 2}});
}

TEST_CASE("DFG edge cases") {
  CHECK(build_dfg(FlatLog{"x", {}}) == Dfg{});
  const auto single = build_dfg(std::vector<ActivityTrace>{{"a"}});
  CHECK(single.edges.empty());
  CHECK(single.start_activities.at("a") == 1);
  CHECK(single.end_activities.at("a") == 1);
  CHECK(build_dfg(std::vector<ActivityTrace>{{}, {}}) == Dfg{});
}

TEST_CASE("DFG counts every adjacent pair") {
  Rng rng(5);
  for (int round = 0; round < 100; ++round) {
    std::vector<ActivityTrace> traces(uniform(rng, 0, 6));
    for (auto& t : traces)
      for (std::size_t i = uniform(rng, 0, 6); i > 0; --i) t.push_back(std::string(1, char('a' + uniform(rng, 0, 3))));
    const auto dfg = build_dfg(traces);
    std::size_t pairs = 0, non_empty = 0, edge_total = 0, start_total = 0;
    for (const auto& t : traces) {
      if (!t.empty()) ++non_empty;
      if (t.size() > 1) pairs += t.size() - 1;
    }
    for (const auto& [e, n] : dfg.edges) edge_total += n;
    for (const auto& [a, n] : dfg.start_activities) start_total += n;
    CHECK(edge_total == pairs);
    CHECK(start_total == non_empty);
  }
}

TEST_CASE("cut detection on small DFGs") {
  CHECK(imd_discover(dfg_of({{{"a", "b"}, 1}}, {{"a", 1}}, {{"b", 1}})) ==
        PT::seq({PT::leaf("a"), PT::leaf("b")}));
  CHECK(imd_discover(build_dfg(flatten(fixture_log(), "sample"))) ==
        PT::seq({PT::leaf("take sample"), PT::leaf("conduct test")}));
  CHECK(imd_discover(dfg_of({{{"a", "b"}, 1}, {{"b", "a"}, 1}}, {{"a", 1}}, {{"a", 1}})) ==
        PT::loop({PT::leaf("a"), PT::leaf("b")}));
  CHECK(imd_discover(dfg_of({}, {{"a", 1}, {"b", 1}}, {{"a", 1}, {"b", 1}})) ==
        PT::xor_({PT::leaf("a"), PT::leaf("b")}));
  CHECK(imd_discover(dfg_of({{{"a", "b"}, 1}, {{"b", "a"}, 1}}, {{"a", 1}, {"b", 1}},
                            {{"a", 1}, {"b", 1}})) == PT::par({PT::leaf("a"), PT::leaf("b")}));
  CHECK(imd_discover(Dfg{}) == PT::tau());
  CHECK(imd_discover(dfg_of({{{"a", "a"}, 3}}, {{"a", 1}}, {{"a", 1}})) ==
        PT::loop({PT::leaf("a"), PT::tau()}));
}

TEST_CASE("sequence parts that can be bypassed become optional") {
  // Traces <a,b,c> and <a,c>.
  const auto dfg = dfg_of({{{"a", "b"}, 1}, {{"b", "c"}, 1}, {{"a", "c"}, 1}}, {{"a", 2}}, {{"c", 2}});
  CHECK(imd_discover(dfg) ==
        PT::seq({PT::leaf("a"), PT::xor_({PT::tau(), PT::leaf("b")}), PT::leaf("c")}));
  CHECK(discover_from_traces({{"a", "b", "c"}, {"a", "c"}}) == imd_discover(dfg));
}

TEST_CASE("a DFG without any cut yields the flower model") {
  // a -> b -> c -> a with every activity a start but only c an end: no
  // sequence or parallel cut, and the loop cut's body swallows everything.
  const auto dfg = dfg_of({{{"a", "b"}, 1}, {{"b", "c"}, 1}, {{"c", "a"}, 1}, {{"b", "a"}, 1}},
                          {{"a", 1}, {"b", 1}}, {{"c", 1}, {"a", 1}});
  const auto tree = imd_discover(dfg);
  CHECK(tree == flower_model({"a", "b", "c"}));
  const auto lang = tree_language(tree, 3);
  CHECK(lang.count({"c", "b", "a"}));
}

TEST_CASE("tree_to_net construction rules") {
  const auto leaf = tree_to_net(PT::leaf("a"));
  CHECK(leaf.net.places().size() == 2);
  CHECK(leaf.net.transitions().size() == 1);
  CHECK(leaf.initial.size() == 1);
  CHECK(leaf.final.size() == 1);
  CHECK(leaf.net.has_arc(*leaf.initial.begin(), "t:a"));
  CHECK(leaf.net.has_arc("t:a", *leaf.final.begin()));

  const auto seq = tree_to_net(PT::seq({PT::leaf("a"), PT::leaf("b")}));
  CHECK(seq.net.places().size() == 3);
  CHECK(seq.net.transitions_labeled("a").size() == 1);
  CHECK(seq.net.transitions_labeled("b").size() == 1);
  CHECK(seq.net.transitions().size() == 2);

  const auto skip = tree_to_net(PT::xor_({PT::leaf("a"), PT::tau()}));
  CHECK(skip.net.places().size() == 2);
  CHECK(skip.net.transitions().size() == 2);
  std::size_t silent = 0;
  for (const auto& [t, l] : skip.net.transitions()) silent += !l;
  CHECK(silent == 1);

  CHECK_THROWS_AS(tree_to_net(PT::loop({PT::leaf("a")})), InvalidModel);
}

TEST_CASE("tree_to_net preserves the language") {
  Rng rng(21);
  for (int round = 0; round < 150; ++round) {
    const bool loops = round % 2 == 1;
    std::vector<Activity> acts;
    for (std::size_t i = uniform(rng, 1, 5); i > 0; --i) acts.push_back(std::string(1, char('a' + i)));
    const auto tree = random_tree(rng, acts, loops);
    const std::size_t bound = loops ? 6 : 5;
    INFO(tree.to_string());
    CHECK(net_language(tree_to_net(tree), bound) == tree_language(tree, bound));
  }
}

TEST_CASE("trace-based discovery fits every input trace") {
  Rng rng(33);
  for (int round = 0; round < 150; ++round) {
    std::vector<Activity> acts;
    for (std::size_t i = uniform(rng, 1, 8); i > 0; --i) acts.push_back("a" + std::to_string(i));
    const auto tree = random_tree(rng, acts);
    std::vector<ActivityTrace> traces;
    for (int k = 0; k < 20; ++k) traces.push_back(play_out(rng, tree));
    const auto found = discover_from_traces(traces);
    REQUIRE(found.well_formed());
    const auto pn = tree_to_net(found);
    INFO("generator " << tree.to_string() << " discovered " << found.to_string());
    for (const auto& t : traces) CHECK(fits(pn, t));
  }
}

TEST_CASE("discovering the fixture") {
  const auto ocpn = discover_ocpn(fixture_log());
  const auto& net = ocpn.net();
  for (const auto& a : {"prepare test", "take sample", "conduct test"})
    CHECK(net.transitions_labeled(a).size() == 1);
  const TransitionId t3 = "t:conduct test";
  CHECK(ocpn.is_variable(t3, "sample"));
  CHECK_FALSE(ocpn.is_variable(t3, "test"));
  for (const auto& a : ocpn.variable_arcs()) {
    const auto& place = net.has_place(a.source) ? a.source : a.target;
    CHECK(ocpn.place_type(place) == "sample");
    CHECK((a.source == t3 || a.target == t3));
  }
  CHECK(ocpn.variable_arcs().size() == 2);
  CHECK(serialize_model(discover_ocpn(fixture_log())) == serialize_model(ocpn));
}

TEST_CASE("a single-type log discovers its own workflow net") {
  std::vector<Event> events;
  for (int c = 0; c < 3; ++c) {
    const auto o = "c" + std::to_string(c);
    events.push_back(make_event(o + "a", "a", c * 10, c * 10, {{"case", {o}}}));
    events.push_back(make_event(o + "b", "b", c * 10 + 1, c * 10 + 1, {{"case", {o}}}));
  }
  const Ocel log(std::move(events));
  const auto ocpn = discover_ocpn(log);
  CHECK(ocpn.variable_arcs().empty());
  const auto projected = project(ocpn, "case");
  CHECK(projected.net == ocpn.net());
  CHECK(projected.net == tree_to_net(PT::seq({PT::leaf("a"), PT::leaf("b")}), naming_for_type("case")).net);
}

TEST_CASE("activities with exactly one object per type get no variable arcs") {
  // c always carries one order and one item; d carries two items once.
  const Ocel log({make_event("1", "c", 1, 1, {{"order", {"o1"}}, {"item", {"i1"}}}),
                  make_event("2", "c", 2, 2, {{"order", {"o2"}}, {"item", {"i2"}}}),
                  make_event("3", "d", 3, 3, {{"item", {"i1"}}}),
                  make_event("4", "d", 4, 4, {{"item", {"i2", "i3"}}}),
                  make_event("5", "c", 5, 5, {{"order", {"o3"}}, {"item", {"i3"}}})});
  const auto ocpn = discover_ocpn(log);
  CHECK_FALSE(ocpn.is_variable("t:c", "order"));
  CHECK_FALSE(ocpn.is_variable("t:c", "item"));
  CHECK(ocpn.is_variable("t:d", "item"));
}

TEST_CASE("discovery rejects empty logs") { CHECK_THROWS_AS(discover_ocpn(Ocel{}), EmptyLog); }

TEST_CASE("every activity becomes exactly one labeled transition") {
  Rng rng(8);
  for (int round = 0; round < 30; ++round) {
    const auto sync = random_sync_log(rng);
    const auto ocpn = discover_ocpn(sync.log);
    std::set<Activity> acts;
    for (const auto& e : sync.log.events()) acts.insert(e.activity);
    std::size_t labeled = 0;
    for (const auto& [t, l] : ocpn.net().transitions()) labeled += l.has_value();
    CHECK(labeled == acts.size());
    for (const auto& a : acts) CHECK(ocpn.net().transitions_labeled(a).size() == 1);
  }
}
