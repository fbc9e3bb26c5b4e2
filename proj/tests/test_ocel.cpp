#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <map>

#include "opera/ocel.hpp"
#include "opera/ocel_io.hpp"
#include "support/fixture.hpp"
#include "support/generators.hpp"

using namespace opera;
using namespace opera::testing;

namespace {

std::vector<EventId> ids(const std::vector<const Event*>& events) {
  std::vector<EventId> out;
  for (const auto* e : events) out.push_back(e->id);
  return out;
}

std::vector<EventId> ids(const Ocel& log) {
  std::vector<EventId> out;
  for (const auto& e : log.events()) out.push_back(e.id);
  return out;
}

// Direct restatement of flattening: one trace per object of the type, holding
// every event that references it, in (completion, id) order.
std::map<ObjectId, std::vector<EventId>> flatten_oracle(const Ocel& log, const ObjectType& type) {
  std::vector<const Event*> all;
  for (const auto& e : log.events()) all.push_back(&e);
  std::sort(all.begin(), all.end(), [](const Event* a, const Event* b) {
    return std::tie(a->complete, a->id) < std::tie(b->complete, b->id);
  });
  std::map<ObjectId, std::vector<EventId>> out;
  for (const auto* e : all) {
    auto it = e->omap.find(type);
    if (it == e->omap.end()) continue;
    for (const auto& o : it->second) out[o].push_back(e->id);
  }
  return out;
}

}  // namespace

TEST_CASE("the CSV fixture imports as four ordered events") {
  const auto log = fixture_log();
  REQUIRE(log.size() == 4);
  CHECK(ids(log) == std::vector<EventId>{"e1", "e2", "e3", "e4"});
  CHECK(log.objects().size() == 3);
  CHECK(log.type_of("S1") == "sample");
  CHECK(log.type_of("T1") == "test");
  const auto* e4 = log.find("e4");
  REQUIRE(e4);
  CHECK(e4->start == at(180));
  CHECK(e4->complete == at(240));
  CHECK(e4->omap.at("sample") == std::set<ObjectId>{"S1", "S2"});
  // A missing start timestamp means an instantaneous event.
  CHECK(log.find("e1")->start == at(15));
  CHECK(log.event_object_types() == std::set<ObjectType>{"sample", "test"});
}

TEST_CASE("JSON, XML and CSV fixtures describe the same log") {
  const auto csv = load_log(std::string(OPERA_DATA_DIR) + "/blood_test.csv");
  const auto xml = load_log(std::string(OPERA_DATA_DIR) + "/blood_test.xml");
  const auto json = load_log(std::string(OPERA_DATA_DIR) + "/blood_test.json");
  CHECK(csv == fixture_log());
  CHECK(xml == csv);
  CHECK(json == csv);
  CHECK(serialize_json(xml) == read_file(std::string(OPERA_DATA_DIR) + "/blood_test.json"));
}

TEST_CASE("an empty event list is a valid log") {
  const auto log = import_json(R"({"ocel:events": {}, "ocel:objects": {}})");
  CHECK(log.empty());
  CHECK(stats(log).events == 0);
  CHECK(import_json(R"({"ocel:events": []})").empty());
}

TEST_CASE("import errors carry their kind") {
  SECTION("malformed JSON reports a byte offset") {
    try {
      import_json(R"({"ocel:events": {"e1": )");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      REQUIRE(e.position);
      CHECK(e.position_unit == "byte");
    }
  }
  SECTION("missing activity") {
    CHECK_THROWS_AS(import_json(R"({"ocel:events": {"e1": {"ocel:timestamp": "1970-01-01T00:00:00Z",
                                   "ocel:omap": ["o1"]}}, "ocel:objects": {"o1": {"ocel:type": "a"}}})"),
                    SchemaError);
  }
  SECTION("object with no type") {
    CHECK_THROWS_AS(import_json(R"({"ocel:events": {"e1": {"ocel:activity": "x",
                                   "ocel:timestamp": "1970-01-01T00:00:00Z", "ocel:omap": ["o1"]}}})"),
                    SchemaError);
  }
  SECTION("start after completion") {
    CHECK_THROWS_AS(import_csv("event_id,activity,start_timestamp,complete_timestamp,a\n"
                               "e1,x,1970-01-01T00:00:10Z,1970-01-01T00:00:05Z,o1\n"),
                    TimestampError);
  }
  SECTION("unparseable timestamp") {
    CHECK_THROWS_AS(import_csv("event_id,activity,start_timestamp,complete_timestamp,a\n"
                               "e1,x,,noon,o1\n"),
                    TimestampError);
  }
  SECTION("one object under two types") {
    CHECK_THROWS_AS(import_csv("event_id,activity,start_timestamp,complete_timestamp,a,b\n"
                               "e1,x,,1970-01-01T00:00:05Z,o1,\n"
                               "e2,y,,1970-01-01T00:00:06Z,,o1\n"),
                    TypeConflict);
  }
  SECTION("CSV row with the wrong field count reports its line") {
    try {
      import_csv("event_id,activity,start_timestamp,complete_timestamp,a\n"
                 "e1,x,,1970-01-01T00:00:05Z,o1\n"
                 "e2,x,1970-01-01T00:00:05Z\n");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      REQUIRE(e.position);
      CHECK(*e.position == 3);
      CHECK(e.position_unit == "line");
    }
  }
  SECTION("duplicate event ids") {
    CHECK_THROWS_AS(import_csv("event_id,activity,start_timestamp,complete_timestamp,a\n"
                               "e1,x,,1970-01-01T00:00:05Z,o1\n"
                               "e1,y,,1970-01-01T00:00:06Z,o1\n"),
                    SchemaError);
  }
  SECTION("malformed XML reports a line") {
    try {
      import_xml("<log>\n<events>\n<event>\n</log>");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.position_unit == "line");
    }
  }
}

TEST_CASE("quoted CSV fields may contain separators") {
  const auto log = import_csv(
      "event_id,activity,start_timestamp,complete_timestamp,order\n"
      "e1,\"pick, pack\",,1970-01-01T00:00:05Z,o1\n"
      "e2,\"say \"\"hi\"\"\",,1970-01-01T00:00:06Z,o1;o2\n");
  CHECK(log.find("e1")->activity == "pick, pack");
  CHECK(log.find("e2")->activity == "say \"hi\"");
  CHECK(log.find("e2")->object_count() == 2);
}

TEST_CASE("flattening the fixture") {
  const auto log = fixture_log();
  const auto samples = flatten(log, "sample");
  REQUIRE(samples.traces.size() == 2);
  CHECK(samples.traces[0].case_id == "S1");
  CHECK(ids(samples.traces[0].events) == std::vector<EventId>{"e2", "e4"});
  CHECK(samples.traces[1].case_id == "S2");
  CHECK(ids(samples.traces[1].events) == std::vector<EventId>{"e3", "e4"});

  const auto tests = flatten(log, "test");
  REQUIRE(tests.traces.size() == 1);
  CHECK(ids(tests.traces[0].events) == std::vector<EventId>{"e1", "e4"});

  CHECK_THROWS_AS(flatten(log, "patient"), UnknownObjectType);
}

TEST_CASE("flattening agrees with a direct restatement on random logs") {
  Rng rng(7);
  for (int round = 0; round < 300; ++round) {
    const auto log = random_ocel(rng);
    for (const auto& type : log.event_object_types()) {
      const auto flat = flatten(log, type);
      const auto oracle = flatten_oracle(log, type);
      REQUIRE(flat.traces.size() == oracle.size());
      std::size_t total = 0;
      for (const auto& trace : flat.traces) {
        CHECK(ids(trace.events) == oracle.at(trace.case_id));
        total += trace.events.size();
      }
      std::size_t incidences = 0;
      for (const auto& e : log.events())
        if (auto it = e.omap.find(type); it != e.omap.end()) incidences += it->second.size();
      CHECK(total == incidences);
    }
  }
}

TEST_CASE("time windows keep events completing inside the bounds") {
  const auto log = fixture_log();
  CHECK(ids(filter_window(log, at(0), at(160))) == std::vector<EventId>{"e1", "e2", "e3"});
  CHECK(ids(filter_window(log, at(15), at(240))) == std::vector<EventId>{"e1", "e2", "e3", "e4"});
  CHECK(filter_window(log, at(300), at(400)).empty());
  CHECK_THROWS_AS(filter_window(log, at(10), at(5)), InvalidWindow);

  const auto w = filter_window(log, at(0), at(160));
  CHECK(w.objects().size() == 3);
  CHECK(filter_window(log, at(0), at(16)).objects().size() == 1);
}

TEST_CASE("windowing is idempotent and nested windows intersect") {
  Rng rng(11);
  for (int round = 0; round < 200; ++round) {
    const auto log = random_ocel(rng);
    auto a = from_epoch_ms(static_cast<std::int64_t>(uniform(rng, 0, 500)) * 1000);
    auto b = from_epoch_ms(static_cast<std::int64_t>(uniform(rng, 0, 500)) * 1000);
    if (a > b) std::swap(a, b);
    const auto once = filter_window(log, a, b);
    CHECK(filter_window(once, a, b) == once);
    for (const auto& e : log.events()) {
      const bool inside = e.complete >= a && e.complete <= b;
      CHECK((once.find(e.id) != nullptr) == inside);
    }
    CHECK(filter_window(filter_window(log, at(0), b), a, at(1000)) == once);
  }
}

TEST_CASE("canonical JSON round-trips") {
  Rng rng(3);
  for (int round = 0; round < 200; ++round) {
    const auto log = random_ocel(rng);
    const auto text = serialize_json(log);
    const auto back = import_json(text);
    CHECK(back == log);
    CHECK(serialize_json(back) == text);
  }
}

TEST_CASE("formats are inferred from extensions") {
  CHECK(format_from_path("a/b.JSON") == LogFormat::json);
  CHECK(format_from_path("x.xml") == LogFormat::xml);
  CHECK(format_from_path("x.csv") == LogFormat::csv);
  CHECK_FALSE(format_from_path("x.txt"));
  CHECK_THROWS_AS(load_log("x.txt"), SchemaError);
}
