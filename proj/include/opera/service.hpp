#pragma once

// HTTP front end. Sessions live as flat files under a data directory:
//   <root>/<id>/session.json   id, creation time, source format
//   <root>/<id>/log.json       canonical OCEL-JSON
//   <root>/<id>/model.json     discovered model (after /discover)
//   <root>/<id>/replay.jsonl   cached replay, keyed by log, model and window
//   <root>/<id>/report.json    last analysis with raw samples (for DOT export)
// Nothing is kept in memory between requests except the per-session locks, so
// a restarted service sees every session it had before.

#include <httplib.h>

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <sstream>
#include <string>

#include <json.hpp>

#include "opera/discovery.hpp"
#include "opera/error.hpp"
#include "opera/metrics.hpp"
#include "opera/model_io.hpp"
#include "opera/ocel.hpp"
#include "opera/ocel_io.hpp"
#include "opera/replay.hpp"
#include "opera/time.hpp"

namespace opera::service {

namespace fs = std::filesystem;
using nlohmann::json;

struct Response {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";

  json json_body() const { return json::parse(body); }
};

inline Response json_response(int status, const json& body) {
  return {status, body.dump(2) + "\n", "application/json"};
}

inline Response error_response(int status, std::string_view error, const std::string& detail,
                               std::optional<std::size_t> position = std::nullopt) {
  json body = {{"error", error}, {"detail", detail}};
  if (position) body["position"] = *position;
  return json_response(status, body);
}

inline int status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::empty_log: return 409;
    case ErrorCode::unknown_measure:
    case ErrorCode::unknown_object_type:
    case ErrorCode::non_fitting_trace:
    case ErrorCode::non_fitting_log:
    case ErrorCode::missing_visit:
    case ErrorCode::not_enabled: return 422;
    default: return 400;
  }
}

// Raised by handlers for conditions that have no library error code.
struct HttpError {
  int status;
  std::string error;
  std::string detail;
};

namespace detail {

inline std::uint64_t fnv1a(std::string_view data) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string hex(std::uint64_t v) {
  std::ostringstream out;
  out << std::hex;
  out.width(16);
  out.fill('0');
  out << v;
  return out.str();
}

inline void write_atomic(const fs::path& path, std::string_view data) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!out) throw HttpError{500, "IOError", "cannot write " + path.string()};
  }
  fs::rename(tmp, path);
}

inline std::optional<std::string> read_optional(const fs::path& path) {
  if (!fs::exists(path)) return std::nullopt;
  return read_file(path);
}

inline std::string replay_to_jsonl(const std::string& key, const ReplayResult& rr) {
  std::string out = json{{"key", key}, {"remaining_tokens", rr.remaining_tokens}}.dump() + "\n";
  for (const auto& v : rr.visits)
    out += json{{"visit", {v.place, v.object, epoch_ms(v.begin), epoch_ms(v.end)}}}.dump() + "\n";
  for (std::size_t i = 0; i < rr.occurrences.size(); ++i)
    out += json{{"occurrence",
                 {rr.occurrences[i].transition, rr.occurrences[i].event->id, rr.consumed[i]}}}
               .dump() +
           "\n";
  return out;
}

// Restores a cached replay if its key matches; event pointers are resolved
// against `log`, which must be the log the cache was built from.
inline std::optional<ReplayResult> replay_from_jsonl(const std::string& text, const std::string& key,
                                                     const Ocel& log) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) return std::nullopt;
  const auto header = json::parse(line, nullptr, false);
  if (header.is_discarded() || header.value("key", "") != key) return std::nullopt;
  ReplayResult rr;
  rr.remaining_tokens = header.value("remaining_tokens", std::size_t{0});
  while (std::getline(in, line)) {
    const auto row = json::parse(line, nullptr, false);
    if (row.is_discarded()) return std::nullopt;
    if (auto v = row.find("visit"); v != row.end()) {
      rr.visits.push_back({(*v)[0].get<std::string>(), (*v)[1].get<std::string>(),
                           from_epoch_ms((*v)[2].get<std::int64_t>()),
                           from_epoch_ms((*v)[3].get<std::int64_t>())});
    } else if (auto o = row.find("occurrence"); o != row.end()) {
      const auto* e = log.find((*o)[1].get<std::string>());
      if (!e) return std::nullopt;
      rr.occurrences.push_back({(*o)[0].get<std::string>(), e});
      rr.consumed.push_back((*o)[2].get<std::vector<std::size_t>>());
    }
  }
  return rr;
}

// Stored report: measure keys, window, and per-transition samples.
inline json stored_report(const PerformanceReport& report) {
  json measures = json::array();
  for (const auto& k : report.measures) measures.push_back(k.key());
  json out = {{"measures", measures},
              {"transitions", report_to_json(report, ReportOptions{{}, true})}};
  if (report.window)
    out["window"] = {{"from", format_timestamp(report.window->from)},
                     {"to", format_timestamp(report.window->to)}};
  return out;
}

inline PerformanceReport load_report(const json& doc) {
  PerformanceReport report;
  for (const auto& [t, row] : doc.at("transitions").items())
    for (const auto& [key, entry] : row.items()) {
      auto& stats = report.transitions[t][key];
      stats.samples = entry.at("samples").get<std::vector<double>>();
      stats.undefined = entry.at("undefined_count").get<std::size_t>();
    }
  if (auto w = doc.find("window"); w != doc.end())
    report.window = TimeWindow{parse_timestamp(w->at("from").get<std::string>()),
                               parse_timestamp(w->at("to").get<std::string>())};
  return report;
}

inline Timestamp window_bound(const json& v) {
  if (v.is_number()) return from_epoch_seconds(v.get<double>());
  if (v.is_string()) return parse_time_bound(v.get<std::string>());
  throw InvalidWindow("window bounds must be epoch seconds or RFC 3339 strings");
}

}  // namespace detail

class Service {
 public:
  explicit Service(fs::path root) : root_(std::move(root)) { fs::create_directories(root_); }

  const fs::path& root() const { return root_; }

  Response healthz() const { return json_response(200, {{"status", "ok"}}); }

  // `format` may be empty, in which case the file name's extension decides.
  Response create_session(std::string_view upload, const std::string& format,
                          const std::string& filename = {}) {
    return guarded([&] {
      std::optional<LogFormat> f =
          format.empty() ? format_from_path(filename) : parse_log_format(format);
      if (!f)
        throw HttpError{400, "SchemaError",
                        format.empty() ? "no format given and none inferable from the file name"
                                       : "unknown format '" + format + "'"};
      const auto log = import_log(upload, *f);
      const auto id = new_id();
      const auto dir = root_ / id;
      fs::create_directories(dir);
      detail::write_atomic(dir / "log.json", serialize_json(log));
      const json meta = {{"id", id},
                         {"created_at", format_timestamp(std::chrono::time_point_cast<
                                                         std::chrono::milliseconds>(
                                            std::chrono::system_clock::now()))},
                         {"source_format", to_string(*f)}};
      detail::write_atomic(dir / "session.json", meta.dump(2) + "\n");
      return json_response(201, {{"session_id", id}});
    });
  }

  Response summary(const std::string& id) {
    return locked(id, [&](const fs::path& dir) {
      auto meta = json::parse(read_file(dir / "session.json"));
      meta["log"] = stats_to_json(stats(import_json(read_file(dir / "log.json"))));
      meta["has_model"] = fs::exists(dir / "model.json");
      meta["has_report"] = fs::exists(dir / "report.json");
      return json_response(200, meta);
    });
  }

  Response log(const std::string& id) {
    return locked(id, [&](const fs::path& dir) {
      return Response{200, read_file(dir / "log.json")};
    });
  }

  Response model(const std::string& id) {
    return locked(id, [&](const fs::path& dir) {
      auto text = detail::read_optional(dir / "model.json");
      if (!text) throw HttpError{409, "NoModel", "no model discovered for this session"};
      return Response{200, *text};
    });
  }

  Response discover(const std::string& id) {
    return locked(id, [&](const fs::path& dir) {
      const auto ocpn = discover_ocpn(import_json(read_file(dir / "log.json")));
      const auto text = serialize_model(ocpn);
      detail::write_atomic(dir / "model.json", text);
      fs::remove(dir / "report.json");
      json body = {{"places", ocpn.net().places().size()},
                   {"transitions", ocpn.net().transitions().size()},
                   {"arcs", ocpn.net().arcs().size()},
                   {"variable_arcs", ocpn.variable_arcs().size()},
                   {"model", json::parse(text)}};
      return json_response(200, body);
    });
  }

  // Body: {measures: [key], aggregations?: [name], window?: {from, to},
  // samples?: bool}. Returns the report JSON exactly as the CLI prints it.
  Response analyze(const std::string& id, std::string_view body) {
    return locked(id, [&](const fs::path& dir) {
      const auto request = json::parse(body, nullptr, false);
      if (request.is_discarded() || !request.is_object())
        throw ParseError("request body is not a JSON object");
      auto model_text = detail::read_optional(dir / "model.json");
      if (!model_text) throw HttpError{409, "NoModel", "run discovery before analysis"};
      const auto net = parse_model(*model_text);

      std::vector<std::string> keys;
      if (auto m = request.find("measures"); m != request.end()) {
        if (!m->is_array()) throw SchemaError("'measures' must be an array of strings");
        for (const auto& k : *m) {
          if (!k.is_string()) throw SchemaError("'measures' must be an array of strings");
          keys.push_back(k.get<std::string>());
        }
      }
      ReportOptions options;
      if (auto a = request.find("aggregations"); a != request.end()) {
        if (!a->is_array()) throw SchemaError("'aggregations' must be an array");
        options.aggregations.clear();
        for (const auto& name : *a) {
          auto agg = name.is_string() ? parse_aggregation(name.get<std::string>()) : std::nullopt;
          if (!agg) throw SchemaError("unknown aggregation " + name.dump());
          options.aggregations.push_back(*agg);
        }
      }
      options.samples = request.value("samples", false);
      std::optional<TimeWindow> window;
      if (auto w = request.find("window"); w != request.end() && !w->is_null()) {
        if (!w->is_object() || !w->contains("from") || !w->contains("to"))
          throw InvalidWindow("window needs 'from' and 'to'");
        window = TimeWindow{detail::window_bound(w->at("from")), detail::window_bound(w->at("to"))};
        if (window->from > window->to) throw InvalidWindow("window starts after it ends");
      }
      const auto kinds = parse_measures(keys, net.object_types());

      const auto log_text = read_file(dir / "log.json");
      const auto full = import_json(log_text);
      const auto log = window ? filter_window(full, *window) : full;
      std::string key = detail::hex(detail::fnv1a(log_text)) + ":" +
                        detail::hex(detail::fnv1a(*model_text));
      if (window)
        key += ":" + std::to_string(epoch_ms(window->from)) + ":" +
               std::to_string(epoch_ms(window->to));

      std::optional<ReplayResult> rr;
      if (auto cached = detail::read_optional(dir / "replay.jsonl"))
        rr = detail::replay_from_jsonl(*cached, key, log);
      if (!rr) {
        rr = replay(log, net);
        detail::write_atomic(dir / "replay.jsonl", detail::replay_to_jsonl(key, *rr));
      }
      const auto report = build_report(net, *rr, kinds, window);
      detail::write_atomic(dir / "report.json", detail::stored_report(report).dump(2) + "\n");
      return Response{200, serialize_report(report, options)};
    });
  }

  // DOT of the session model. With `measure`, transitions are annotated from
  // the last analysis; that analysis must have computed the measure.
  Response model_dot(const std::string& id, const std::string& measure,
                     const std::string& aggregation) {
    return locked(id, [&](const fs::path& dir) {
      auto model_text = detail::read_optional(dir / "model.json");
      if (!model_text) throw HttpError{409, "NoModel", "no model discovered for this session"};
      const auto net = parse_model(*model_text);
      std::map<TransitionId, std::string> notes;
      if (!measure.empty()) {
        const auto kinds = parse_measures({measure}, net.object_types());
        const auto agg = parse_aggregation(aggregation.empty() ? "mean" : aggregation);
        if (!agg) throw SchemaError("unknown aggregation '" + aggregation + "'");
        auto stored = detail::read_optional(dir / "report.json");
        if (!stored) throw HttpError{409, "NoReport", "no measures computed for this session"};
        const auto report = detail::load_report(json::parse(*stored));
        for (const auto& kind : kinds) {
          bool computed = false;
          for (const auto& [t, row] : report.transitions) computed |= row.count(kind.key()) != 0;
          if (!computed)
            throw HttpError{409, "NoReport", "measure '" + kind.key() + "' was not computed"};
          for (auto& [t, text] : annotations(report, kind, *agg)) {
            auto& slot = notes[t];
            slot += slot.empty() ? text : "\n" + text;
          }
        }
      }
      return Response{200, to_dot(net, notes), "text/vnd.graphviz"};
    });
  }

  void mount(httplib::Server& server) {
    auto send = [](httplib::Response& res, const Response& r) {
      res.status = r.status;
      res.set_content(r.body, r.content_type);
    };
    server.Get("/healthz", [this, send](const httplib::Request&, httplib::Response& res) {
      send(res, healthz());
    });
    server.Post("/sessions", [this, send](const httplib::Request& req, httplib::Response& res) {
      if (!req.has_file("file")) {
        send(res, error_response(400, "SchemaError", "multipart field 'file' is required"));
        return;
      }
      const auto file = req.get_file_value("file");
      std::string format = req.has_file("format") ? req.get_file_value("format").content : "";
      if (format.empty() && req.has_param("format")) format = req.get_param_value("format");
      send(res, create_session(file.content, format, file.filename));
    });
    server.Get(R"(/sessions/([^/]+))", [this, send](const httplib::Request& req,
                                                    httplib::Response& res) {
      send(res, summary(req.matches[1]));
    });
    server.Get(R"(/sessions/([^/]+)/log)", [this, send](const httplib::Request& req,
                                                        httplib::Response& res) {
      send(res, log(req.matches[1]));
    });
    server.Get(R"(/sessions/([^/]+)/model)", [this, send](const httplib::Request& req,
                                                          httplib::Response& res) {
      send(res, model(req.matches[1]));
    });
    server.Get(R"(/sessions/([^/]+)/model\.dot)", [this, send](const httplib::Request& req,
                                                               httplib::Response& res) {
      send(res, model_dot(req.matches[1], req.get_param_value("measure"),
                          req.get_param_value("aggregation")));
    });
    server.Post(R"(/sessions/([^/]+)/discover)", [this, send](const httplib::Request& req,
                                                              httplib::Response& res) {
      send(res, discover(req.matches[1]));
    });
    server.Post(R"(/sessions/([^/]+)/analyze)", [this, send](const httplib::Request& req,
                                                             httplib::Response& res) {
      send(res, analyze(req.matches[1], req.body));
    });
  }

 private:
  static bool valid_id(const std::string& id) {
    return id.size() == 16 && id.find_first_not_of("0123456789abcdef") == std::string::npos;
  }

  std::string new_id() {
    std::lock_guard lock(registry_mutex_);
    for (;;) {
      auto id = detail::hex(rng_());
      if (!fs::exists(root_ / id)) return id;
    }
  }

  std::mutex& session_mutex(const std::string& id) {
    std::lock_guard lock(registry_mutex_);
    auto& m = session_mutexes_[id];
    if (!m) m = std::make_unique<std::mutex>();
    return *m;
  }

  template <class F>
  Response guarded(F&& f) {
    try {
      return f();
    } catch (const HttpError& e) {
      return error_response(e.status, e.error, e.detail);
    } catch (const ParseError& e) {
      return error_response(400, e.name(), e.what(), e.position);
    } catch (const Error& e) {
      return error_response(status_for(e.code()), e.name(), e.what());
    } catch (const json::exception& e) {
      return error_response(400, "SchemaError", e.what());
    } catch (const std::exception& e) {
      return error_response(500, "InternalError", e.what());
    }
  }

  // Runs `f` on the session directory while holding that session's lock.
  template <class F>
  Response locked(const std::string& id, F&& f) {
    const auto dir = root_ / id;
    if (!valid_id(id) || !fs::exists(dir / "session.json"))
      return error_response(404, "NotFound", "unknown session '" + id + "'");
    std::lock_guard lock(session_mutex(id));
    return guarded([&] { return f(dir); });
  }

  fs::path root_;
  std::mutex registry_mutex_;
  std::map<std::string, std::unique_ptr<std::mutex>> session_mutexes_;
  std::mt19937_64 rng_{std::random_device{}()};
};

inline fs::path data_dir_from_env() {
  const char* dir = std::getenv("OPERA_DATA_DIR");
  return dir && *dir ? fs::path(dir) : fs::path("opera-data");
}

inline int port_from_env() {
  const char* port = std::getenv("OPERA_PORT");
  if (!port || !*port) return 8080;
  try {
    return std::stoi(port);
  } catch (const std::exception&) {
    return 8080;
  }
}

// Blocks serving HTTP until the server is stopped.
inline bool serve(const fs::path& data_dir, const std::string& host, int port) {
  Service service(data_dir);
  httplib::Server server;
  service.mount(server);
  return server.listen(host, port);
}

}  // namespace opera::service
