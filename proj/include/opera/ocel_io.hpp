#pragma once

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <json.hpp>

#include "opera/error.hpp"
#include "opera/ocel.hpp"
#include "opera/time.hpp"

namespace opera {

enum class LogFormat { json, xml, csv };

inline std::string_view to_string(LogFormat f) {
  switch (f) {
    case LogFormat::json: return "json";
    case LogFormat::xml: return "xml";
    case LogFormat::csv: return "csv";
  }
  return "json";
}

inline std::optional<LogFormat> parse_log_format(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "json" || lower == "jsonocel" || lower == "ocel-json") return LogFormat::json;
  if (lower == "xml" || lower == "xmlocel" || lower == "ocel-xml") return LogFormat::xml;
  if (lower == "csv") return LogFormat::csv;
  return std::nullopt;
}

inline std::optional<LogFormat> format_from_path(const std::filesystem::path& path) {
  auto ext = path.extension().string();
  if (ext.empty()) return std::nullopt;
  return parse_log_format(ext.substr(1));
}

namespace detail {

constexpr std::string_view kStartAttribute = "start_timestamp";

inline std::string json_string(const nlohmann::json& node, const char* key,
                               const std::string& where) {
  auto it = node.find(key);
  if (it == node.end())
    throw SchemaError(where + ": missing required field '" + key + "'");
  if (!it->is_string())
    throw SchemaError(where + ": field '" + key + "' must be a string");
  return it->get<std::string>();
}

inline Event json_event(const std::string& id, const nlohmann::json& body,
                        const std::map<ObjectId, ObjectType>& types) {
  const std::string where = "event '" + id + "'";
  if (!body.is_object()) throw SchemaError(where + " must be an object");
  Event e;
  e.id = id;
  e.activity = json_string(body, "ocel:activity", where);
  e.complete = parse_timestamp(json_string(body, "ocel:timestamp", where));
  e.start = e.complete;
  if (auto vmap = body.find("ocel:vmap"); vmap != body.end() && vmap->is_object()) {
    if (auto st = vmap->find(std::string(kStartAttribute)); st != vmap->end() && !st->is_null()) {
      if (!st->is_string())
        throw SchemaError(where + ": start_timestamp must be a string");
      e.start = parse_timestamp(st->get<std::string>());
    }
  }
  auto omap = body.find("ocel:omap");
  if (omap == body.end()) throw SchemaError(where + ": missing required field 'ocel:omap'");
  if (!omap->is_array()) throw SchemaError(where + ": 'ocel:omap' must be an array");
  for (const auto& oi : *omap) {
    if (!oi.is_string()) throw SchemaError(where + ": object ids must be strings");
    const auto name = oi.get<std::string>();
    auto t = types.find(name);
    if (t == types.end())
      throw SchemaError(where + ": object '" + name + "' missing from ocel:objects");
    e.omap[t->second].insert(name);
  }
  return e;
}

}  // namespace detail

// OCEL-JSON. `ocel:events` may be an id-keyed object or an array of events
// carrying `ocel:id`.
inline Ocel import_json(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(e.what(), e.byte, "byte");
  }
  if (!doc.is_object()) throw SchemaError("OCEL-JSON document must be an object");

  std::map<ObjectId, ObjectType> types;
  if (auto objs = doc.find("ocel:objects"); objs != doc.end() && !objs->is_null()) {
    if (!objs->is_object()) throw SchemaError("'ocel:objects' must be an object");
    for (const auto& [id, body] : objs->items())
      types[id] = detail::json_string(body, "ocel:type", "object '" + id + "'");
  }

  auto evs = doc.find("ocel:events");
  if (evs == doc.end()) throw SchemaError("missing required field 'ocel:events'");
  std::vector<Event> events;
  if (evs->is_object()) {
    for (const auto& [id, body] : evs->items())
      events.push_back(detail::json_event(id, body, types));
  } else if (evs->is_array()) {
    for (const auto& body : *evs) {
      auto id = detail::json_string(body, "ocel:id", "event");
      events.push_back(detail::json_event(id, body, types));
    }
  } else {
    throw SchemaError("'ocel:events' must be an object or array");
  }
  return Ocel(std::move(events), std::move(types));
}

// Canonical OCEL-JSON: sorted keys, start timestamps always present, two-space
// indentation. Byte-stable for a given log.
inline std::string serialize_json(const Ocel& log) {
  using nlohmann::json;
  json types = json::array();
  std::set<ObjectType> type_names;
  for (const auto& [oi, type] : log.objects()) type_names.insert(type);
  for (const auto& t : type_names) types.push_back(t);

  json events = json::object();
  for (const auto& e : log.events()) {
    json omap = json::array();
    for (const auto& oi : e.objects()) omap.push_back(oi);
    events[e.id] = {
        {"ocel:activity", e.activity},
        {"ocel:timestamp", format_timestamp(e.complete)},
        {"ocel:omap", std::move(omap)},
        {"ocel:vmap", {{std::string(detail::kStartAttribute), format_timestamp(e.start)}}},
    };
  }
  json objects = json::object();
  for (const auto& [oi, type] : log.objects())
    objects[oi] = {{"ocel:type", type}, {"ocel:ovmap", json::object()}};

  json doc = {
      {"ocel:global-log",
       {{"ocel:version", "1.0"},
        {"ocel:ordering", "timestamp"},
        {"ocel:attribute-names", json::array({std::string(detail::kStartAttribute)})},
        {"ocel:object-types", std::move(types)}}},
      {"ocel:events", std::move(events)},
      {"ocel:objects", std::move(objects)},
  };
  return doc.dump(2) + "\n";
}

namespace detail {

using boost::property_tree::ptree;

// Value of the first child `<tag key="name" value="..."/>` under `node`.
inline std::optional<std::string> xml_keyed(const ptree& node, std::string_view key,
                                            std::string_view tag = {}) {
  for (const auto& [name, child] : node) {
    if (name == "<xmlattr>") continue;
    if (!tag.empty() && name != tag) continue;
    if (child.get<std::string>("<xmlattr>.key", "") == key) {
      if (auto v = child.get_optional<std::string>("<xmlattr>.value")) return *v;
      return std::string{};
    }
  }
  return std::nullopt;
}

inline const ptree* xml_list(const ptree& node, std::string_view key) {
  for (const auto& [name, child] : node)
    if (name == "list" && child.get<std::string>("<xmlattr>.key", "") == key) return &child;
  return nullptr;
}

}  // namespace detail

// OCEL-XML (`<log><events><event>...` with keyed string/date/list children).
inline Ocel import_xml(std::string_view text) {
  using detail::ptree;
  ptree doc;
  try {
    std::istringstream in{std::string(text)};
    boost::property_tree::read_xml(in, doc);
  } catch (const boost::property_tree::xml_parser_error& e) {
    throw ParseError(e.message(), e.line(), "line");
  }
  auto root = doc.get_child_optional("log");
  if (!root) throw SchemaError("OCEL-XML document has no <log> root");

  std::map<ObjectId, ObjectType> types;
  if (auto objects = root->get_child_optional("objects")) {
    for (const auto& [name, obj] : *objects) {
      if (name != "object") continue;
      auto id = detail::xml_keyed(obj, "id");
      auto type = detail::xml_keyed(obj, "type");
      if (!id || id->empty()) throw SchemaError("object without 'id'");
      if (!type || type->empty()) throw SchemaError("object '" + *id + "' without 'type'");
      types[*id] = *type;
    }
  }

  auto events_node = root->get_child_optional("events");
  if (!events_node) throw SchemaError("OCEL-XML document has no <events>");
  std::vector<Event> events;
  for (const auto& [name, node] : *events_node) {
    if (name != "event") continue;
    Event e;
    auto id = detail::xml_keyed(node, "id");
    if (!id || id->empty()) throw SchemaError("event without 'id'");
    e.id = *id;
    const std::string where = "event '" + e.id + "'";
    auto activity = detail::xml_keyed(node, "activity");
    if (!activity) throw SchemaError(where + ": missing 'activity'");
    e.activity = *activity;
    auto ts = detail::xml_keyed(node, "timestamp");
    if (!ts) throw SchemaError(where + ": missing 'timestamp'");
    e.complete = parse_timestamp(*ts);
    e.start = e.complete;
    if (const auto* vmap = detail::xml_list(node, "vmap")) {
      if (auto st = detail::xml_keyed(*vmap, detail::kStartAttribute); st && !st->empty())
        e.start = parse_timestamp(*st);
    }
    const auto* omap = detail::xml_list(node, "omap");
    if (!omap) throw SchemaError(where + ": missing 'omap'");
    for (const auto& [tag, ref] : *omap) {
      if (tag == "<xmlattr>") continue;
      auto oi = ref.get<std::string>("<xmlattr>.value", "");
      auto t = types.find(oi);
      if (t == types.end())
        throw SchemaError(where + ": object '" + oi + "' missing from <objects>");
      e.omap[t->second].insert(oi);
    }
    events.push_back(std::move(e));
  }
  return Ocel(std::move(events), std::move(types));
}

namespace detail {

// RFC 4180 reader: quoted fields, doubled quotes, CRLF or LF rows.
inline std::vector<std::pair<std::size_t, std::vector<std::string>>> read_csv(
    std::string_view text) {
  std::vector<std::pair<std::size_t, std::vector<std::string>>> rows;
  std::vector<std::string> row;
  std::string field;
  std::size_t line = 1;
  std::size_t row_line = 1;
  bool quoted = false;
  bool field_started = false;
  auto end_row = [&] {
    row.push_back(std::move(field));
    field.clear();
    const bool blank = row.size() == 1 && row[0].empty();
    if (!blank) rows.emplace_back(row_line, std::move(row));
    row.clear();
    field_started = false;
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line;
        field += c;
      }
      continue;
    }
    if (c == '"') {
      if (field_started && !field.empty())
        throw ParseError("stray quote inside unquoted field", line, "line");
      quoted = true;
      field_started = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
      field_started = false;
    } else if (c == '\r') {
      // handled with the following '\n'
    } else if (c == '\n') {
      end_row();
      row_line = ++line;
    } else {
      field += c;
      field_started = true;
    }
  }
  if (quoted) throw ParseError("unterminated quoted field", line, "line");
  if (!field.empty() || !row.empty()) end_row();
  return rows;
}

inline std::string trim(std::string s) {
  auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

}  // namespace detail

// CSV: `event_id,activity,start_timestamp,complete_timestamp,<type>...`, one
// column per object type with ';'-separated object ids.
inline Ocel import_csv(std::string_view text) {
  auto rows = detail::read_csv(text);
  if (rows.empty()) throw SchemaError("CSV input has no header row");
  const auto& header = rows.front().second;
  static const std::vector<std::string> required = {"event_id", "activity",
                                                    "start_timestamp",
                                                    "complete_timestamp"};
  if (header.size() < required.size())
    throw SchemaError("CSV header must start with event_id,activity,start_timestamp,complete_timestamp");
  for (std::size_t i = 0; i < required.size(); ++i)
    if (detail::trim(header[i]) != required[i])
      throw SchemaError("CSV header column " + std::to_string(i + 1) + " must be '" +
                        required[i] + "'");
  std::vector<ObjectType> type_columns;
  for (std::size_t i = required.size(); i < header.size(); ++i) {
    auto t = detail::trim(header[i]);
    if (t.empty()) throw SchemaError("CSV header has an empty object type column");
    type_columns.push_back(std::move(t));
  }

  std::vector<Event> events;
  std::map<ObjectId, ObjectType> types;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& [line, cells] = rows[r];
    if (cells.size() != header.size())
      throw ParseError("expected " + std::to_string(header.size()) + " fields, found " +
                           std::to_string(cells.size()),
                       line, "line");
    Event e;
    e.id = detail::trim(cells[0]);
    e.activity = detail::trim(cells[1]);
    if (e.id.empty()) throw SchemaError("line " + std::to_string(line) + ": empty event_id");
    const auto complete = detail::trim(cells[3]);
    if (complete.empty())
      throw SchemaError("line " + std::to_string(line) + ": empty complete_timestamp");
    e.complete = parse_timestamp(complete);
    const auto start = detail::trim(cells[2]);
    e.start = start.empty() ? e.complete : parse_timestamp(start);
    for (std::size_t c = 0; c < type_columns.size(); ++c) {
      std::stringstream cell(cells[required.size() + c]);
      std::string oi;
      while (std::getline(cell, oi, ';')) {
        oi = detail::trim(oi);
        if (oi.empty()) continue;
        auto [it, inserted] = types.emplace(oi, type_columns[c]);
        if (!inserted && it->second != type_columns[c])
          throw TypeConflict("object '" + oi + "' listed under types '" + it->second +
                             "' and '" + type_columns[c] + "'");
        e.omap[type_columns[c]].insert(oi);
      }
    }
    events.push_back(std::move(e));
  }
  return Ocel(std::move(events), std::move(types));
}

inline Ocel import_log(std::string_view source, LogFormat format) {
  switch (format) {
    case LogFormat::json: return import_json(source);
    case LogFormat::xml: return import_xml(source);
    case LogFormat::csv: return import_csv(source);
  }
  throw SchemaError("unsupported format");
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("cannot open '" + path.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline nlohmann::json stats_to_json(const LogStats& s) {
  using nlohmann::json;
  json out = {{"events", s.events},
              {"objects", s.objects},
              {"objects_per_type", s.objects_per_type},
              {"events_per_activity", s.events_per_activity},
              {"first", nullptr},
              {"last", nullptr}};
  if (s.first) out["first"] = format_timestamp(*s.first);
  if (s.last) out["last"] = format_timestamp(*s.last);
  return out;
}

// Reads a log from disk; the format defaults to the file extension.
inline Ocel load_log(const std::filesystem::path& path,
                     std::optional<LogFormat> format = std::nullopt) {
  if (!format) format = format_from_path(path);
  if (!format)
    throw SchemaError("cannot infer log format from '" + path.string() +
                      "'; pass one explicitly");
  return import_log(read_file(path), *format);
}

}  // namespace opera
