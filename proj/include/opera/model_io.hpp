#pragma once

#include <map>
#include <sstream>
#include <string>
#include <string_view>

#include <json.hpp>

#include "opera/error.hpp"
#include "opera/petri_net.hpp"

namespace opera {

inline nlohmann::json model_to_json(const Ocpn& ocpn) {
  using nlohmann::json;
  json places = json::array();
  for (const auto& [p, type] : ocpn.place_types()) places.push_back({{"id", p}, {"type", type}});
  json transitions = json::array();
  for (const auto& [t, label] : ocpn.net().transitions()) {
    json node = {{"id", t}};
    if (label) node["label"] = *label;
    transitions.push_back(std::move(node));
  }
  json arcs = json::array();
  for (const auto& a : ocpn.net().arcs())
    arcs.push_back({{"source", a.source}, {"target", a.target}, {"variable", ocpn.is_variable(a)}});
  return {{"places", std::move(places)},
          {"transitions", std::move(transitions)},
          {"arcs", std::move(arcs)}};
}

inline std::string serialize_model(const Ocpn& ocpn) { return model_to_json(ocpn).dump(2) + "\n"; }

inline Ocpn model_from_json(const nlohmann::json& doc) {
  auto field = [](const nlohmann::json& node, const char* key) -> const nlohmann::json& {
    auto it = node.find(key);
    if (it == node.end()) throw SchemaError(std::string("model: missing field '") + key + "'");
    return *it;
  };
  auto text = [&](const nlohmann::json& node, const char* key) {
    const auto& v = field(node, key);
    if (!v.is_string()) throw SchemaError(std::string("model: '") + key + "' must be a string");
    return v.get<std::string>();
  };
  if (!doc.is_object()) throw SchemaError("model: document must be an object");

  PetriNet net;
  std::map<PlaceId, ObjectType> types;
  std::set<Arc> variable;
  for (const auto& p : field(doc, "places")) {
    auto id = text(p, "id");
    net.add_place(id);
    types[id] = text(p, "type");
  }
  for (const auto& t : field(doc, "transitions")) {
    std::optional<Activity> label;
    if (auto it = t.find("label"); it != t.end() && !it->is_null()) label = it->get<std::string>();
    net.add_transition(text(t, "id"), std::move(label));
  }
  for (const auto& a : field(doc, "arcs")) {
    Arc arc{text(a, "source"), text(a, "target")};
    net.add_arc(arc.source, arc.target);
    if (auto it = a.find("variable"); it != a.end() && it->is_boolean() && it->get<bool>())
      variable.insert(arc);
  }
  return Ocpn(std::move(net), std::move(types), std::move(variable));
}

inline Ocpn parse_model(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(e.what(), e.byte, "byte");
  }
  return model_from_json(doc);
}

namespace detail {

inline std::string dot_quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out += c;
  }
  return out + "\"";
}

inline const char* type_color(std::size_t index) {
  static constexpr const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                            "#9467bd", "#8c564b", "#e377c2", "#17becf",
                                            "#bcbd22", "#7f7f7f"};
  return palette[index % (sizeof palette / sizeof *palette)];
}

}  // namespace detail

// Graphviz rendering. Places and arcs are coloured per object type; variable
// arcs are drawn as double lines; annotations are appended to the transition
// label on a new line.
inline std::string to_dot(const Ocpn& ocpn,
                          const std::map<TransitionId, std::string>& annotations = {}) {
  std::map<ObjectType, std::string> colors;
  for (const auto& type : ocpn.object_types())
    colors.emplace(type, detail::type_color(colors.size()));

  std::ostringstream out;
  out << "digraph ocpn {\n"
      << "  rankdir=LR;\n"
      << "  node [fontname=\"Helvetica\"];\n";
  for (const auto& [type, color] : colors)
    out << "  // " << type << " " << color << "\n";
  for (const auto& [p, type] : ocpn.place_types()) {
    const auto& c = colors.at(type);
    out << "  " << detail::dot_quote(p) << " [shape=circle, label=\"\", xlabel="
        << detail::dot_quote(p) << ", color=\"" << c << "\", style=filled, fillcolor=\"" << c
        << "40\", tooltip=" << detail::dot_quote(type) << "];\n";
  }
  for (const auto& [t, label] : ocpn.net().transitions()) {
    std::string text = label.value_or("");
    if (auto it = annotations.find(t); it != annotations.end() && !it->second.empty())
      text += (text.empty() ? "" : "\n") + it->second;
    out << "  " << detail::dot_quote(t) << " [shape=box, label=" << detail::dot_quote(text);
    if (!label) out << ", style=filled, fillcolor=\"#000000\", fontcolor=\"#ffffff\", height=0.3";
    out << "];\n";
  }
  for (const auto& a : ocpn.net().arcs()) {
    const auto& place = ocpn.net().has_place(a.source) ? a.source : a.target;
    const auto& c = colors.at(ocpn.place_type(place));
    out << "  " << detail::dot_quote(a.source) << " -> " << detail::dot_quote(a.target)
        << " [color=\"";
    if (ocpn.is_variable(a))
      out << c << ":invis:" << c << "\", penwidth=2";
    else
      out << c << "\"";
    out << "];\n";
  }
  out << "}\n";
  return out.str();
}

}  // namespace opera
