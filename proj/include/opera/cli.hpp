#pragma once

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "opera/discovery.hpp"
#include "opera/error.hpp"
#include "opera/metrics.hpp"
#include "opera/model_io.hpp"
#include "opera/ocel_io.hpp"
#include "opera/service.hpp"

namespace opera::cli {

enum ExitCode { kOk = 0, kUsage = 1, kDataError = 2, kNonFitting = 3 };

struct CliConfig {
  std::string subcommand;
  std::string input;
  std::string format;
  std::string model;
  std::string out;
  std::vector<std::string> measures;
  std::vector<std::string> aggregations;
  std::string from;
  std::string to;
  bool samples = false;
  std::string data_dir;
  std::string host = "0.0.0.0";
  int port = 0;
};

namespace detail {

inline Ocel read_log(const CliConfig& c) {
  std::optional<LogFormat> format;
  if (!c.format.empty()) {
    format = parse_log_format(c.format);
    if (!format) throw SchemaError("unknown format '" + c.format + "'");
  }
  return load_log(c.input, format);
}

inline Ocpn read_or_discover(const CliConfig& c, const Ocel& log) {
  if (!c.model.empty()) return parse_model(read_file(c.model));
  return discover_ocpn(log);
}

inline std::optional<TimeWindow> window(const CliConfig& c) {
  if (c.from.empty() && c.to.empty()) return std::nullopt;
  TimeWindow w{Timestamp::min(), Timestamp::max()};
  if (!c.from.empty()) w.from = parse_time_bound(c.from);
  if (!c.to.empty()) w.to = parse_time_bound(c.to);
  if (w.from > w.to) throw InvalidWindow("--from is after --to");
  return w;
}

inline std::vector<Aggregation> aggregations(const CliConfig& c) {
  if (c.aggregations.empty()) return all_aggregations();
  std::vector<Aggregation> out;
  for (const auto& name : c.aggregations) {
    auto a = parse_aggregation(name);
    if (!a) throw SchemaError("unknown aggregation '" + name + "'");
    out.push_back(*a);
  }
  return out;
}

inline PerformanceReport report(const CliConfig& c, const Ocel& log, const Ocpn& net,
                                 const std::vector<std::string>& keys) {
  return analyze(log, net, parse_measures(keys, net.object_types()), window(c));
}

inline void emit(const CliConfig& c, const std::string& text, std::ostream& out) {
  if (c.out.empty()) {
    out << text;
    return;
  }
  std::ofstream file(c.out, std::ios::binary | std::ios::trunc);
  file << text;
  if (!file) throw SchemaError("cannot write '" + c.out + "'");
}

inline int execute(const CliConfig& c, std::ostream& out, std::ostream& err) {
  if (c.subcommand == "serve") {
    const auto dir = c.data_dir.empty() ? service::data_dir_from_env() : std::filesystem::path(c.data_dir);
    const int port = c.port ? c.port : service::port_from_env();
    err << "serving " << dir.string() << " on " << c.host << ":" << port << "\n";
    return service::serve(dir, c.host, port) ? kOk : kDataError;
  }

  const auto log = read_log(c);
  if (c.subcommand == "validate") {
    emit(c, stats_to_json(stats(log)).dump(2) + "\n", out);
    return kOk;
  }
  if (c.subcommand == "discover") {
    emit(c, serialize_model(discover_ocpn(log)), out);
    return kOk;
  }
  const auto net = read_or_discover(c, log);
  if (c.subcommand == "analyze") {
    const auto keys = c.measures.empty() ? all_measure_keys() : c.measures;
    emit(c, serialize_report(report(c, log, net, keys), ReportOptions{aggregations(c), c.samples}),
         out);
    return kOk;
  }
  // dot
  std::map<TransitionId, std::string> notes;
  if (!c.measures.empty()) {
    const auto r = report(c, log, net, c.measures);
    const auto agg = aggregations(c).front();
    for (const auto& kind : r.measures)
      for (auto& [t, text] : annotations(r, kind, agg)) {
        auto& slot = notes[t];
        slot += slot.empty() ? text : "\n" + text;
      }
  }
  emit(c, to_dot(net, notes), out);
  return kOk;
}

}  // namespace detail

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  CliConfig c;
  CLI::App app{"Object-centric performance analysis", "opera"};
  app.require_subcommand(1);

  auto add_log = [&c](CLI::App* sub) {
    sub->add_option("log", c.input, "Event log (.json, .xml or .csv)")->required();
    sub->add_option("--format", c.format, "Log format, overriding the file extension")
        ->check(CLI::IsMember({"json", "xml", "csv"}, CLI::ignore_case));
    sub->add_option("--out", c.out, "Write output here instead of stdout");
  };
  auto add_analysis = [&c](CLI::App* sub) {
    sub->add_option("--model", c.model, "Model JSON; discovered from the log when absent");
    sub->add_option("--measures", c.measures, "Comma-separated measure keys")->delimiter(',');
    sub->add_option("--aggregations", c.aggregations, "mean, median, min, max")->delimiter(',');
    sub->add_option("--from", c.from, "Window start (epoch seconds or RFC 3339)");
    sub->add_option("--to", c.to, "Window end (epoch seconds or RFC 3339)");
  };

  auto* validate = app.add_subcommand("validate", "Parse a log and print statistics");
  add_log(validate);
  auto* discover = app.add_subcommand("discover", "Discover an object-centric Petri net");
  add_log(discover);
  auto* analyze_cmd = app.add_subcommand("analyze", "Replay a log and report measures");
  add_log(analyze_cmd);
  add_analysis(analyze_cmd);
  analyze_cmd->add_flag("--samples", c.samples, "Include raw samples");
  auto* dot = app.add_subcommand("dot", "Export the model as Graphviz DOT");
  add_log(dot);
  add_analysis(dot);
  auto* serve = app.add_subcommand("serve", "Start the HTTP service");
  serve->add_option("--data-dir", c.data_dir, "Session directory (default: $OPERA_DATA_DIR)");
  serve->add_option("--host", c.host, "Bind address");
  serve->add_option("--port", c.port, "Port (default: $OPERA_PORT or 8080)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }
  c.subcommand = app.get_subcommands().front()->get_name();

  try {
    return detail::execute(c, out, err);
  } catch (const NonFittingLog& e) {
    err << "opera: " << e.name() << ": " << e.what() << "\n";
    return kNonFitting;
  } catch (const ParseError& e) {
    err << "opera: " << e.name() << ": " << e.what();
    if (e.position) err << " (" << e.position_unit << " " << *e.position << ")";
    err << "\n";
    return kDataError;
  } catch (const Error& e) {
    err << "opera: " << e.name() << ": " << e.what() << "\n";
    return kDataError;
  } catch (const std::exception& e) {
    err << "opera: " << e.what() << "\n";
    return kDataError;
  }
}

}  // namespace opera::cli
