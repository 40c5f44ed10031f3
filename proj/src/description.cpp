#include "binpipe/description.hpp"

#include <fstream>

#include <fmt/format.h>

#include "binpipe/pipelines.hpp"

namespace binpipe {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw DescriptionError(fmt::format("{}: {}", where, what));
}

PrimitiveType type_field(const json& j, const std::string& where) {
  if (!j.is_string()) fail(where, "primitive type must be a string");
  const auto t = parse_primitive_type(j.get<std::string>());
  if (!t) fail(where, fmt::format("unknown primitive type '{}'", j.get<std::string>()));
  return *t;
}

StageDecl parse_stage(const json& s) {
  if (!s.is_object() || !s.contains("name") || !s["name"].is_string()) fail("stage", "needs a string 'name'");
  StageDecl d;
  d.name = s["name"].get<std::string>();
  const std::string at = "stage '" + d.name + "'";

  if (!s.contains("input")) fail(at, "missing 'input'");
  d.input_type = type_field(s["input"], at);
  for (const json& o : s.value("outputs", json::array())) d.output_types.push_back(type_field(o, at));

  if (!s.contains("process") || !s["process"].is_string()) fail(at, "missing 'process'");
  const std::string phase = s["process"].get<std::string>();
  auto process = registered_phase(phase);
  if (!process) fail(at, fmt::format("no registered process phase '{}'", phase));
  d.process = std::move(*process);

  if (s.contains("bin")) {
    const json& b = s["bin"];
    if (b.is_string() && b.get<std::string>() == "full") {
      d.bin = {};
    } else if (b.is_array() && b.size() == 2 && b[0].is_number_integer() && b[1].is_number_integer()) {
      d.bin.bin_width = b[0].get<int>();
      d.bin.bin_height = b[1].get<int>();
    } else {
      fail(at, "'bin' must be [w, h] or \"full\"");
    }
  }
  d.bin.threads_per_bin = s.value("threads_per_bin", 1);

  const std::string assign = s.value("assign", std::string("previous"));
  if (assign == "previous") {
    d.assign = BinAssignDirective::previous();
  } else if (assign == "bounding_box") {
    d.assign = BinAssignDirective::bounding_box();
  } else if (assign == "all") {
    d.assign = BinAssignDirective::to_all();
  } else if (assign.starts_with("custom:")) {
    auto fn = registered_assign(assign.substr(7));
    if (!fn) fail(at, fmt::format("no registered assign function '{}'", assign.substr(7)));
    d.assign = BinAssignDirective::with(std::move(fn));
  } else {
    fail(at, fmt::format("unknown assign '{}'", assign));
  }

  if (s.contains("schedule")) {
    const json& sc = s["schedule"];
    const std::string kind = sc.is_object() ? sc.value("kind", std::string()) : sc.is_string() ? sc.get<std::string>() : "";
    const auto k = parse_schedule_kind(kind);
    if (!k) fail(at, fmt::format("unknown schedule '{}'", kind));
    d.schedule.kind = *k;
    if (sc.is_object() && sc.contains("tile_split")) d.schedule.tile_split_size = sc["tile_split"].get<int>();
  }

  for (const json& dep : s.value("dependencies", json::array())) {
    const std::string kind = dep.value("kind", std::string());
    if (kind == "EndBin") {
      d.dependencies.push_back({DependencyKind::EndBin, ""});
    } else if (kind == "EndStage") {
      d.dependencies.push_back({DependencyKind::EndStage, dep.value("target", std::string())});
    } else {
      fail(at, fmt::format("unknown dependency '{}'", kind));
    }
  }
  return d;
}

}  // namespace

PipelineGraph parse_description(const json& doc, std::optional<Screen> screen) {
  if (!doc.is_object()) fail("description", "top level must be an object");
  Screen sc{1024, 768};
  if (doc.contains("screen")) {
    const json& s = doc["screen"];
    if (!s.is_array() || s.size() != 2) fail("description", "'screen' must be [w, h]");
    sc = {s[0].get<int>(), s[1].get<int>()};
  }
  if (screen) sc = *screen;
  PipelineGraph g(sc);
  try {
    for (const json& s : doc.value("stages", json::array())) g.add_stage(parse_stage(s));
    for (const json& e : doc.value("edges", json::array())) {
      if (!e.contains("from") || !e.contains("to")) fail("edge", "needs 'from' and 'to'");
      g.connect(e["from"].get<std::string>(), e.value("channel", 0), e["to"].get<std::string>());
    }
  } catch (const json::exception& ex) {
    fail("description", ex.what());
  } catch (const GraphError& ex) {
    fail("description", ex.what());
  }
  return g;
}

PipelineGraph load_description(const std::string& path, std::optional<Screen> screen) {
  std::ifstream in(path);
  if (!in) throw DescriptionError(fmt::format("cannot open pipeline file '{}'", path));
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& ex) {
    fail(path, ex.what());
  }
  return parse_description(doc, screen);
}

json to_description(const PipelineGraph& graph, const std::string& name) {
  json stages = json::array();
  for (const StageDecl& s : graph.stages()) {
    json j;
    j["name"] = s.name;
    j["input"] = std::string(to_string(s.input_type));
    json outs = json::array();
    for (PrimitiveType t : s.output_types) outs.push_back(std::string(to_string(t)));
    j["outputs"] = outs;
    j["process"] = s.process.name();
    j["bin"] = s.bin.full_screen() ? json("full") : json::array({s.bin.bin_width, s.bin.bin_height});
    if (s.bin.threads_per_bin != 1) j["threads_per_bin"] = s.bin.threads_per_bin;
    switch (s.assign.kind) {
      case AssignKind::AssignPreviousBins: j["assign"] = "previous"; break;
      case AssignKind::AssignToBoundingBox: j["assign"] = "bounding_box"; break;
      case AssignKind::AssignToAll: j["assign"] = "all"; break;
      case AssignKind::Custom: j["assign"] = "custom:" + s.assign.custom->name; break;
    }
    if (s.schedule.tile_split_size) {
      j["schedule"] = {{"kind", to_string(s.schedule.kind)}, {"tile_split", *s.schedule.tile_split_size}};
    } else {
      j["schedule"] = to_string(s.schedule.kind);
    }
    json deps = json::array();
    for (const auto& d : s.dependencies) {
      json dj = {{"kind", to_string(d.kind)}};
      if (d.kind == DependencyKind::EndStage) dj["target"] = d.target_stage;
      deps.push_back(dj);
    }
    if (!deps.empty()) j["dependencies"] = deps;
    stages.push_back(j);
  }
  json edges = json::array();
  for (const Edge& e : graph.edges())
    edges.push_back({{"from", graph.stage(e.producer).name}, {"channel", e.channel}, {"to", graph.stage(e.consumer).name}});
  json doc;
  if (!name.empty()) doc["name"] = name;
  doc["screen"] = {graph.screen().width, graph.screen().height};
  doc["stages"] = stages;
  doc["edges"] = edges;
  return doc;
}

}  // namespace binpipe
