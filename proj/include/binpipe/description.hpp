#pragma once

// JSON pipeline descriptions, one document per pipeline:
//
// {
//   "name": "binned",                      (optional)
//   "screen": [1024, 768],                 (optional; the caller's screen wins when given)
//   "stages": [
//     { "name": "Rasterizer",
//       "input": "Triangle", "outputs": ["Fragment"],
//       "process": "rasterize",            (a registered phase name)
//       "bin": [8, 8] | "full",            (default "full")
//       "threads_per_bin": 1,              (optional)
//       "assign": "previous" | "bounding_box" | "all" | "custom:<name>",
//       "schedule": "LoadBalance" | {"kind": "All", "tile_split": 1024},
//       "dependencies": [ {"kind": "EndStage", "target": "X"}, {"kind": "EndBin"} ] }
//   ],
//   "edges": [ {"from": "VertexShader", "channel": 0, "to": "Rasterizer"} ]
// }

#include <optional>
#include <string>

#include <json.hpp>

#include "binpipe/graph.hpp"

namespace binpipe {

class DescriptionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

PipelineGraph parse_description(const nlohmann::json& doc, std::optional<Screen> screen = std::nullopt);
PipelineGraph load_description(const std::string& path, std::optional<Screen> screen = std::nullopt);

// Inverse of parse_description for graphs built from registered phases.
nlohmann::json to_description(const PipelineGraph& graph, const std::string& name = "");

}  // namespace binpipe
