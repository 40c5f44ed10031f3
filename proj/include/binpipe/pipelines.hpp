#pragma once

// Shipped stage library and pipeline variants.

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "binpipe/graph.hpp"
#include "binpipe/phases.hpp"
#include "binpipe/render_targets.hpp"

namespace binpipe {

// ---- stage math -----------------------------------------------------------

// nullopt when any vertex is at or behind the eye plane (no clipping).
std::optional<Triangle> vertex_shade(const MeshTriangle& t, const Camera& camera, Screen screen);

// Fragments whose pixel centers the triangle covers, restricted to `clip`,
// in row-major order. Depth outside [0,1] is dropped.
void rasterize_triangle(const Triangle& t, PixelRange clip, std::vector<Fragment>& out);

// Fills color from the normal; cost > 0 burns extra iterations.
Fragment fragment_shade(Fragment f, int shader_cost = 0);

// The merge key of a fragment. With fault_skew_depth set, odd ids are pushed
// back by 0.25 in depth, which a correct pipeline never does.
DepthKey fragment_key(const Fragment& f, const RenderParams& params);

// Returns true when the fragment holds the pixel afterwards.
bool depth_test_merge(RecordBuffer& depth, const Fragment& f, const DepthKey& key);

// The quad as (c0,c1,c2) and (c0,c2,c3), each under the triangle fill rule.
void sample_micropolygon(const Micropolygon& mp, PixelRange clip, std::vector<Fragment>& out);

// ---- variants -------------------------------------------------------------

struct StageOverride {
  std::optional<BinConfig> bin;
  std::optional<ScheduleDirective> schedule;
};
using Overrides = std::map<std::string, StageOverride>;

const std::vector<std::string>& variant_names();
bool is_raster_variant(const std::string& name);

// Throws std::invalid_argument for unknown names or overrides naming a
// missing stage.
PipelineGraph build_variant(const std::string& name, Screen screen, const Overrides& overrides = {});
void apply_overrides(PipelineGraph& graph, const Overrides& overrides);

// "Stage.bin=WxH" or "Stage.schedule=KIND[:split]" folded into `into`.
void parse_override(const std::string& text, Overrides& into);

// Token graphs that only exist to drive synthesis: "shadow_map",
// "end_stage", "end_bin", "oit".
const std::vector<std::string>& test_graph_names();
PipelineGraph build_test_graph(const std::string& name, Screen screen);

// ---- phase registry -------------------------------------------------------

// Process phases by name, as referenced from pipeline description files.
// A token phase named "token_pass:N" forwards to channels 0..N-1.
std::optional<ProcessPhase> registered_phase(const std::string& name);
std::vector<std::string> registered_phase_names();
std::shared_ptr<const CustomAssign> registered_assign(const std::string& name);

}  // namespace binpipe
