#pragma once

// The four CLI commands as library calls. Each returns a process exit code
// and writes human-readable text to `out`, problems to `err`.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "binpipe/pipelines.hpp"
#include "binpipe/runtime.hpp"
#include "binpipe/scenes.hpp"

namespace binpipe {

struct RunConfig {
  std::string variant = "binned";
  std::string pipeline_file;  // wins over `variant` when set
  std::string scene_path;
  std::string proc_scene;  // used when scene_path is empty; default depends on the pipeline
  Screen screen{1024, 768};
  int workers = 1;
  Overrides overrides;
  std::size_t strip_mine = 65536;
  int cycle_cap = 32;
  int shader_cost = 0;
  int repeat = 5;
  std::string out_path;
  std::string stats_path;
  bool fault_skew_depth = false;

  // bench only
  std::vector<std::string> variants;
  std::vector<int> shader_costs;
};

PipelineGraph resolve_graph(const RunConfig& cfg);
// quad for triangle pipelines, teapot for patch pipelines.
Scene resolve_scene(const RunConfig& cfg, const PipelineGraph& graph);
RenderParams make_params(const RunConfig& cfg, const Scene& scene);
RuntimeConfig make_runtime_config(const RunConfig& cfg);

// nullopt when no source of the graph consumes the scene's primitive type or
// no reference renderer exists for it.
std::optional<Framebuffer> reference_image(const PipelineGraph& graph, const Scene& scene, Screen screen);

// Binary 8-bit portable pixmap. Channels are clamped to [0,1], scaled by 255
// and rounded half up.
std::uint8_t quantize(float channel);
void write_ppm(const std::string& path, const Framebuffer& fb);
// Returns the decoded 8-bit values divided by 255.
Framebuffer read_ppm(const std::string& path);

int cmd_inspect(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_render(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_verify(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_bench(const RunConfig& cfg, std::ostream& out, std::ostream& err);

struct BenchRow {
  std::string variant;
  int shader_cost = 0;
  std::vector<double> total_ms;  // one per repeat
  double median_ms = 0;
  std::vector<std::pair<std::string, double>> kernel_median_ms;
  RunStats stats;  // from the last repeat
};

double median(std::vector<double> v);

// Each (shader cost, variant) pair is run cfg.repeat times on one pool.
// Variants may be given as "name" or as "name+Stage.key=value+..." to apply
// extra overrides to that row only.
std::vector<BenchRow> run_bench(const RunConfig& cfg, const Scene& scene);

}  // namespace binpipe
