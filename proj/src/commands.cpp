#include "binpipe/commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "binpipe/description.hpp"
#include "binpipe/oracle.hpp"
#include "binpipe/synthesis.hpp"

namespace binpipe {

using nlohmann::json;

PipelineGraph resolve_graph(const RunConfig& cfg) {
  if (!cfg.pipeline_file.empty()) {
    PipelineGraph g = load_description(cfg.pipeline_file, cfg.screen);
    apply_overrides(g, cfg.overrides);
    return g;
  }
  return build_variant(cfg.variant, cfg.screen, cfg.overrides);
}

Scene resolve_scene(const RunConfig& cfg, const PipelineGraph& graph) {
  if (!cfg.scene_path.empty()) return load_scene_file(cfg.scene_path);
  if (!cfg.proc_scene.empty()) return procedural_scene(cfg.proc_scene, cfg.screen);
  for (int s : graph.sources())
    if (graph.stage(s).input_type == PrimitiveType::Patch) return teapot_scene();
  return quad_scene();
}

RenderParams make_params(const RunConfig& cfg, const Scene& scene) {
  RenderParams p;
  p.screen = cfg.screen;
  p.camera = scene.camera_for(cfg.screen);
  p.shader_cost = cfg.shader_cost;
  p.fault_skew_depth = cfg.fault_skew_depth;
  return p;
}

RuntimeConfig make_runtime_config(const RunConfig& cfg) {
  RuntimeConfig r;
  r.workers = cfg.workers;
  r.cycle_cap = cfg.cycle_cap;
  r.strip_mine = cfg.strip_mine;
  return r;
}

std::optional<Framebuffer> reference_image(const PipelineGraph& graph, const Scene& scene, Screen screen) {
  const PrimitiveType t = type_of(scene.primitives);
  const auto src = graph.sources();
  if (std::none_of(src.begin(), src.end(), [&](int s) { return graph.stage(s).input_type == t; })) return std::nullopt;
  const Camera cam = scene.camera_for(screen);
  if (t == PrimitiveType::MeshTriangle)
    return reference_render(std::get<std::vector<MeshTriangle>>(scene.primitives), cam, screen);
  if (t == PrimitiveType::Patch) return reference_reyes(std::get<std::vector<BezierPatch>>(scene.primitives), cam, screen);
  return std::nullopt;
}

std::uint8_t quantize(float channel) {
  const double c = std::clamp(static_cast<double>(channel), 0.0, 1.0);
  return static_cast<std::uint8_t>(std::floor(c * 255.0 + 0.5));
}

void write_ppm(const std::string& path, const Framebuffer& fb) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", path));
  out << "P6\n" << fb.width << ' ' << fb.height << "\n255\n";
  std::vector<std::uint8_t> row(static_cast<std::size_t>(fb.width) * 3);
  for (int y = 0; y < fb.height; ++y) {
    for (int x = 0; x < fb.width; ++x) {
      const Vec3f& p = fb.at(x, y);
      row[x * 3 + 0] = quantize(p.x);
      row[x * 3 + 1] = quantize(p.y);
      row[x * 3 + 2] = quantize(p.z);
    }
    out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size()));
  }
  if (!out) throw std::runtime_error(fmt::format("error writing '{}'", path));
}

Framebuffer read_ppm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(fmt::format("cannot open '{}'", path));
  std::string magic;
  int w = 0, h = 0, maxval = 0;
  in >> magic >> w >> h >> maxval;
  if (magic != "P6" || w <= 0 || h <= 0 || maxval != 255) throw std::runtime_error(fmt::format("'{}' is not an 8-bit P6 file", path));
  in.get();  // the single whitespace after maxval
  std::vector<std::uint8_t> data(static_cast<std::size_t>(w) * h * 3);
  in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(data.size()));
  if (!in) throw std::runtime_error(fmt::format("'{}' is truncated", path));
  Framebuffer fb(w, h, {});
  for (std::size_t i = 0; i < fb.pixels.size(); ++i)
    fb.pixels[i] = {data[i * 3] / 255.0f, data[i * 3 + 1] / 255.0f, data[i * 3 + 2] / 255.0f};
  return fb;
}

namespace {

// Shared error funnel: every command reports failures the same way.
template <class F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
}

void print_diagnostics(const std::vector<Diagnostic>& diags, std::ostream& err) {
  for (const auto& d : diags) err << fmt::format("[{}] {}: {}\n", to_string(d.kind), d.subject, d.message);
}

json config_json(const RunConfig& cfg, const Scene& scene) {
  json overrides = json::object();
  for (const auto& [stage, o] : cfg.overrides) {
    json j;
    if (o.bin) j["bin"] = o.bin->full_screen() ? json("full") : json::array({o.bin->bin_width, o.bin->bin_height});
    if (o.schedule) {
      j["schedule"] = to_string(o.schedule->kind);
      if (o.schedule->tile_split_size) j["tile_split"] = *o.schedule->tile_split_size;
    }
    overrides[stage] = j;
  }
  return {{"variant", cfg.pipeline_file.empty() ? cfg.variant : cfg.pipeline_file},
          {"scene", scene.name},
          {"screen", {cfg.screen.width, cfg.screen.height}},
          {"workers", cfg.workers},
          {"strip_mine", cfg.strip_mine},
          {"cycle_cap", cfg.cycle_cap},
          {"shader_cost", cfg.shader_cost},
          {"overrides", overrides}};
}

void write_json(const std::string& path, const json& doc) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", path));
  out << doc.dump(2) << '\n';
}

}  // namespace

int cmd_inspect(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const PipelineGraph g = resolve_graph(cfg);
    const auto diags = validate(g);
    if (!diags.empty()) {
      print_diagnostics(diags, err);
      return 1;
    }
    const KernelMapping m = synthesize(g);
    out << describe(m.skeleton) << describe(m.schedule, m.skeleton) << describe(m);
    return 0;
  });
}

int cmd_render(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const PipelineGraph g = resolve_graph(cfg);
    const Scene scene = resolve_scene(cfg, g);
    const KernelMapping m = synthesize(g);
    const RunResult r = execute(g, m, scene.primitives, make_params(cfg, scene), make_runtime_config(cfg));
    const std::string image = cfg.out_path.empty() ? "out.ppm" : cfg.out_path;
    write_ppm(image, r.image);
    if (!cfg.stats_path.empty()) {
      json doc = {{"config", config_json(cfg, scene)}, {"synthesis", report_json(m)}, {"stats", r.stats.to_json()}};
      write_json(cfg.stats_path, doc);
    }
    out << fmt::format("wrote {} ({}x{}), {} kernels, {:.1f} ms, stored traffic {}\n", image, r.image.width,
                       r.image.height, m.kernels.size(), r.stats.total_ms, r.stats.stored_traffic());
    if (!r.stats.exactly_once() || r.stats.lost_primitives != 0) {
      err << "runtime accounting failed: work units or primitives were lost\n";
      return 1;
    }
    return 0;
  });
}

int cmd_verify(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const PipelineGraph g = resolve_graph(cfg);
    const Scene scene = resolve_scene(cfg, g);
    const auto reference = reference_image(g, scene, cfg.screen);
    if (!reference) {
      err << "no reference renderer for this pipeline and scene\n";
      return 2;
    }
    const KernelMapping m = synthesize(g);
    const RunResult r = execute(g, m, scene.primitives, make_params(cfg, scene), make_runtime_config(cfg));
    const ImageDiff d = compare_images(r.image, *reference);
    const std::string name = cfg.pipeline_file.empty() ? cfg.variant : cfg.pipeline_file;
    if (d.identical()) {
      out << fmt::format("{} on {}: identical ({}x{} pixels)\n", name, scene.name, cfg.screen.width, cfg.screen.height);
      return 0;
    }
    out << fmt::format("{} on {}: {} differing pixels, max channel error {:.6f}, first at ({}, {})\n", name, scene.name,
                       d.differing_pixels, d.max_channel_error, d.first_difference->first, d.first_difference->second);
    return 1;
  });
}

double median(std::vector<double> v) {
  if (v.empty()) return 0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::vector<BenchRow> run_bench(const RunConfig& cfg, const Scene& scene) {
  const std::vector<std::string> variants = cfg.variants.empty() ? std::vector<std::string>{cfg.variant} : cfg.variants;
  const std::vector<int> costs = cfg.shader_costs.empty() ? std::vector<int>{cfg.shader_cost} : cfg.shader_costs;
  WorkerPool pool(cfg.workers);
  std::vector<BenchRow> rows;
  for (int cost : costs) {
    for (const std::string& spec : variants) {
      RunConfig c = cfg;
      c.shader_cost = cost;
      std::stringstream ss(spec);
      std::getline(ss, c.variant, '+');
      for (std::string o; std::getline(ss, o, '+');) parse_override(o, c.overrides);
      const PipelineGraph g = resolve_graph(c);
      const KernelMapping m = synthesize(g);
      const RenderParams params = make_params(c, scene);
      BenchRow row;
      row.variant = spec;
      row.shader_cost = cost;
      std::map<std::string, std::vector<double>> kernel_ms;
      for (int i = 0; i < std::max(1, c.repeat); ++i) {
        RunResult r = execute(g, m, scene.primitives, params, make_runtime_config(c), &pool);
        row.total_ms.push_back(r.stats.total_ms);
        for (const auto& k : r.stats.kernels) kernel_ms[k.name].push_back(k.ms);
        row.stats = std::move(r.stats);
      }
      row.median_ms = median(row.total_ms);
      for (const auto& k : row.stats.kernels) row.kernel_median_ms.emplace_back(k.name, median(kernel_ms[k.name]));
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

int cmd_bench(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    RunConfig probe = cfg;
    if (!cfg.variants.empty()) probe.variant = cfg.variants.front().substr(0, cfg.variants.front().find('+'));
    const Scene scene = resolve_scene(cfg, resolve_graph(probe));
    const auto rows = run_bench(cfg, scene);

    out << fmt::format("scene {} ({} primitives), {} workers, {} repeats\n", scene.name, size(scene.primitives), cfg.workers,
                       std::max(1, cfg.repeat));
    out << fmt::format("{:<40} {:>6} {:>11} {:>8} {:>14} {:>10}\n", "variant", "cost", "median ms", "kernels",
                       "stored traffic", "max bin");
    json doc_rows = json::array();
    for (const auto& r : rows) {
      std::uint64_t max_bin = 0;
      for (const auto& s : r.stats.stages) max_bin = std::max(max_bin, s.max_bin);
      out << fmt::format("{:<40} {:>6} {:>11.2f} {:>8} {:>14} {:>10}\n", r.variant, r.shader_cost, r.median_ms,
                         r.kernel_median_ms.size(), r.stats.stored_traffic(), max_bin);
      for (const auto& [name, ms] : r.kernel_median_ms) out << fmt::format("    {:<36} {:>11.2f}\n", name, ms);
      json kernels = json::array();
      for (const auto& [name, ms] : r.kernel_median_ms) kernels.push_back({{"name", name}, {"median_ms", ms}});
      doc_rows.push_back({{"variant", r.variant},
                          {"shader_cost", r.shader_cost},
                          {"total_ms", r.total_ms},
                          {"median_ms", r.median_ms},
                          {"kernels", kernels},
                          {"stats", r.stats.to_json()}});
    }
    if (!cfg.stats_path.empty()) write_json(cfg.stats_path, {{"config", config_json(cfg, scene)}, {"rows", doc_rows}});
    return 0;
  });
}

}  // namespace binpipe
