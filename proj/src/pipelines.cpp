#include "binpipe/pipelines.hpp"

#include <algorithm>
#include <cstdio>
#include <stdexcept>

#include <fmt/format.h>

namespace binpipe {

namespace {

// Visits covered pixels of a triangle inside `clip` in row-major order.
template <class F>
void for_each_covered(const Triangle& t, PixelRange clip, F&& f) {
  const auto setup = setup_triangle(t.v[0], t.v[1], t.v[2]);
  if (!setup) return;
  const PixelRange r = intersect(setup->candidates, clip);
  for (int y = r.y0; y < r.y1; ++y)
    for (int x = r.x0; x < r.x1; ++x) {
      const EdgeWeights e = edge_weights(*setup, x, y);
      if (covers(*setup, e)) f(x, y, *setup, e);
    }
}

}  // namespace

std::optional<Triangle> vertex_shade(const MeshTriangle& t, const Camera& camera, Screen screen) {
  Triangle out;
  out.id = t.id;
  for (int k = 0; k < 3; ++k) {
    auto v = transform_vertex(camera.view_proj, screen, t.v[k].position, t.v[k].normal);
    if (!v) return std::nullopt;
    out.v[k] = *v;
  }
  return out;
}

void rasterize_triangle(const Triangle& t, PixelRange clip, std::vector<Fragment>& out) {
  for_each_covered(t, clip, [&](int x, int y, const TriangleSetup& s, const EdgeWeights& e) {
    const Interpolated in = interpolate(s, t.v, e);
    if (!depth_in_range(in.depth)) return;
    Fragment f;
    f.x = x;
    f.y = y;
    f.depth = static_cast<float>(in.depth);
    f.normal = to_float(in.normal);
    f.id = t.id;
    out.push_back(f);
  });
}

Fragment fragment_shade(Fragment f, int shader_cost) {
  f.color = diffuse_shade(f.normal);
  if (shader_cost > 0) burn_shader_cost(shader_cost, f.depth);
  return f;
}

DepthKey fragment_key(const Fragment& f, const RenderParams& params) {
  float depth = f.depth;
  if (params.fault_skew_depth && (f.id & 1) != 0) depth += 0.25f;
  return {depth, f.id, f.sub};
}

bool depth_test_merge(RecordBuffer& depth, const Fragment& f, const DepthKey& key) {
  return depth.merge(f.x, f.y, key, Vec3f{});
}

void sample_micropolygon(const Micropolygon& mp, PixelRange clip, std::vector<Fragment>& out) {
  auto corner = [&](int k) {
    ScreenVertex v;
    v.x = mp.corners[k].x;
    v.y = mp.corners[k].y;
    v.z = mp.depth;
    return v;
  };
  const ScreenVertex c0 = corner(0), c1 = corner(1), c2 = corner(2), c3 = corner(3);
  for (const Triangle& half : {Triangle{{c0, c1, c2}, mp.id}, Triangle{{c0, c2, c3}, mp.id}}) {
    for_each_covered(half, clip, [&](int x, int y, const TriangleSetup&, const EdgeWeights&) {
      Fragment f;
      f.x = x;
      f.y = y;
      f.depth = mp.depth;
      f.normal = mp.normal;
      f.id = mp.id;
      f.sub = mp.sub;
      out.push_back(f);
    });
  }
}

// ---- phases ----------------------------------------------------------------

namespace {

ProcessPhase vertex_phase() {
  return ProcessPhase::per_primitive<MeshTriangle>("vertex_shade", [](const MeshTriangle& t, const ProcessContext& c, Emitter& em) {
    if (auto tri = vertex_shade(t, c.params->camera, c.params->screen)) em.emit(0, *tri);
  });
}

ProcessPhase raster_phase() {
  return ProcessPhase::per_primitive<Triangle>("rasterize", [](const Triangle& t, const ProcessContext& c, Emitter& em) {
    // A fresh buffer per call: a fused consumer may run before this returns.
    std::vector<Fragment> frags;
    rasterize_triangle(t, c.clip, frags);
    for (Fragment& f : frags) em.emit(0, f);
  });
}

ProcessPhase fragment_phase() {
  return ProcessPhase::per_primitive<Fragment>("fragment_shade", [](const Fragment& f, const ProcessContext& c, Emitter& em) {
    em.emit(0, fragment_shade(f, c.params->shader_cost));
  });
}

ProcessPhase depth_phase() {
  return ProcessPhase::per_primitive<Fragment>("depth_test", [](const Fragment& f, const ProcessContext& c, Emitter& em) {
    if (depth_test_merge(c.targets->depth, f, fragment_key(f, *c.params))) em.emit(0, f);
  });
}

ProcessPhase composite_phase() {
  return ProcessPhase::per_primitive<Fragment>("composite", [](const Fragment& f, const ProcessContext& c, Emitter&) {
    c.targets->color.merge(f.x, f.y, fragment_key(f, *c.params), f.color);
  });
}

// Losers are dropped early; the final winner is always forwarded.
ProcessPhase gbuffer_phase() {
  return ProcessPhase::per_primitive<Fragment>("gbuffer", [](const Fragment& f, const ProcessContext& c, Emitter& em) {
    if (c.targets->gbuffer.merge(f.x, f.y, fragment_key(f, *c.params), f.normal)) em.emit(0, f);
  });
}

// Shades whatever the G-buffer holds under that record's own key, so a stale
// read merges a larger key and loses.
ProcessPhase deferred_composite_phase() {
  return ProcessPhase::per_primitive<Fragment>("deferred_composite", [](const Fragment& f, const ProcessContext& c, Emitter&) {
    const Record r = c.targets->gbuffer.get(f.x, f.y);
    Fragment g = f;
    g.normal = r.payload;
    g = fragment_shade(g, c.params->shader_cost);
    c.targets->color.merge(f.x, f.y, r.key, g.color);
  });
}

ProcessPhase split_phase() {
  return ProcessPhase::per_primitive<BezierPatch>("reyes_split", [](const BezierPatch& p, const ProcessContext& c, Emitter& em) {
    const RenderParams& rp = *c.params;
    switch (decide_split(p, rp.camera, rp.screen, rp.reyes)) {
      case SplitDecision::Split: {
        auto [a, b] = bisect_patch(p, choose_split_axis(p, rp.camera, rp.screen));
        em.emit(0, std::move(a));
        em.emit(0, std::move(b));
        break;
      }
      case SplitDecision::Dice:
      case SplitDecision::ForcedDice: em.emit(1, p); break;
      case SplitDecision::Cull: break;
    }
  });
}

ProcessPhase dice_phase() {
  return ProcessPhase::per_primitive<BezierPatch>("reyes_dice", [](const BezierPatch& p, const ProcessContext& c, Emitter& em) {
    for (Micropolygon& mp : dice_patch(p, c.params->camera, c.params->screen, c.params->reyes.dice_rate))
      em.emit(0, std::move(mp));
  });
}

ProcessPhase sample_phase() {
  return ProcessPhase::per_primitive<Micropolygon>("reyes_sample", [](const Micropolygon& mp, const ProcessContext& c, Emitter& em) {
    std::vector<Fragment> frags;
    sample_micropolygon(mp, c.clip, frags);
    for (Fragment& f : frags) em.emit(0, f);
  });
}

ProcessPhase shade_phase() {
  return ProcessPhase::per_primitive<Fragment>("reyes_shade", [](const Fragment& f, const ProcessContext& c, Emitter&) {
    const Fragment s = fragment_shade(f, c.params->shader_cost);
    c.targets->color.merge(s.x, s.y, fragment_key(s, *c.params), s.color);
  });
}

ProcessPhase token_pass(int channels) {
  return ProcessPhase::per_primitive<Token>(fmt::format("token_pass:{}", channels),
                                            [channels](const Token& t, const ProcessContext&, Emitter& em) {
                                              Token next = t;
                                              ++next.hops;
                                              for (int ch = 0; ch < channels; ++ch) em.emit(ch, next);
                                            });
}

StageDecl stage(std::string name, PrimitiveType in, std::vector<PrimitiveType> out, ProcessPhase process, BinConfig bin,
                BinAssignDirective assign, ScheduleDirective schedule) {
  StageDecl d;
  d.name = std::move(name);
  d.input_type = in;
  d.output_types = std::move(out);
  d.process = std::move(process);
  d.bin = bin;
  d.assign = std::move(assign);
  d.schedule = schedule;
  return d;
}

constexpr BinConfig kFull{0, 0, 1};
constexpr BinConfig kTile8{8, 8, 1};

ScheduleDirective sched(ScheduleKind k, std::optional<int> split = std::nullopt) { return {k, split}; }

using PT = PrimitiveType;

PipelineGraph forward(Screen screen, BinConfig geometry, BinConfig raster, BinAssignDirective vs_assign,
                      BinAssignDirective rast_assign, std::array<ScheduleDirective, 5> s) {
  PipelineGraph g(screen);
  g.add_stage(stage("VertexShader", PT::MeshTriangle, {PT::Triangle}, vertex_phase(), geometry, vs_assign, s[0]));
  g.add_stage(stage("Rasterizer", PT::Triangle, {PT::Fragment}, raster_phase(), raster, rast_assign, s[1]));
  g.add_stage(stage("FragmentShader", PT::Fragment, {PT::Fragment}, fragment_phase(), raster,
                    BinAssignDirective::previous(), s[2]));
  g.add_stage(stage("DepthTest", PT::Fragment, {PT::Fragment}, depth_phase(), raster, BinAssignDirective::previous(), s[3]));
  g.add_stage(stage("Composite", PT::Fragment, {}, composite_phase(), raster, BinAssignDirective::previous(), s[4]));
  g.connect("VertexShader", 0, "Rasterizer");
  g.connect("Rasterizer", 0, "FragmentShader");
  g.connect("FragmentShader", 0, "DepthTest");
  g.connect("DepthTest", 0, "Composite");
  return g;
}

PipelineGraph deferred(Screen screen) {
  PipelineGraph g(screen);
  g.add_stage(stage("VertexShader", PT::MeshTriangle, {PT::Triangle}, vertex_phase(), kFull, BinAssignDirective::to_all(),
                    sched(ScheduleKind::All, 1024)));
  g.add_stage(stage("Rasterizer", PT::Triangle, {PT::Fragment}, raster_phase(), kTile8, BinAssignDirective::bounding_box(),
                    sched(ScheduleKind::LoadBalance)));
  g.add_stage(stage("GBuffer", PT::Fragment, {PT::Fragment}, gbuffer_phase(), kTile8, BinAssignDirective::previous(),
                    sched(ScheduleKind::DirectMap)));
  StageDecl comp = stage("Composite", PT::Fragment, {}, deferred_composite_phase(), kTile8, BinAssignDirective::previous(),
                         sched(ScheduleKind::DirectMap));
  comp.dependencies.push_back({DependencyKind::EndBin, ""});
  g.add_stage(std::move(comp));
  g.connect("VertexShader", 0, "Rasterizer");
  g.connect("Rasterizer", 0, "GBuffer");
  g.connect("GBuffer", 0, "Composite");
  return g;
}

PipelineGraph reyes(Screen screen) {
  const BinConfig coarse{128, 128, 1};
  const BinConfig sample{32, 32, 1};
  const auto rr = BinAssignDirective::with(round_robin_assign());
  PipelineGraph g(screen);
  g.add_stage(stage("Split", PT::Patch, {PT::Patch, PT::Patch}, split_phase(), coarse, rr, sched(ScheduleKind::LoadBalance)));
  g.add_stage(stage("Dice", PT::Patch, {PT::Micropolygon}, dice_phase(), coarse, rr, sched(ScheduleKind::LoadBalance)));
  g.add_stage(stage("Sample", PT::Micropolygon, {PT::Fragment}, sample_phase(), sample, BinAssignDirective::bounding_box(),
                    sched(ScheduleKind::LoadBalance)));
  g.add_stage(stage("Shade", PT::Fragment, {}, shade_phase(), sample, BinAssignDirective::previous(),
                    sched(ScheduleKind::DirectMap)));
  g.connect("Split", 0, "Split");
  g.connect("Split", 1, "Dice");
  g.connect("Dice", 0, "Sample");
  g.connect("Sample", 0, "Shade");
  return g;
}

}  // namespace

const std::vector<std::string>& variant_names() {
  static const std::vector<std::string> names = {"baseline", "freepipe", "binned", "binned_fused", "deferred", "reyes"};
  return names;
}

bool is_raster_variant(const std::string& name) {
  return name == "baseline" || name == "freepipe" || name == "binned" || name == "binned_fused" || name == "deferred";
}

PipelineGraph build_variant(const std::string& name, Screen screen, const Overrides& overrides) {
  const auto LB = sched(ScheduleKind::LoadBalance);
  const auto DM = sched(ScheduleKind::DirectMap);
  const auto all = sched(ScheduleKind::All, 1024);
  PipelineGraph g;
  if (name == "baseline") {
    g = forward(screen, kFull, kFull, BinAssignDirective::to_all(), BinAssignDirective::previous(), {LB, LB, LB, LB, LB});
  } else if (name == "freepipe") {
    // One shared grid with bins dealt out round-robin: nothing is spatial, so
    // every stage sees the whole screen and the chain fuses end to end.
    const BinConfig chunk{128, 128, 1};
    g = forward(screen, chunk, chunk, BinAssignDirective::with(round_robin_assign()), BinAssignDirective::previous(),
                {DM, DM, DM, DM, DM});
  } else if (name == "binned") {
    g = forward(screen, kFull, kTile8, BinAssignDirective::to_all(), BinAssignDirective::bounding_box(),
                {all, LB, LB, LB, LB});
  } else if (name == "binned_fused") {
    g = forward(screen, kFull, kTile8, BinAssignDirective::to_all(), BinAssignDirective::bounding_box(),
                {all, DM, DM, LB, LB});
  } else if (name == "deferred") {
    g = deferred(screen);
  } else if (name == "reyes") {
    g = reyes(screen);
  } else {
    throw std::invalid_argument(fmt::format("unknown pipeline variant '{}'", name));
  }
  apply_overrides(g, overrides);
  return g;
}

void apply_overrides(PipelineGraph& graph, const Overrides& overrides) {
  for (const auto& [name, o] : overrides) {
    if (!graph.index_of(name)) throw std::invalid_argument(fmt::format("override names unknown stage '{}'", name));
    StageDecl& s = graph.stage(name);
    if (o.bin) s.bin = *o.bin;
    if (o.schedule) s.schedule = *o.schedule;
  }
}

void parse_override(const std::string& text, Overrides& into) {
  const auto dot = text.find('.');
  const auto eq = text.find('=');
  if (dot == std::string::npos || eq == std::string::npos || eq < dot)
    throw std::invalid_argument(fmt::format("override '{}' is not Stage.key=value", text));
  const std::string stage_name = text.substr(0, dot);
  const std::string key = text.substr(dot + 1, eq - dot - 1);
  const std::string value = text.substr(eq + 1);
  StageOverride& o = into[stage_name];
  if (key == "bin") {
    int w = 0, h = 0;
    char x = 0;
    char extra = 0;
    if (value == "full") {
      o.bin = kFull;
    } else if (std::sscanf(value.c_str(), "%d%c%d%c", &w, &x, &h, &extra) == 3 && (x == 'x' || x == 'X') && w > 0 && h > 0) {
      o.bin = BinConfig{w, h, 1};
    } else {
      throw std::invalid_argument(fmt::format("bad bin size '{}', expected WxH", value));
    }
  } else if (key == "schedule") {
    const auto colon = value.find(':');
    const auto kind = parse_schedule_kind(value.substr(0, colon));
    if (!kind) throw std::invalid_argument(fmt::format("unknown schedule '{}'", value));
    ScheduleDirective d{*kind, std::nullopt};
    if (colon != std::string::npos) {
      if (*kind != ScheduleKind::All) throw std::invalid_argument("only All takes a tile split size");
      d.tile_split_size = std::stoi(value.substr(colon + 1));
    }
    o.schedule = d;
  } else {
    throw std::invalid_argument(fmt::format("unknown override key '{}'", key));
  }
}

const std::vector<std::string>& test_graph_names() {
  static const std::vector<std::string> names = {"shadow_map", "end_stage", "end_bin", "oit"};
  return names;
}

PipelineGraph build_test_graph(const std::string& name, Screen screen) {
  const auto LB = sched(ScheduleKind::LoadBalance);
  const auto DM = sched(ScheduleKind::DirectMap);
  auto tok = [](std::string n, int outs, BinConfig bin, BinAssignDirective a, ScheduleDirective s) {
    return stage(std::move(n), PT::Token, std::vector<PT>(static_cast<std::size_t>(outs), PT::Token), token_pass(outs), bin,
                 std::move(a), s);
  };
  PipelineGraph g(screen);
  if (name == "shadow_map") {
    // Two chains meet at the main fragment shader, which needs the finished
    // shadow map.
    g.add_stage(tok("ShadowVS", 1, kFull, BinAssignDirective::to_all(), LB));
    g.add_stage(tok("ShadowRast", 1, kFull, BinAssignDirective::previous(), LB));
    g.add_stage(tok("ShadowComposite", 1, kFull, BinAssignDirective::previous(), LB));
    g.add_stage(tok("VS", 1, kFull, BinAssignDirective::to_all(), LB));
    g.add_stage(tok("Rast", 1, kFull, BinAssignDirective::previous(), LB));
    StageDecl fs = tok("FragmentShade", 1, kFull, BinAssignDirective::previous(), LB);
    fs.dependencies.push_back({DependencyKind::EndStage, "ShadowComposite"});
    g.add_stage(std::move(fs));
    g.add_stage(tok("DepthTest", 1, kFull, BinAssignDirective::previous(), LB));
    g.add_stage(tok("Composite", 0, kFull, BinAssignDirective::previous(), LB));
    g.connect("ShadowVS", 0, "ShadowRast");
    g.connect("ShadowRast", 0, "ShadowComposite");
    g.connect("ShadowComposite", 0, "FragmentShade");
    g.connect("VS", 0, "Rast");
    g.connect("Rast", 0, "FragmentShade");
    g.connect("FragmentShade", 0, "DepthTest");
    g.connect("DepthTest", 0, "Composite");
  } else if (name == "end_stage") {
    // Fusible in every respect except the explicit dependency.
    g.add_stage(tok("ShadowComposite", 1, kTile8, BinAssignDirective::bounding_box(), DM));
    StageDecl fs = tok("FragmentShade", 0, kTile8, BinAssignDirective::previous(), DM);
    fs.dependencies.push_back({DependencyKind::EndStage, "ShadowComposite"});
    g.add_stage(std::move(fs));
    g.connect("ShadowComposite", 0, "FragmentShade");
  } else if (name == "end_bin") {
    g.add_stage(tok("DepthTest", 1, kTile8, BinAssignDirective::bounding_box(), DM));
    StageDecl c = tok("Composite", 0, kTile8, BinAssignDirective::previous(), DM);
    c.dependencies.push_back({DependencyKind::EndBin, ""});
    g.add_stage(std::move(c));
    g.connect("DepthTest", 0, "Composite");
  } else if (name == "oit") {
    // The producer splits its bins across workers, so the per-bin wait
    // cannot stay local.
    g.add_stage(tok("Fragments", 1, kTile8, BinAssignDirective::bounding_box(), sched(ScheduleKind::All, 64)));
    StageDecl r = tok("Resolve", 0, kTile8, BinAssignDirective::previous(), DM);
    r.dependencies.push_back({DependencyKind::EndBin, ""});
    g.add_stage(std::move(r));
    g.connect("Fragments", 0, "Resolve");
  } else {
    throw std::invalid_argument(fmt::format("unknown test graph '{}'", name));
  }
  return g;
}

std::optional<ProcessPhase> registered_phase(const std::string& name) {
  static const std::map<std::string, ProcessPhase (*)()> table = {
      {"vertex_shade", vertex_phase},     {"rasterize", raster_phase},
      {"fragment_shade", fragment_phase}, {"depth_test", depth_phase},
      {"composite", composite_phase},     {"gbuffer", gbuffer_phase},
      {"deferred_composite", deferred_composite_phase},
      {"reyes_split", split_phase},       {"reyes_dice", dice_phase},
      {"reyes_sample", sample_phase},     {"reyes_shade", shade_phase},
  };
  if (auto it = table.find(name); it != table.end()) return it->second();
  constexpr std::string_view prefix = "token_pass:";
  if (name.starts_with(prefix)) {
    const std::string n = name.substr(prefix.size());
    if (!n.empty() && n.size() <= 2 && std::all_of(n.begin(), n.end(), [](char ch) { return ch >= '0' && ch <= '9'; }))
      return token_pass(std::stoi(n));
  }
  return std::nullopt;
}

std::vector<std::string> registered_phase_names() {
  return {"vertex_shade", "rasterize",   "fragment_shade", "depth_test",   "composite",   "gbuffer",
          "deferred_composite", "reyes_split", "reyes_dice", "reyes_sample", "reyes_shade", "token_pass:N"};
}

std::shared_ptr<const CustomAssign> registered_assign(const std::string& name) {
  if (name == "round_robin") return round_robin_assign();
  return nullptr;
}

}  // namespace binpipe
