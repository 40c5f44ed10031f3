// End-to-end acceptance run: one PASS / FAIL / SKIP line per criterion.
// Exit status is nonzero iff some criterion failed.

#include <chrono>
#include <cstdio>
#include <algorithm>
#include <functional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include <fmt/core.h>

#include "binpipe/bezier.hpp"
#include "binpipe/binning.hpp"
#include "binpipe/commands.hpp"
#include "binpipe/oracle.hpp"
#include "binpipe/ordering.hpp"
#include "binpipe/pipelines.hpp"
#include "binpipe/scenes.hpp"
#include "binpipe/synthesis.hpp"
#include "support.hpp"

using namespace binpipe;

namespace {

const Screen kScreen{1024, 768};
const std::vector<std::string> kRaster = {"baseline", "freepipe", "binned", "binned_fused", "deferred"};

enum class Verdict { Pass, Fail, Skip };

struct Outcome {
  Verdict verdict;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& title, const std::function<Outcome()>& check) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = check();
  } catch (const std::exception& e) {
    o = {Verdict::Fail, std::string("exception: ") + e.what()};
  }
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const char* tag = o.verdict == Verdict::Pass ? "PASS" : o.verdict == Verdict::Fail ? "FAIL" : "SKIP";
  failures += o.verdict == Verdict::Fail;
  fmt::print("[{}] criterion {}: {} -- {} ({:.1f} s)\n", tag, id, title, o.detail, s);
  std::fflush(stdout);
}

Verdict all(bool ok) { return ok ? Verdict::Pass : Verdict::Fail; }

std::vector<std::uint8_t> bytes(const Framebuffer& fb) {
  std::vector<std::uint8_t> out;
  out.reserve(fb.pixels.size() * 3);
  for (const auto& p : fb.pixels) {
    out.push_back(quantize(p.x));
    out.push_back(quantize(p.y));
    out.push_back(quantize(p.z));
  }
  return out;
}

RunConfig config(const std::string& variant, const std::string& scene, int workers) {
  RunConfig c;
  c.variant = variant;
  c.proc_scene = scene;
  c.screen = kScreen;
  c.workers = workers;
  return c;
}

RunResult render(const RunConfig& c, const Scene& scene, WorkerPool* pool = nullptr) {
  const PipelineGraph g = resolve_graph(c);
  return execute(g, synthesize(g), scene.primitives, make_params(c, scene), make_runtime_config(c), pool);
}

int kernel_holding(const KernelMapping& m, const std::string& stage) { return m.kernel_of(m.skeleton.index_of(stage)); }

Outcome raster_equivalence() {
  const int workers = 8;
  WorkerPool pool(workers);
  int identical = 0, runs = 0;
  std::string bad;
  for (const std::string spec : {"quad", "mixed", "small"}) {
    const Scene scene = procedural_scene(spec, kScreen);
    const Framebuffer ref = reference_render(std::get<std::vector<MeshTriangle>>(scene.primitives),
                                             scene.camera_for(kScreen), kScreen);
    for (const auto& v : kRaster) {
      ++runs;
      const ImageDiff d = compare_images(render(config(v, spec, workers), scene, &pool).image, ref);
      if (d.identical())
        ++identical;
      else
        bad += fmt::format(" {}/{}:{}px", v, spec, d.differing_pixels);
    }
  }
  return {all(identical == runs), fmt::format("{}/{} variant x scene runs identical to the reference{}", identical, runs, bad)};
}

Outcome reyes_equivalence() {
  int identical = 0, max_iter = 0;
  bool loops_ok = true;
  for (const std::string spec : {"teapot", "patches:4x4"}) {
    const Scene scene = procedural_scene(spec, kScreen);
    const Framebuffer ref =
        reference_reyes(std::get<std::vector<BezierPatch>>(scene.primitives), scene.camera_for(kScreen), kScreen);
    const RunResult r = render(config("reyes", spec, 4), scene);
    identical += compare_images(r.image, ref).identical();
    for (const auto& l : r.stats.loops) {
      max_iter = std::max(max_iter, l.max_iterations);
      loops_ok = loops_ok && l.max_iterations <= 32;
    }
  }
  return {all(identical == 2 && loops_ok),
          fmt::format("{}/2 scenes identical; Split loop max {} iterations (cap 32)", identical, max_iter)};
}

Outcome synthesis_structure() {
  std::vector<std::string> problems;
  auto expect = [&](bool ok, const std::string& what) {
    if (!ok) problems.push_back(what);
  };
  const KernelMapping freepipe = synthesize(build_variant("freepipe", kScreen));
  const KernelMapping baseline = synthesize(build_variant("baseline", kScreen));
  const KernelMapping fused = synthesize(build_variant("binned_fused", kScreen));
  const KernelMapping end_stage = synthesize(build_test_graph("end_stage", kScreen));
  const KernelMapping end_bin = synthesize(build_test_graph("end_bin", kScreen));
  expect(freepipe.kernels.size() == 1, "freepipe kernels != 1");
  expect(baseline.kernels.size() == 5, "baseline kernels != 5");
  expect(kernel_holding(fused, "Rasterizer") == kernel_holding(fused, "FragmentShader"),
         "binned_fused keeps Rasterizer and FragmentShader apart");
  const int es = kernel_holding(end_stage, "FragmentShade");
  expect(es != kernel_holding(end_stage, "ShadowComposite"), "EndStage pair was fused");
  expect(end_stage.kernels[es].entry_sync == SyncKind::GlobalBarrier, "EndStage has no global barrier");
  const int eb = kernel_holding(end_bin, "Composite");
  expect(eb == kernel_holding(end_bin, "DepthTest"), "EndBin pair not fused");
  expect(end_bin.kernels[eb].fused_sync == std::vector<SyncKind>{SyncKind::LocalPerBinBarrier},
         "EndBin fused kernel lacks a per-bin barrier");
  const bool eb_fused = eb == kernel_holding(end_bin, "DepthTest");
  std::string detail = fmt::format(
      "freepipe {} kernel, baseline {} kernels, binned_fused has {}, EndStage entry {}, EndBin {}", freepipe.kernels.size(),
      baseline.kernels.size(), fused.kernel_name(kernel_holding(fused, "Rasterizer")),
      to_string(end_stage.kernels[es].entry_sync),
      eb_fused && !end_bin.kernels[eb].fused_sync.empty() ? "fused with " + to_string(end_bin.kernels[eb].fused_sync[0])
                                                          : std::string("not fused"));
  for (const auto& p : problems) detail += "; " + p;
  return {all(problems.empty()), detail};
}

Outcome ordering() {
  const PipelineSkeleton sk = build_skeleton(build_test_graph("shadow_map", kScreen));
  const StageSchedule s = order_stages(sk);
  const int fs = s.entry_of(sk.index_of("FragmentShade"));
  bool shadow_first = true;
  for (const char* n : {"ShadowVS", "ShadowRast", "ShadowComposite"}) shadow_first &= s.entry_of(sk.index_of(n)) < fs;
  const int violations = binpipe::testing::random_dag_violations(1000, 20240611);
  return {all(shadow_first && violations == 0),
          fmt::format("shadow branch before FragmentShade: {}; 1000 random DAGs: {} violations",
                      shadow_first ? "yes" : "no", violations)};
}

Outcome determinism() {
  const Scene scene = procedural_scene("mixed", kScreen);
  int stable = 0, accounting_ok = 0, runs = 0;
  std::string bad;
  for (const auto& v : kRaster) {
    std::vector<std::uint8_t> first;
    bool same = true;
    for (int w : {1, 2, 4, 8}) {
      const RunResult r = render(config(v, "mixed", w), scene);
      ++runs;
      accounting_ok += r.stats.exactly_once() && r.stats.lost_primitives == 0;
      const auto b = bytes(r.image);
      if (first.empty())
        first = b;
      else
        same = same && b == first;
    }
    stable += same;
    if (!same) bad += " " + v;
  }
  return {all(stable == static_cast<int>(kRaster.size()) && accounting_ok == runs),
          fmt::format("{}/{} variants byte-identical over workers 1/2/4/8; accounting held in {}/{} runs{}", stable,
                      kRaster.size(), accounting_ok, runs, bad.empty() ? "" : "; differing:" + bad)};
}

Outcome binning_oracle() {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> x(-50, 1080), y(-50, 820), w(0, 300);
  int mismatches = 0, boxes = 0;
  // 1x1, 8x8, 32x32 and 128x96 bin grids over the screen.
  for (const BinConfig cfg : {BinConfig{1024, 768, 1}, BinConfig{128, 96, 1}, BinConfig{32, 24, 1}, BinConfig{8, 8, 1}}) {
    const BinGrid g = make_grid(kScreen, cfg);
    for (int i = 0; i < 1000; ++i, ++boxes) {
      BBox b{x(rng), y(rng), 0, 0};
      b.x1 = b.x0 + w(rng);
      b.y1 = b.y0 + w(rng);
      std::vector<int> got;
      bbox_bins(g, b, got);
      mismatches += got != brute_bin_assign(b, g);
    }
  }
  return {all(mismatches == 0), fmt::format("{} boxes over 4 grids, {} mismatches", boxes, mismatches)};
}

Outcome performance() {
  const unsigned hw = std::thread::hardware_concurrency();
  const int workers = static_cast<int>(std::max(1u, hw));
  const Scene scene = procedural_scene("mixed", kScreen);

  // Locality mechanism: fused freepipe never touches a bin store.
  RunConfig tc = config("binned", "mixed", workers);
  tc.repeat = 1;
  tc.variants = {"baseline", "freepipe"};
  const auto traffic = run_bench(tc, scene);
  const std::uint64_t base_traffic = traffic[0].stats.stored_traffic(), free_traffic = traffic[1].stats.stored_traffic();
  const bool traffic_ok = base_traffic > 0 && free_traffic == 0;
  std::string detail = fmt::format("stored traffic baseline {} vs freepipe {} ({})", base_traffic, free_traffic,
                                   traffic_ok ? "ok" : "WRONG");

  // Speed: binned LoadBalance against every stage Serialized on full-screen bins.
  RunConfig sc = config("binned", "mixed", workers);
  sc.repeat = 5;
  sc.variants = {"binned",
                 "baseline+VertexShader.schedule=Serialize+Rasterizer.schedule=Serialize+FragmentShader.schedule="
                 "Serialize+DepthTest.schedule=Serialize+Composite.schedule=Serialize"};
  const auto speed = run_bench(sc, scene);
  const double speedup = speed[1].median_ms / speed[0].median_ms;

  RunConfig kc = config("binned", "mixed", workers);
  kc.repeat = 5;
  kc.variants = {"freepipe", "binned"};
  kc.shader_costs = {0, 64, 512};
  const auto sweep = run_bench(kc, scene);
  std::vector<std::string> winners;
  for (std::size_t i = 0; i + 1 < sweep.size(); i += 2)
    winners.push_back(sweep[i].median_ms <= sweep[i + 1].median_ms ? sweep[i].variant : sweep[i + 1].variant);
  const bool flips = std::find(winners.begin(), winners.end(), winners.front() == "freepipe" ? "binned" : "freepipe") !=
                     winners.end();
  detail += fmt::format("; binned vs serialized speedup {:.2f}x; fastest at K=0/64/512: {}/{}/{}", speedup, winners[0],
                        winners[1], winners[2]);

  if (hw < 4) {
    if (!traffic_ok) return {Verdict::Fail, detail};
    return {Verdict::Skip, detail + fmt::format("; timing checks need >= 4 hardware threads, this machine has {}", hw)};
  }
  const bool speed_ok = speedup >= 1.2;
  return {all(traffic_ok && speed_ok && flips),
          detail + fmt::format("; speedup {} 1.2x, ranking {}", speed_ok ? ">=" : "<", flips ? "changes" : "never changes")};
}

Outcome micropolygon_bound() {
  const Scene teapot = teapot_scene();
  const Camera cam = teapot.camera_for(kScreen);
  const ReyesParams params;
  // Walk the pipeline's own split and dice functions.
  std::vector<BezierPatch> work = std::get<std::vector<BezierPatch>>(teapot.primitives);
  std::size_t total = 0, within = 0;
  double worst = 0;
  while (!work.empty()) {
    BezierPatch p = std::move(work.back());
    work.pop_back();
    const SplitDecision d = decide_split(p, cam, kScreen, params);
    if (d == SplitDecision::Cull) continue;
    if (d == SplitDecision::Split) {
      auto [a, b] = bisect_patch(p, choose_split_axis(p, cam, kScreen));
      work.push_back(std::move(a));
      work.push_back(std::move(b));
      continue;
    }
    for (const auto& mp : dice_patch(p, cam, kScreen, params.dice_rate)) {
      const double e = micropolygon_extent(mp);
      worst = std::max(worst, e);
      ++total;
      within += e <= 1.5;
    }
  }
  // The pipeline run must have diced the same population.
  const RunResult r = render(config("reyes", "teapot", 4), teapot);
  const std::uint64_t diced = r.stats.stage("Dice")->emitted;
  return {all(total > 0 && within == total && diced == total),
          fmt::format("{}/{} micropolygons <= 1.5 px (max {:.3f} px); pipeline Dice emitted {}", within, total, worst,
                      diced)};
}

}  // namespace

int main() {
  fmt::print("acceptance: {} hardware threads\n", std::thread::hardware_concurrency());
  report(1, "oracle equivalence, raster", raster_equivalence);
  report(2, "oracle equivalence, Reyes", reyes_equivalence);
  report(3, "synthesis structure", synthesis_structure);
  report(4, "ordering", ordering);
  report(5, "determinism and parallel safety", determinism);
  report(6, "binning oracle", binning_oracle);
  report(7, "directional performance", performance);
  report(8, "micropolygon bound", micropolygon_bound);
  fmt::print("{} criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
