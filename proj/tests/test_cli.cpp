#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

#include "binpipe/commands.hpp"
#include "binpipe/description.hpp"

using namespace binpipe;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "binpipe_cli_test";
  fs::create_directories(dir);
  return dir / name;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

RunConfig small(const std::string& variant, const std::string& scene = "mixed:2000") {
  RunConfig c;
  c.variant = variant;
  c.proc_scene = scene;
  c.screen = {320, 240};
  return c;
}

}  // namespace

TEST(Quantize, ClampAndRoundHalfUp) {
  EXPECT_EQ(quantize(-0.3f), 0);
  EXPECT_EQ(quantize(0.0f), 0);
  EXPECT_EQ(quantize(1.0f), 255);
  EXPECT_EQ(quantize(7.0f), 255);
  EXPECT_EQ(quantize(0.5f), 128);  // 127.5 rounds up
  EXPECT_EQ(quantize(0.2f), 51);
}

TEST(Ppm, RoundTripsAfterQuantization) {
  Framebuffer fb(5, 3, kBackground);
  fb.at(4, 2) = {1.0f, 0.5f, 0.0f};
  fb.at(0, 1) = {0.2f, 2.0f, -1.0f};
  const fs::path p = scratch("rt.ppm");
  write_ppm(p.string(), fb);
  const Framebuffer back = read_ppm(p.string());
  ASSERT_EQ(back.width, 5);
  ASSERT_EQ(back.height, 3);
  for (std::size_t i = 0; i < fb.pixels.size(); ++i) {
    EXPECT_EQ(quantize(back.pixels[i].x), quantize(fb.pixels[i].x));
    EXPECT_EQ(quantize(back.pixels[i].y), quantize(fb.pixels[i].y));
    EXPECT_EQ(quantize(back.pixels[i].z), quantize(fb.pixels[i].z));
  }
  EXPECT_EQ(slurp(p).substr(0, 11), "P6\n5 3\n255\n");
}

TEST(Render, WritesImageAndStats) {
  RunConfig c = small("binned", "quad");
  c.out_path = scratch("quad.ppm").string();
  c.stats_path = scratch("quad.json").string();
  std::ostringstream out, err;
  ASSERT_EQ(cmd_render(c, out, err), 0) << err.str();
  EXPECT_EQ(slurp(c.out_path).size(), 15 + 320u * 240 * 3);  // header "P6\n320 240\n255\n"
  const auto j = nlohmann::json::parse(slurp(c.stats_path));
  EXPECT_TRUE(j.contains("config"));
  EXPECT_TRUE(j.contains("synthesis"));
  EXPECT_TRUE(j["stats"]["exactly_once"].get<bool>());
}

TEST(Render, DeterministicAndWorkerInvariant) {
  for (const std::string v : {"binned", "freepipe", "deferred"}) {
    RunConfig c = small(v);
    std::ostringstream out, err;
    c.out_path = scratch(v + "_a.ppm").string();
    ASSERT_EQ(cmd_render(c, out, err), 0) << err.str();
    c.out_path = scratch(v + "_b.ppm").string();
    ASSERT_EQ(cmd_render(c, out, err), 0) << err.str();
    c.workers = 8;
    c.out_path = scratch(v + "_c.ppm").string();
    ASSERT_EQ(cmd_render(c, out, err), 0) << err.str();
    const std::string a = slurp(scratch(v + "_a.ppm"));
    EXPECT_EQ(a, slurp(scratch(v + "_b.ppm"))) << v;
    EXPECT_EQ(a, slurp(scratch(v + "_c.ppm"))) << v;
  }
}

TEST(Verify, ExitCodes) {
  std::ostringstream out, err;
  EXPECT_EQ(cmd_verify(small("binned_fused"), out, err), 0) << err.str();
  RunConfig fault = small("binned_fused");
  fault.fault_skew_depth = true;
  EXPECT_EQ(cmd_verify(fault, out, err), 1);
  EXPECT_NE(out.str().find("differ"), std::string::npos) << out.str();
  RunConfig bad = small("no_such_variant");
  EXPECT_EQ(cmd_verify(bad, out, err), 2);
}

TEST(Verify, SmallReyes) {
  RunConfig c = small("reyes", "patches:2x2");
  std::ostringstream out, err;
  EXPECT_EQ(cmd_verify(c, out, err), 0) << out.str() << err.str();
}

TEST(Inspect, ReportsKernels) {
  std::ostringstream out, err;
  RunConfig c;
  c.variant = "freepipe";
  ASSERT_EQ(cmd_inspect(c, out, err), 0);
  EXPECT_NE(out.str().find("kernels: 1"), std::string::npos);
  out.str("");
  c.variant = "reyes";
  ASSERT_EQ(cmd_inspect(c, out, err), 0);
  EXPECT_NE(out.str().find("LoopUntilEmpty {Split}"), std::string::npos) << out.str();
  c.overrides["Ghost"].bin = BinConfig{8, 8, 1};
  EXPECT_NE(cmd_inspect(c, out, err), 0);
}

TEST(Inspect, PipelineFileMatchesVariant) {
  const fs::path p = scratch("binned.json");
  {
    std::ofstream f(p);
    f << to_description(build_variant("binned", {1024, 768}), "binned").dump(2);
  }
  RunConfig a;
  a.variant = "binned";
  RunConfig b;
  b.pipeline_file = p.string();
  std::ostringstream oa, ob, err;
  ASSERT_EQ(cmd_inspect(a, oa, err), 0);
  ASSERT_EQ(cmd_inspect(b, ob, err), 0) << err.str();
  EXPECT_EQ(oa.str(), ob.str());
}

TEST(Bench, RowsCarryTraffic) {
  RunConfig c = small("binned");
  c.variants = {"baseline", "freepipe", "binned+Rasterizer.bin=16x16"};
  c.repeat = 2;
  const Scene scene = procedural_scene(c.proc_scene, c.screen);
  const std::vector<BenchRow> rows = run_bench(c, scene);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].total_ms.size(), 2u);
  EXPECT_GT(rows[0].stats.stored_traffic(), 0u);
  EXPECT_EQ(rows[1].stats.stored_traffic(), 0u);
  EXPECT_GT(rows[2].stats.stored_traffic(), 0u);
  EXPECT_EQ(median({3.0, 1.0, 2.0}), 2.0);
  EXPECT_EQ(median({4.0, 1.0}), 2.5);
}

TEST(Bench, WritesDocument) {
  RunConfig c = small("binned", "quad");
  c.variants = {"baseline", "binned"};
  c.shader_costs = {0, 16};
  c.repeat = 1;
  c.stats_path = scratch("bench.json").string();
  std::ostringstream out, err;
  ASSERT_EQ(cmd_bench(c, out, err), 0) << err.str();
  const auto j = nlohmann::json::parse(slurp(c.stats_path));
  ASSERT_TRUE(j.contains("rows"));
  EXPECT_EQ(j["rows"].size(), 4u);
}
