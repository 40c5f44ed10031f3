#include <gtest/gtest.h>

#include <algorithm>
#include <atomic>
#include <set>

#include "binpipe/bezier.hpp"
#include "binpipe/oracle.hpp"
#include "binpipe/pipelines.hpp"
#include "binpipe/scenes.hpp"

using namespace binpipe;

namespace {

const Screen kScreen{1024, 768};

// Maps world (x, y) straight to pixel (x, y) at depth 0.5.
Camera pixel_camera() {
  Camera c;
  c.view_proj = Mat4{};
  c.view_proj(0, 0) = 2.0 / kScreen.width;
  c.view_proj(0, 3) = -1;
  c.view_proj(1, 1) = -2.0 / kScreen.height;
  c.view_proj(1, 3) = 1;
  c.view_proj(3, 3) = 1;
  c.eye = {0, 0, 1e6};
  return c;
}

BezierPatch flat_patch(double size, double ox = 100, double oy = 100, double tilt = 0) {
  BezierPatch p;
  for (int j = 0; j < 4; ++j)
    for (int i = 0; i < 4; ++i) {
      const double x = ox + size * i / 3, y = oy + size * j / 3;
      p.cp[j * 4 + i] = {x, y, tilt * (x - ox) + 0.5 * tilt * (y - oy)};
    }
  p.node_id = root_node_id(0);
  return p;
}

}  // namespace

TEST(Reyes, LargePatchSplits) {
  EXPECT_EQ(decide_split(flat_patch(100), pixel_camera(), kScreen, {}), SplitDecision::Split);
}

TEST(Reyes, SmallPatchDices) {
  EXPECT_EQ(decide_split(flat_patch(7.5), pixel_camera(), kScreen, {}), SplitDecision::Dice);
  EXPECT_EQ(dice_patch(flat_patch(7.5), pixel_camera(), kScreen, 1.0).size(), 64u);
}

TEST(Reyes, ThresholdPatchGives256Micropolygons) {
  const BezierPatch p = flat_patch(16);
  EXPECT_EQ(decide_split(p, pixel_camera(), kScreen, {}), SplitDecision::Dice);
  const auto mps = dice_patch(p, pixel_camera(), kScreen, 1.0);
  ASSERT_EQ(mps.size(), 256u);
  std::set<std::uint32_t> subs;
  for (const auto& m : mps) {
    EXPECT_NEAR(micropolygon_extent(m), 1.0, 1e-9);
    subs.insert(m.sub);
  }
  EXPECT_EQ(subs.size(), 256u);
}

TEST(Reyes, DepthCapForcesDice) {
  BezierPatch p = flat_patch(100);
  p.depth = 32;
  EXPECT_EQ(decide_split(p, pixel_camera(), kScreen, {}), SplitDecision::ForcedDice);
  EXPECT_EQ(decide_split(flat_patch(100, 2000, 2000), pixel_camera(), kScreen, {}), SplitDecision::Cull);
}

TEST(Reyes, SplitChildrenStayOnThePlane) {
  const BezierPatch p = flat_patch(90, 10, 20, 0.3);
  for (SplitAxis axis : {SplitAxis::U, SplitAxis::V}) {
    const auto [a, b] = bisect_patch(p, axis);
    for (const BezierPatch* c : {&a, &b}) {
      EXPECT_EQ(c->depth, 1u);
      for (double u : {0.0, 0.3, 1.0})
        for (double v : {0.0, 0.6, 1.0}) {
          const Vec3 q = evaluate_patch(c->cp, u, v);
          EXPECT_NEAR(q.z, 0.3 * (q.x - 10) + 0.15 * (q.y - 20), 1e-9);
        }
    }
    // The halves meet along the split line.
    const Vec3 end_a = axis == SplitAxis::U ? evaluate_patch(a.cp, 1, 0.4) : evaluate_patch(a.cp, 0.4, 1);
    const Vec3 start_b = axis == SplitAxis::U ? evaluate_patch(b.cp, 0, 0.4) : evaluate_patch(b.cp, 0.4, 0);
    EXPECT_NEAR(end_a.x, start_b.x, 1e-9);
    EXPECT_NEAR(end_a.y, start_b.y, 1e-9);
  }
}

TEST(Reyes, RepeatedSplitsPartitionUv) {
  std::vector<BezierPatch> work = {flat_patch(300)};
  std::vector<BezierPatch> leaves;
  while (!work.empty()) {
    const BezierPatch p = work.back();
    work.pop_back();
    if (decide_split(p, pixel_camera(), kScreen, {}) != SplitDecision::Split) {
      leaves.push_back(p);
      continue;
    }
    const auto [a, b] = bisect_patch(p, choose_split_axis(p, pixel_camera(), kScreen));
    work.push_back(a);
    work.push_back(b);
  }
  double area = 0;
  std::set<std::uint64_t> ids;
  for (const auto& l : leaves) {
    area += (l.u1 - l.u0) * (l.v1 - l.v0);
    ids.insert(l.node_id);
    EXPECT_LE(patch_screen_bounds(l, pixel_camera(), kScreen)->extent(), 16.0);
  }
  EXPECT_NEAR(area, 1.0, 1e-12);
  EXPECT_EQ(ids.size(), leaves.size());
  // 300 px halves five times per axis to 9.375 px: 32 x 32 leaves.
  EXPECT_EQ(leaves.size(), 1024u);
}

TEST(Reyes, DegeneratePatchDoesNotCrash) {
  BezierPatch p;
  p.cp.fill({200, 200, 0});
  EXPECT_EQ(decide_split(p, pixel_camera(), kScreen, {}), SplitDecision::Dice);
  std::vector<Fragment> frags;
  for (const auto& m : dice_patch(p, pixel_camera(), kScreen, 1.0)) sample_micropolygon(m, {0, 0, 1024, 768}, frags);
  EXPECT_TRUE(frags.empty());
}

TEST(Reyes, RoundRobinBalance) {
  const auto rr = round_robin_assign();
  const BinGrid grid = make_grid(kScreen, {128, 128, 1});
  std::atomic<std::uint64_t> counter = 0;
  AssignContext ctx{&grid, 0, &counter, nullptr};
  std::vector<int> count(grid.count(), 0), out;
  for (int i = 0; i < 1000; ++i) {
    out.clear();
    rr->fn(Primitive{flat_patch(10)}, ctx, out);
    ASSERT_EQ(out.size(), 1u);
    ++count[out[0]];
  }
  const auto [lo, hi] = std::minmax_element(count.begin(), count.end());
  EXPECT_LE(*hi - *lo, 1);
}

TEST(Reyes, QuadSamplesAsTwoTriangles) {
  Micropolygon mp;
  mp.corners = {ScreenPoint{10.2, 10.1}, ScreenPoint{14.7, 10.9}, ScreenPoint{15.1, 15.3}, ScreenPoint{9.8, 14.6}};
  mp.depth = 0.4f;
  mp.normal = {0, 0, 1};
  mp.id = 3;
  std::vector<Fragment> got;
  sample_micropolygon(mp, {0, 0, 64, 64}, got);
  std::set<std::pair<int, int>> seen;
  for (const auto& f : got) EXPECT_TRUE(seen.insert({f.x, f.y}).second) << "double cover at " << f.x << "," << f.y;

  auto sv = [](ScreenPoint p) {
    ScreenVertex v;
    v.x = p.x;
    v.y = p.y;
    v.z = 0.4;
    return v;
  };
  std::set<std::pair<int, int>> want;
  std::vector<Fragment> tmp;
  rasterize_triangle(Triangle{{sv(mp.corners[0]), sv(mp.corners[1]), sv(mp.corners[2])}, 3}, {0, 0, 64, 64}, tmp);
  rasterize_triangle(Triangle{{sv(mp.corners[0]), sv(mp.corners[2]), sv(mp.corners[3])}, 3}, {0, 0, 64, 64}, tmp);
  for (const auto& f : tmp) want.insert({f.x, f.y});
  EXPECT_EQ(seen, want);
  EXPECT_EQ(got.size(), tmp.size());  // the shared diagonal is not counted twice
}

TEST(Reyes, TeapotMicropolygonsWithinBound) {
  const Scene teapot = teapot_scene();
  ReyesTrace trace;
  reference_reyes(std::get<std::vector<BezierPatch>>(teapot.primitives), teapot.camera_for(kScreen), kScreen, {},
                  &trace);
  EXPECT_GT(trace.micropolygons, 10000u);
  EXPECT_LE(trace.max_micropolygon_extent, 1.5);
  EXPECT_EQ(trace.forced_dice, 0u);
  EXPECT_LE(trace.max_depth, 32u);
}

TEST(Reyes, NodeIdsAreUnique) {
  std::set<std::uint64_t> ids;
  std::vector<std::uint64_t> frontier = {root_node_id(0), root_node_id(1)};
  for (int level = 0; level < 10; ++level) {
    std::vector<std::uint64_t> next;
    for (auto id : frontier) {
      EXPECT_TRUE(ids.insert(id).second);
      next.push_back(child_node_id(id, 0));
      next.push_back(child_node_id(id, 1));
    }
    frontier = std::move(next);
  }
}
