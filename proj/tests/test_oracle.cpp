#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "binpipe/oracle.hpp"
#include "binpipe/pipelines.hpp"
#include "binpipe/scenes.hpp"

using namespace binpipe;

namespace {

const Screen kScreen{1024, 768};

std::vector<MeshTriangle> triangles(const Scene& s) { return std::get<std::vector<MeshTriangle>>(s.primitives); }

std::size_t background_pixels(const Framebuffer& fb) {
  return static_cast<std::size_t>(std::count(fb.pixels.begin(), fb.pixels.end(), kBackground));
}

}  // namespace

TEST(BruteBins, HandExamples) {
  const BinGrid g = make_grid(kScreen, {8, 8, 1});
  // Closed box touching x = 16 and y = 16 also meets the third column and row.
  EXPECT_EQ(brute_bin_assign({0, 0, 20, 20}, g), (std::vector<int>{0, 1, 2, 128, 129, 130, 256, 257, 258}));
  EXPECT_EQ(brute_bin_assign({1, 1, 3, 3}, g), std::vector<int>{0});
  EXPECT_EQ(brute_bin_assign({-5, -5, 2000, 2000}, g).size(), static_cast<std::size_t>(g.count()));
  EXPECT_TRUE(brute_bin_assign({-9, -9, -1, -1}, g).empty());
}

// Grids of 1x1, 8x8, 32x32 and 128x96 bins over the screen, plus 32 px bins.
TEST(BruteBins, MatchesBoundingBoxAssign) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> x(-50, 1080), y(-50, 820), w(0, 250);
  std::uniform_int_distribution<int> snap(0, 3);
  const std::vector<BinConfig> configs = {{1024, 768, 1}, {128, 96, 1}, {32, 24, 1}, {8, 8, 1}, {32, 32, 1}};
  int mismatches = 0;
  for (const BinConfig& cfg : configs) {
    const BinGrid g = make_grid(kScreen, cfg);
    for (int i = 0; i < 1000; ++i) {
      BBox b{x(rng), y(rng), 0, 0};
      b.x1 = b.x0 + w(rng);
      b.y1 = b.y0 + w(rng);
      if (snap(rng) == 0) {  // land exactly on bin edges now and then
        b.x0 = std::floor(b.x0 / 8) * 8;
        b.y1 = std::ceil(b.y1 / 8) * 8;
      }
      std::vector<int> got;
      bbox_bins(g, b, got);
      mismatches += got != brute_bin_assign(b, g);
    }
  }
  EXPECT_EQ(make_grid(kScreen, configs[3]).count(), 128 * 96);
  EXPECT_EQ(mismatches, 0);
}

TEST(CompareImages, Basics) {
  Framebuffer a(8, 4, kBackground);
  EXPECT_TRUE(compare_images(a, a).identical());
  Framebuffer b = a;
  b.at(5, 2) = {1, 0, 0};
  const ImageDiff d = compare_images(a, b);
  EXPECT_EQ(d.differing_pixels, 1u);
  EXPECT_EQ(d.first_difference, (std::pair<int, int>{5, 2}));
  EXPECT_NEAR(d.max_channel_error, 1 - kBackground.x, 1e-6);
  EXPECT_THROW(compare_images(a, Framebuffer(4, 8, kBackground)), std::invalid_argument);
}

TEST(ReferenceRender, EmptySceneIsBackground) {
  const Framebuffer fb = reference_render({}, default_camera(kScreen), kScreen);
  EXPECT_EQ(background_pixels(fb), fb.pixels.size());
}

TEST(ReferenceRender, OneTriangleMatchesRasterizerCount) {
  const Camera cam = default_camera(kScreen);
  const MeshTriangle t{{Vertex{{-0.7, -0.4, 0.1}, {0, 0, 1}}, Vertex{{0.8, -0.2, -0.3}, {0, 0, 1}},
                        Vertex{{0.1, 0.9, 0.2}, {0, 0, 1}}},
                       0};
  const Framebuffer fb = reference_render({t}, cam, kScreen);
  std::vector<Fragment> frags;
  rasterize_triangle(*vertex_shade(t, cam, kScreen), {0, 0, kScreen.width, kScreen.height}, frags);
  EXPECT_GT(frags.size(), 1000u);
  EXPECT_EQ(fb.pixels.size() - background_pixels(fb), frags.size());
}

TEST(ReferenceRender, TriangleOrderDoesNotMatter) {
  std::vector<MeshTriangle> tris = triangles(mixed_soup(kScreen, 2000, 3));
  const Camera cam = default_camera(kScreen);
  const Framebuffer base = reference_render(tris, cam, kScreen);
  std::mt19937 rng(8);
  for (int trial = 0; trial < 3; ++trial) {
    std::shuffle(tris.begin(), tris.end(), rng);
    EXPECT_TRUE(compare_images(base, reference_render(tris, cam, kScreen)).identical());
  }
}

TEST(ReferenceReyes, WorkListOrderDoesNotMatter) {
  const Scene s = patch_array(3, 3);
  const auto& patches = std::get<std::vector<BezierPatch>>(s.primitives);
  const Camera cam = s.camera_for(kScreen);
  ReyesTrace t0, t1;
  const Framebuffer base = reference_reyes(patches, cam, kScreen, {}, &t0);
  const Framebuffer shuffled = reference_reyes(patches, cam, kScreen, {}, &t1, 99);
  EXPECT_TRUE(compare_images(base, shuffled).identical());
  EXPECT_EQ(t0.micropolygons, t1.micropolygons);
  EXPECT_GT(t0.micropolygons, 0u);
}

TEST(ReferenceReyes, SmallFlatPatchNeverSplits) {
  // A 0.02-unit flat patch at the origin projects to a few pixels.
  BezierPatch p;
  for (int j = 0; j < 4; ++j)
    for (int i = 0; i < 4; ++i) p.cp[j * 4 + i] = {0.01 * i, 0.01 * j, 0};
  ReyesTrace t;
  reference_reyes({p}, default_camera(kScreen), kScreen, {}, &t);
  EXPECT_EQ(t.max_depth, 0u);
  EXPECT_GT(t.micropolygons, 0u);
}
