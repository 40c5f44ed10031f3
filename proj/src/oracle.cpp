#include "binpipe/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <random>
#include <stdexcept>
#include <tuple>

namespace binpipe {

namespace {

// Plain per-pixel minimum of (depth, id, sub), no locks.
struct Resolve {
  int width, height;
  std::vector<std::tuple<float, std::uint64_t, std::uint32_t>> best;
  std::vector<Vec3f> color;

  explicit Resolve(Screen s)
      : width(s.width),
        height(s.height),
        best(static_cast<std::size_t>(s.width) * s.height,
             {std::numeric_limits<float>::infinity(), ~std::uint64_t{0}, ~std::uint32_t{0}}),
        color(best.size(), kBackground) {}

  void offer(int x, int y, float depth, std::uint64_t id, std::uint32_t sub, Vec3f c) {
    const std::size_t i = static_cast<std::size_t>(y) * width + x;
    const auto key = std::make_tuple(depth, id, sub);
    if (key < best[i]) {
      best[i] = key;
      color[i] = c;
    }
  }

  Framebuffer image() const {
    Framebuffer fb(width, height, kBackground);
    fb.pixels = color;
    return fb;
  }
};

// Pixels whose centers might be covered: a box around the snapped vertices
// one pixel wider than needed, clamped to the screen.
void covered_pixels(const TriangleSetup& s, Screen screen, auto&& visit) {
  std::int64_t lo_x = s.x[0], hi_x = s.x[0], lo_y = s.y[0], hi_y = s.y[0];
  for (int k = 1; k < 3; ++k) {
    lo_x = std::min(lo_x, s.x[k]);
    hi_x = std::max(hi_x, s.x[k]);
    lo_y = std::min(lo_y, s.y[k]);
    hi_y = std::max(hi_y, s.y[k]);
  }
  const auto px = [](std::int64_t fixed) { return static_cast<double>(fixed) / kSubpixelScale; };
  const int x0 = std::max(0, static_cast<int>(std::floor(px(lo_x))) - 1);
  const int y0 = std::max(0, static_cast<int>(std::floor(px(lo_y))) - 1);
  const int x1 = std::min(screen.width - 1, static_cast<int>(std::ceil(px(hi_x))) + 1);
  const int y1 = std::min(screen.height - 1, static_cast<int>(std::ceil(px(hi_y))) + 1);
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x) {
      const EdgeWeights e = edge_weights(s, x, y);
      if (covers(s, e)) visit(x, y, e);
    }
}

}  // namespace

Framebuffer reference_render(const std::vector<MeshTriangle>& scene, const Camera& camera, Screen screen) {
  Resolve out(screen);
  for (const MeshTriangle& tri : scene) {
    std::array<ScreenVertex, 3> v;
    bool culled = false;
    for (int k = 0; k < 3 && !culled; ++k) {
      const auto sv = transform_vertex(camera.view_proj, screen, tri.v[k].position, tri.v[k].normal);
      if (sv) {
        v[k] = *sv;
      } else {
        culled = true;
      }
    }
    if (culled) continue;
    const auto setup = setup_triangle(v[0], v[1], v[2]);
    if (!setup) continue;
    covered_pixels(*setup, screen, [&](int x, int y, const EdgeWeights& e) {
      const Interpolated in = interpolate(*setup, v, e);
      if (!depth_in_range(in.depth)) return;
      const Vec3f n = to_float(in.normal);
      out.offer(x, y, static_cast<float>(in.depth), tri.id, 0, diffuse_shade(n));
    });
  }
  return out.image();
}

Framebuffer reference_reyes(const std::vector<BezierPatch>& patches, const Camera& camera, Screen screen,
                            const ReyesParams& params, ReyesTrace* trace, std::uint64_t order_seed) {
  Resolve out(screen);
  ReyesTrace local;
  std::deque<BezierPatch> work(patches.begin(), patches.end());
  std::mt19937_64 rng(order_seed);

  while (!work.empty()) {
    if (order_seed != 0 && work.size() > 1) {
      const std::size_t pick = std::uniform_int_distribution<std::size_t>(0, work.size() - 1)(rng);
      std::swap(work[pick], work.back());
    }
    const BezierPatch p = std::move(work.back());
    work.pop_back();
    local.max_depth = std::max(local.max_depth, p.depth);

    const SplitDecision d = decide_split(p, camera, screen, params);
    if (d == SplitDecision::Cull) continue;
    if (d == SplitDecision::Split) {
      auto halves = bisect_patch(p, choose_split_axis(p, camera, screen));
      work.push_back(std::move(halves.first));
      work.push_back(std::move(halves.second));
      continue;
    }
    if (d == SplitDecision::ForcedDice) ++local.forced_dice;

    const int n = dice_resolution(p, camera, screen, params.dice_rate);
    if (n == 0) continue;
    std::vector<std::optional<ScreenVertex>> row0(n + 1), row1(n + 1);
    for (int i = 0; i <= n; ++i) row1[i] = dice_point(p, i, 0, n, camera, screen);
    for (int j = 0; j < n; ++j) {
      std::swap(row0, row1);
      for (int i = 0; i <= n; ++i) row1[i] = dice_point(p, i, j + 1, n, camera, screen);
      for (int i = 0; i < n; ++i) {
        if (!row0[i] || !row0[i + 1] || !row1[i + 1] || !row1[i]) continue;
        const Micropolygon mp =
            assemble_micropolygon({*row0[i], *row0[i + 1], *row1[i + 1], *row1[i]}, p.node_id, static_cast<std::uint32_t>(j * n + i));
        ++local.micropolygons;
        local.max_micropolygon_extent = std::max(local.max_micropolygon_extent, micropolygon_extent(mp));

        std::array<ScreenVertex, 4> c;
        for (int k = 0; k < 4; ++k) {
          c[k].x = mp.corners[k].x;
          c[k].y = mp.corners[k].y;
        }
        const Vec3f color = diffuse_shade(mp.normal);
        for (const auto& [a, b, e] : {std::array{0, 1, 2}, std::array{0, 2, 3}}) {
          const auto s = setup_triangle(c[a], c[b], c[e]);
          if (!s) continue;
          covered_pixels(*s, screen, [&](int x, int y, const EdgeWeights&) {
            out.offer(x, y, mp.depth, mp.id, mp.sub, color);
          });
        }
      }
    }
  }
  if (trace) *trace = local;
  return out.image();
}

std::vector<int> brute_bin_assign(const BBox& box, const BinGrid& grid) {
  std::vector<int> out;
  for (int b = 0; b < grid.count(); ++b) {
    const PixelRange r = grid.rect(b);
    // The bin covers the closed area [x0, x1] x [y0, y1] in pixel units.
    const bool hit = box.x0 <= r.x1 && box.x1 >= r.x0 && box.y0 <= r.y1 && box.y1 >= r.y0;
    if (hit) out.push_back(b);
  }
  return out;
}

ImageDiff compare_images(const Framebuffer& a, const Framebuffer& b) {
  if (a.width != b.width || a.height != b.height) throw std::invalid_argument("compare_images: size mismatch");
  ImageDiff d;
  for (int y = 0; y < a.height; ++y)
    for (int x = 0; x < a.width; ++x) {
      const Vec3f p = a.at(x, y), q = b.at(x, y);
      if (p == q) continue;
      if (!d.first_difference) d.first_difference = {x, y};
      ++d.differing_pixels;
      d.max_channel_error =
          std::max({d.max_channel_error, std::abs(p.x - q.x), std::abs(p.y - q.y), std::abs(p.z - q.z)});
    }
  return d;
}

}  // namespace binpipe
