#include "binpipe/binning.hpp"

#include <algorithm>
#include <cmath>

namespace binpipe {

PixelRange BinGrid::rect(int bin) const {
  const int bx = bin % nx;
  const int by = bin / nx;
  return {bx * bin_width, by * bin_height, std::min((bx + 1) * bin_width, screen.width),
          std::min((by + 1) * bin_height, screen.height)};
}

BinGrid make_grid(Screen screen, BinConfig config) {
  BinGrid g;
  g.screen = screen;
  g.bin_width = config.full_screen() ? screen.width : config.bin_width;
  g.bin_height = config.full_screen() ? screen.height : config.bin_height;
  g.nx = (screen.width + g.bin_width - 1) / g.bin_width;
  g.ny = (screen.height + g.bin_height - 1) / g.bin_height;
  return g;
}

BBox bbox_of(const Triangle& t) {
  BBox b{t.v[0].x, t.v[0].y, t.v[0].x, t.v[0].y};
  for (const auto& v : t.v) {
    b.x0 = std::min(b.x0, v.x);
    b.y0 = std::min(b.y0, v.y);
    b.x1 = std::max(b.x1, v.x);
    b.y1 = std::max(b.y1, v.y);
  }
  return b;
}

BBox bbox_of(const Fragment& f) {
  const double cx = f.x + 0.5, cy = f.y + 0.5;
  return {cx, cy, cx, cy};
}

BBox bbox_of(const Micropolygon& m) {
  BBox b{m.corners[0].x, m.corners[0].y, m.corners[0].x, m.corners[0].y};
  for (const auto& c : m.corners) {
    b.x0 = std::min(b.x0, c.x);
    b.y0 = std::min(b.y0, c.y);
    b.x1 = std::max(b.x1, c.x);
    b.y1 = std::max(b.y1, c.y);
  }
  return b;
}

BBox bbox_of(const Token& t) {
  const double cx = t.x + 0.5, cy = t.y + 0.5;
  return {cx, cy, cx, cy};
}

std::optional<BBox> spatial_bbox(const Primitive& p) {
  return std::visit(
      [](const auto& v) -> std::optional<BBox> {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, MeshTriangle> || std::is_same_v<T, BezierPatch>) {
          return std::nullopt;
        } else {
          return bbox_of(v);
        }
      },
      p);
}

void bbox_bins(const BinGrid& grid, const BBox& box, std::vector<int>& out) {
  const double w = grid.screen.width, h = grid.screen.height;
  if (!(box.x1 >= 0 && box.y1 >= 0 && box.x0 <= w && box.y0 <= h)) return;
  // Bin bx spans [bx*bw, (bx+1)*bw]; it touches the box iff bx*bw <= x1 and (bx+1)*bw >= x0.
  auto lo = [](double v, int size, int n) {
    return std::clamp(static_cast<int>(std::ceil(v / size)) - 1, 0, n - 1);
  };
  auto hi = [](double v, int size, int n) {
    return std::clamp(static_cast<int>(std::floor(v / size)), 0, n - 1);
  };
  const int bx0 = lo(std::max(box.x0, 0.0), grid.bin_width, grid.nx);
  const int bx1 = hi(std::min(box.x1, w), grid.bin_width, grid.nx);
  const int by0 = lo(std::max(box.y0, 0.0), grid.bin_height, grid.ny);
  const int by1 = hi(std::min(box.y1, h), grid.bin_height, grid.ny);
  for (int by = by0; by <= by1; ++by)
    for (int bx = bx0; bx <= bx1; ++bx) out.push_back(by * grid.nx + bx);
}

bool ranges_overlap(PixelRange a, PixelRange b) { return !intersect(a, b).empty(); }

}  // namespace binpipe
