#pragma once

#include <optional>
#include <vector>

#include "binpipe/primitives.hpp"
#include "binpipe/raster.hpp"

namespace binpipe {

// 0x0 means "one bin covering the screen".
struct BinConfig {
  int bin_width = 0;
  int bin_height = 0;
  int threads_per_bin = 1;  // advisory only on CPU

  bool full_screen() const { return bin_width == 0 && bin_height == 0; }
  friend bool operator==(const BinConfig&, const BinConfig&) = default;
};

// Row-major grid from the top-left pixel; edge bins are clipped to the screen.
struct BinGrid {
  Screen screen;
  int bin_width = 0;
  int bin_height = 0;
  int nx = 0;
  int ny = 0;

  int count() const { return nx * ny; }
  PixelRange rect(int bin) const;
  int bin_at(int px, int py) const { return (py / bin_height) * nx + px / bin_width; }
  friend bool operator==(const BinGrid&, const BinGrid&) = default;
};

BinGrid make_grid(Screen screen, BinConfig config);

// Continuous screen-space box, closed on all sides.
struct BBox {
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;
};

BBox bbox_of(const Triangle& t);
BBox bbox_of(const Fragment& f);  // the pixel center
BBox bbox_of(const Micropolygon& m);
BBox bbox_of(const Token& t);     // the pixel center
// nullopt for primitives without a screen position (mesh triangles, patches).
std::optional<BBox> spatial_bbox(const Primitive& p);

// Bins whose closed rectangle intersects the closed box, ascending.
void bbox_bins(const BinGrid& grid, const BBox& box, std::vector<int>& out);

// True when the two ranges share at least one pixel.
bool ranges_overlap(PixelRange a, PixelRange b);

}  // namespace binpipe
