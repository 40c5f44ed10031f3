#pragma once

// Single-threaded reference renderers and brute-force checkers. They reuse
// only the scalar math (vertex transform, edge functions, bicubic
// evaluation, shading); traversal and data flow are written separately from
// the pipeline stages so that a bug in one does not hide in the other.

#include <optional>
#include <utility>
#include <vector>

#include "binpipe/bezier.hpp"
#include "binpipe/binning.hpp"
#include "binpipe/render_targets.hpp"

namespace binpipe {

Framebuffer reference_render(const std::vector<MeshTriangle>& scene, const Camera& camera, Screen screen);

struct ReyesTrace {
  std::size_t micropolygons = 0;
  double max_micropolygon_extent = 0;
  std::size_t forced_dice = 0;
  std::uint32_t max_depth = 0;  // deepest split level reached
};

// Work-list Reyes. `order_seed` != 0 pops the work list in a shuffled order.
Framebuffer reference_reyes(const std::vector<BezierPatch>& patches, const Camera& camera, Screen screen,
                            const ReyesParams& params = {}, ReyesTrace* trace = nullptr, std::uint64_t order_seed = 0);

// Every bin whose closed rectangle meets the closed box, ascending.
std::vector<int> brute_bin_assign(const BBox& box, const BinGrid& grid);

struct ImageDiff {
  std::size_t differing_pixels = 0;
  float max_channel_error = 0;
  std::optional<std::pair<int, int>> first_difference;  // (x, y), row-major first

  bool identical() const { return differing_pixels == 0; }
};

// Throws std::invalid_argument on a size mismatch.
ImageDiff compare_images(const Framebuffer& a, const Framebuffer& b);

}  // namespace binpipe
