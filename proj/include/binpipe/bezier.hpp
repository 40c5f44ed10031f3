#pragma once

// Bicubic Bezier patch math: evaluation, de Casteljau bisection, screen bounds,
// and the dicing grid. Shared by the Reyes stages and the reference renderer.

#include <array>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "binpipe/primitives.hpp"
#include "binpipe/raster.hpp"

namespace binpipe {

struct ReyesParams {
  double split_threshold = 16.0;  // pixels, longer side of the screen bound
  double dice_rate = 1.0;         // pixels per micropolygon edge
  std::uint32_t max_split_depth = 32;
};

inline constexpr int kNodePathBits = 33;

std::uint64_t root_node_id(std::uint64_t patch_index);
std::uint64_t child_node_id(std::uint64_t parent, int which);

Vec3 evaluate_patch(const std::array<Vec3, 16>& cp, double u, double v);
Vec3 patch_du(const std::array<Vec3, 16>& cp, double u, double v);
Vec3 patch_dv(const std::array<Vec3, 16>& cp, double u, double v);

enum class SplitAxis { U, V };

// De Casteljau bisection at the parametric midpoint. Children carry depth + 1,
// child node ids and halves of the parent's uv rectangle.
std::pair<BezierPatch, BezierPatch> bisect_patch(const BezierPatch& p, SplitAxis axis);

struct ScreenBounds {
  double min_x = 0, min_y = 0, max_x = 0, max_y = 0;
  double width() const { return max_x - min_x; }
  double height() const { return max_y - min_y; }
  double extent() const { return width() > height() ? width() : height(); }
};

// Bounds of the projected control points (a conservative bound of the
// surface). nullopt when any control point is at or behind the eye plane.
std::optional<ScreenBounds> patch_screen_bounds(const BezierPatch& p, const Camera& camera, Screen screen);

// Direction whose projected control polygon is longer on screen.
SplitAxis choose_split_axis(const BezierPatch& p, const Camera& camera, Screen screen);

enum class SplitDecision { Split, Dice, ForcedDice, Cull };

SplitDecision decide_split(const BezierPatch& p, const Camera& camera, Screen screen, const ReyesParams& params);

// Dicing grid resolution n for an n x n micropolygon grid.
int dice_resolution(const ScreenBounds& bounds, double rate);

// Cells may exceed the dice rate by this fraction.
inline constexpr double kDiceTolerance = 0.5;

// Starts from the bound-based n above. Uneven parametric speed can still
// leave cells larger than rate * (1 + tolerance); n is then raised in
// proportion to the largest cell until none is, or the cap is reached.
int dice_resolution(const BezierPatch& p, const Camera& camera, Screen screen, double rate);

// Surface point (i/n, j/n) on the patch, projected. The normal is taken from
// the partial derivatives and faces the camera.
std::optional<ScreenVertex> dice_point(const BezierPatch& p, int i, int j, int n, const Camera& camera, Screen screen);

Micropolygon assemble_micropolygon(const std::array<ScreenVertex, 4>& corners, std::uint64_t id, std::uint32_t sub);

// Full n x n grid for the patch, n from dice_resolution. Cells with a
// corner behind the eye are dropped. Micropolygon sub id is j * n + i.
std::vector<Micropolygon> dice_patch(const BezierPatch& p, const Camera& camera, Screen screen, double rate);

// Longer side of the micropolygon's screen bounding box.
double micropolygon_extent(const Micropolygon& mp);

}  // namespace binpipe
