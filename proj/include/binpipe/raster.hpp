#pragma once

// Scalar rasterization math shared by the pipeline stages and the reference
// renderers. Everything here is a pure function of its arguments so that two
// different traversal orders produce bit-identical per-pixel results.

#include <array>
#include <cstdint>
#include <optional>

#include "binpipe/math.hpp"
#include "binpipe/primitives.hpp"

namespace binpipe {

struct Screen {
  int width = 0;
  int height = 0;
  friend bool operator==(const Screen&, const Screen&) = default;
};

struct Camera {
  Mat4 view_proj = Mat4::identity();
  Vec3 eye;
};

// 45 degree perspective camera at (0,0,3) looking at the origin.
Camera default_camera(Screen screen);

inline constexpr double kNearCullW = 1e-6;

// Model-view-projection, perspective divide, viewport map. Returns nullopt
// when the clip-space w is at or behind the eye plane.
std::optional<ScreenVertex> transform_vertex(const Mat4& view_proj, Screen screen, Vec3 position, Vec3 normal);

// Sub-pixel precision of the snapped vertex grid.
inline constexpr int kSubpixelBits = 8;
inline constexpr std::int64_t kSubpixelScale = std::int64_t{1} << kSubpixelBits;
// Vertices farther than this from the origin (in pixels) are rejected.
inline constexpr double kGuardBandPixels = 1 << 20;

struct PixelRange {
  int x0 = 0, y0 = 0;  // inclusive
  int x1 = 0, y1 = 0;  // exclusive
  bool empty() const { return x0 >= x1 || y0 >= y1; }
};

struct TriangleSetup {
  std::array<std::int64_t, 3> x{}, y{};  // snapped, counter-clockwise in edge-function sense
  std::array<std::uint8_t, 3> source{};  // index of the input vertex now at each slot
  std::int64_t area2 = 0;                // twice the signed area in fixed units, > 0
  std::array<std::int64_t, 3> bias{};    // 0 for top-left edges, -1 otherwise
  double min_x = 0, min_y = 0, max_x = 0, max_y = 0;  // snapped bounds in pixels
  PixelRange candidates;                 // pixels whose centers lie inside the bounds
};

std::int64_t snap_coordinate(double pixels);

// Orientation-normalized fixed-point setup. nullopt for zero-area triangles
// and triangles outside the guard band.
std::optional<TriangleSetup> setup_triangle(const ScreenVertex& a, const ScreenVertex& b, const ScreenVertex& c);

// Edge values at the center of pixel (px, py). weights[k] is the edge function
// of the edge opposite vertex slot k.
struct EdgeWeights {
  std::array<std::int64_t, 3> w{};
};
EdgeWeights edge_weights(const TriangleSetup& s, int px, int py);

// Top-left fill rule coverage test for the center of pixel (px, py).
bool covers(const TriangleSetup& s, const EdgeWeights& e);

struct Interpolated {
  double depth = 0;
  Vec3 normal;
};

// Screen-linear depth and perspective-correct normal at a covered pixel.
Interpolated interpolate(const TriangleSetup& s, const std::array<ScreenVertex, 3>& v, const EdgeWeights& e);

inline bool depth_in_range(double z) { return z >= 0.0 && z <= 1.0; }

PixelRange intersect(PixelRange a, PixelRange b);

// Diffuse material and light direction of the shipped shaders.
inline constexpr Vec3 kMaterial{0.80, 0.75, 0.65};

// Lambert term against normalize(1,1,1), clamped at zero.
Vec3f diffuse_shade(Vec3f normal);

// Burns `iterations` transcendental evaluations without affecting any output.
void burn_shader_cost(int iterations, float seed);

}  // namespace binpipe
