#include "binpipe/raster.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace binpipe {

namespace {

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return -floor_div(-a, b); }

}  // namespace

Camera default_camera(Screen screen) {
  const double aspect = static_cast<double>(screen.width) / static_cast<double>(screen.height);
  const Vec3 eye{0, 0, 3};
  return {perspective(std::numbers::pi / 4, aspect, 0.1, 100.0) * look_at(eye, {0, 0, 0}, {0, 1, 0}), eye};
}

std::optional<ScreenVertex> transform_vertex(const Mat4& view_proj, Screen screen, Vec3 position, Vec3 normal) {
  const Vec4 clip = view_proj.transform(position);
  if (clip.w <= kNearCullW) return std::nullopt;
  const double inv_w = 1.0 / clip.w;
  ScreenVertex out;
  out.x = (clip.x * inv_w * 0.5 + 0.5) * screen.width;
  out.y = (0.5 - clip.y * inv_w * 0.5) * screen.height;
  out.z = clip.z * inv_w * 0.5 + 0.5;
  out.inv_w = inv_w;
  out.normal = normalize(normal);
  return out;
}

std::int64_t snap_coordinate(double pixels) {
  return static_cast<std::int64_t>(std::llround(pixels * static_cast<double>(kSubpixelScale)));
}

std::optional<TriangleSetup> setup_triangle(const ScreenVertex& a, const ScreenVertex& b, const ScreenVertex& c) {
  const std::array<const ScreenVertex*, 3> in = {&a, &b, &c};
  for (const ScreenVertex* v : in) {
    if (!std::isfinite(v->x) || !std::isfinite(v->y)) return std::nullopt;
    if (std::abs(v->x) > kGuardBandPixels || std::abs(v->y) > kGuardBandPixels) return std::nullopt;
  }

  TriangleSetup s;
  s.source = {0, 1, 2};
  for (int k = 0; k < 3; ++k) {
    s.x[k] = snap_coordinate(in[k]->x);
    s.y[k] = snap_coordinate(in[k]->y);
  }
  s.area2 = (s.x[1] - s.x[0]) * (s.y[2] - s.y[0]) - (s.y[1] - s.y[0]) * (s.x[2] - s.x[0]);
  if (s.area2 == 0) return std::nullopt;
  if (s.area2 < 0) {
    std::swap(s.x[1], s.x[2]);
    std::swap(s.y[1], s.y[2]);
    std::swap(s.source[1], s.source[2]);
    s.area2 = -s.area2;
  }

  for (int k = 0; k < 3; ++k) {
    const int from = (k + 1) % 3;
    const int to = (k + 2) % 3;
    const std::int64_t dx = s.x[to] - s.x[from];
    const std::int64_t dy = s.y[to] - s.y[from];
    const bool top_left = dy < 0 || (dy == 0 && dx > 0);
    s.bias[k] = top_left ? 0 : -1;
  }

  const auto [min_x, max_x] = std::minmax({s.x[0], s.x[1], s.x[2]});
  const auto [min_y, max_y] = std::minmax({s.y[0], s.y[1], s.y[2]});
  const double scale = static_cast<double>(kSubpixelScale);
  s.min_x = static_cast<double>(min_x) / scale;
  s.max_x = static_cast<double>(max_x) / scale;
  s.min_y = static_cast<double>(min_y) / scale;
  s.max_y = static_cast<double>(max_y) / scale;

  const std::int64_t half = kSubpixelScale / 2;
  s.candidates.x0 = static_cast<int>(ceil_div(min_x - half, kSubpixelScale));
  s.candidates.x1 = static_cast<int>(floor_div(max_x - half, kSubpixelScale)) + 1;
  s.candidates.y0 = static_cast<int>(ceil_div(min_y - half, kSubpixelScale));
  s.candidates.y1 = static_cast<int>(floor_div(max_y - half, kSubpixelScale)) + 1;
  return s;
}

EdgeWeights edge_weights(const TriangleSetup& s, int px, int py) {
  const std::int64_t cx = static_cast<std::int64_t>(px) * kSubpixelScale + kSubpixelScale / 2;
  const std::int64_t cy = static_cast<std::int64_t>(py) * kSubpixelScale + kSubpixelScale / 2;
  EdgeWeights e;
  for (int k = 0; k < 3; ++k) {
    const int from = (k + 1) % 3;
    const int to = (k + 2) % 3;
    e.w[k] = (s.x[to] - s.x[from]) * (cy - s.y[from]) - (s.y[to] - s.y[from]) * (cx - s.x[from]);
  }
  return e;
}

bool covers(const TriangleSetup& s, const EdgeWeights& e) {
  return e.w[0] + s.bias[0] >= 0 && e.w[1] + s.bias[1] >= 0 && e.w[2] + s.bias[2] >= 0;
}

Interpolated interpolate(const TriangleSetup& s, const std::array<ScreenVertex, 3>& v, const EdgeWeights& e) {
  const double inv_area = 1.0 / static_cast<double>(s.area2);
  const ScreenVertex& a = v[s.source[0]];
  const ScreenVertex& b = v[s.source[1]];
  const ScreenVertex& c = v[s.source[2]];
  const double l0 = static_cast<double>(e.w[0]) * inv_area;
  const double l1 = static_cast<double>(e.w[1]) * inv_area;
  const double l2 = static_cast<double>(e.w[2]) * inv_area;

  Interpolated out;
  out.depth = l0 * a.z + l1 * b.z + l2 * c.z;
  const double q0 = l0 * a.inv_w;
  const double q1 = l1 * b.inv_w;
  const double q2 = l2 * c.inv_w;
  out.normal = normalize(a.normal * q0 + b.normal * q1 + c.normal * q2);
  return out;
}

PixelRange intersect(PixelRange a, PixelRange b) {
  return {std::max(a.x0, b.x0), std::max(a.y0, b.y0), std::min(a.x1, b.x1), std::min(a.y1, b.y1)};
}

Vec3f diffuse_shade(Vec3f normal) {
  const double inv_sqrt3 = 1.0 / std::sqrt(3.0);
  const Vec3 light{inv_sqrt3, inv_sqrt3, inv_sqrt3};
  const double d = std::max(0.0, dot(to_double(normal), light));
  return to_float(kMaterial * d);
}

void burn_shader_cost(int iterations, float seed) {
  float acc = seed;
  for (int i = 0; i < iterations; ++i) {
    acc = std::sin(acc + 1.0f);
    asm volatile("" : "+r,m"(acc));
  }
}

}  // namespace binpipe
