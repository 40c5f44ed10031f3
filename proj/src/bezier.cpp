#include "binpipe/bezier.hpp"

#include <algorithm>
#include <cmath>

namespace binpipe {

namespace {

constexpr std::uint64_t kPathMask = (std::uint64_t{1} << kNodePathBits) - 1;
constexpr int kMaxDiceResolution = 1024;

std::array<double, 4> bernstein(double t) {
  const double s = 1 - t;
  return {s * s * s, 3 * t * s * s, 3 * t * t * s, t * t * t};
}

std::array<double, 4> bernstein_derivative(double t) {
  const double s = 1 - t;
  return {-3 * s * s, 3 * s * s - 6 * t * s, 6 * t * s - 3 * t * t, 3 * t * t};
}

Vec3 combine(const std::array<Vec3, 16>& cp, const std::array<double, 4>& bu, const std::array<double, 4>& bv) {
  Vec3 r;
  for (int j = 0; j < 4; ++j) {
    Vec3 row;
    for (int i = 0; i < 4; ++i) row = row + cp[j * 4 + i] * bu[i];
    r = r + row * bv[j];
  }
  return r;
}

// Splits the cubic (a,b,c,d) at t = 1/2.
void de_casteljau_half(const std::array<Vec3, 4>& in, std::array<Vec3, 4>& left, std::array<Vec3, 4>& right) {
  const Vec3 ab = lerp(in[0], in[1], 0.5);
  const Vec3 bc = lerp(in[1], in[2], 0.5);
  const Vec3 cd = lerp(in[2], in[3], 0.5);
  const Vec3 abc = lerp(ab, bc, 0.5);
  const Vec3 bcd = lerp(bc, cd, 0.5);
  const Vec3 mid = lerp(abc, bcd, 0.5);
  left = {in[0], ab, abc, mid};
  right = {mid, bcd, cd, in[3]};
}

}  // namespace

std::uint64_t root_node_id(std::uint64_t patch_index) { return (patch_index << kNodePathBits) | 1; }

std::uint64_t child_node_id(std::uint64_t parent, int which) {
  const std::uint64_t path = parent & kPathMask;
  return (parent & ~kPathMask) | (((path << 1) | static_cast<std::uint64_t>(which)) & kPathMask);
}

Vec3 evaluate_patch(const std::array<Vec3, 16>& cp, double u, double v) {
  return combine(cp, bernstein(u), bernstein(v));
}

Vec3 patch_du(const std::array<Vec3, 16>& cp, double u, double v) {
  return combine(cp, bernstein_derivative(u), bernstein(v));
}

Vec3 patch_dv(const std::array<Vec3, 16>& cp, double u, double v) {
  return combine(cp, bernstein(u), bernstein_derivative(v));
}

std::pair<BezierPatch, BezierPatch> bisect_patch(const BezierPatch& p, SplitAxis axis) {
  BezierPatch lo = p;
  BezierPatch hi = p;
  for (int k = 0; k < 4; ++k) {
    std::array<Vec3, 4> curve, left, right;
    for (int t = 0; t < 4; ++t) curve[t] = axis == SplitAxis::U ? p.cp[k * 4 + t] : p.cp[t * 4 + k];
    de_casteljau_half(curve, left, right);
    for (int t = 0; t < 4; ++t) {
      const int idx = axis == SplitAxis::U ? k * 4 + t : t * 4 + k;
      lo.cp[idx] = left[t];
      hi.cp[idx] = right[t];
    }
  }
  if (axis == SplitAxis::U) {
    const double mid = 0.5 * (p.u0 + p.u1);
    lo.u1 = mid;
    hi.u0 = mid;
  } else {
    const double mid = 0.5 * (p.v0 + p.v1);
    lo.v1 = mid;
    hi.v0 = mid;
  }
  lo.depth = hi.depth = p.depth + 1;
  lo.node_id = child_node_id(p.node_id, 0);
  hi.node_id = child_node_id(p.node_id, 1);
  return {lo, hi};
}

std::optional<ScreenBounds> patch_screen_bounds(const BezierPatch& p, const Camera& camera, Screen screen) {
  ScreenBounds b{INFINITY, INFINITY, -INFINITY, -INFINITY};
  for (const Vec3& c : p.cp) {
    const auto sv = transform_vertex(camera.view_proj, screen, c, {});
    if (!sv) return std::nullopt;
    b.min_x = std::min(b.min_x, sv->x);
    b.min_y = std::min(b.min_y, sv->y);
    b.max_x = std::max(b.max_x, sv->x);
    b.max_y = std::max(b.max_y, sv->y);
  }
  return b;
}

SplitAxis choose_split_axis(const BezierPatch& p, const Camera& camera, Screen screen) {
  std::array<double, 16> xs{}, ys{};
  for (int k = 0; k < 16; ++k) {
    const Vec4 clip = camera.view_proj.transform(p.cp[k]);
    const double w = clip.w > kNearCullW ? clip.w : kNearCullW;
    xs[k] = clip.x / w * 0.5 * screen.width;
    ys[k] = clip.y / w * 0.5 * screen.height;
  }
  auto leg = [&](int a, int b) { return std::hypot(xs[b] - xs[a], ys[b] - ys[a]); };
  double u_len = 0, v_len = 0;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 3; ++c) {
      u_len += leg(r * 4 + c, r * 4 + c + 1);
      v_len += leg(c * 4 + r, (c + 1) * 4 + r);
    }
  return u_len >= v_len ? SplitAxis::U : SplitAxis::V;
}

SplitDecision decide_split(const BezierPatch& p, const Camera& camera, Screen screen, const ReyesParams& params) {
  const auto bounds = patch_screen_bounds(p, camera, screen);
  if (!bounds) return SplitDecision::Cull;
  if (bounds->max_x < 0 || bounds->max_y < 0 || bounds->min_x > screen.width || bounds->min_y > screen.height)
    return SplitDecision::Cull;
  if (bounds->extent() <= params.split_threshold) return SplitDecision::Dice;
  return p.depth < params.max_split_depth ? SplitDecision::Split : SplitDecision::ForcedDice;
}

int dice_resolution(const ScreenBounds& bounds, double rate) {
  const double n = std::ceil(bounds.extent() / rate);
  if (!(n >= 1)) return 1;
  return static_cast<int>(std::min<double>(n, kMaxDiceResolution));
}

std::optional<ScreenVertex> dice_point(const BezierPatch& p, int i, int j, int n, const Camera& camera, Screen screen) {
  const double u = static_cast<double>(i) / n;
  const double v = static_cast<double>(j) / n;
  const Vec3 pos = evaluate_patch(p.cp, u, v);
  Vec3 nrm = cross(patch_du(p.cp, u, v), patch_dv(p.cp, u, v));
  if (length(nrm) < 1e-12) {
    // Collapsed edge (e.g. the teapot lid apex); sample just inside the patch.
    const double ui = std::clamp(u, 0.01, 0.99);
    const double vi = std::clamp(v, 0.01, 0.99);
    nrm = cross(patch_du(p.cp, ui, vi), patch_dv(p.cp, ui, vi));
    if (length(nrm) < 1e-12) nrm = {0, 0, 1};
  }
  if (dot(nrm, camera.eye - pos) < 0) nrm = nrm * -1.0;
  return transform_vertex(camera.view_proj, screen, pos, nrm);
}

Micropolygon assemble_micropolygon(const std::array<ScreenVertex, 4>& corners, std::uint64_t id, std::uint32_t sub) {
  Micropolygon mp;
  for (int k = 0; k < 4; ++k) mp.corners[k] = {corners[k].x, corners[k].y};
  mp.depth = static_cast<float>((corners[0].z + corners[1].z + corners[2].z + corners[3].z) * 0.25);
  mp.normal = to_float(normalize(corners[0].normal + corners[1].normal + corners[2].normal + corners[3].normal));
  mp.id = id;
  mp.sub = sub;
  return mp;
}

namespace {

struct DiceGrid {
  int n = 0;
  std::vector<std::optional<ScreenVertex>> points;  // (n+1)^2, row-major in j
};

DiceGrid evaluate_grid(const BezierPatch& p, int n, const Camera& camera, Screen screen) {
  DiceGrid g{n, std::vector<std::optional<ScreenVertex>>(static_cast<std::size_t>(n + 1) * (n + 1))};
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i) g.points[j * (n + 1) + i] = dice_point(p, i, j, n, camera, screen);
  return g;
}

double largest_cell(const DiceGrid& g) {
  const int stride = g.n + 1;
  double worst = 0;
  for (int j = 0; j < g.n; ++j)
    for (int i = 0; i < g.n; ++i) {
      const auto& a = g.points[j * stride + i];
      const auto& b = g.points[j * stride + i + 1];
      const auto& c = g.points[(j + 1) * stride + i + 1];
      const auto& d = g.points[(j + 1) * stride + i];
      if (!a || !b || !c || !d) continue;
      const double x0 = std::min({a->x, b->x, c->x, d->x}), x1 = std::max({a->x, b->x, c->x, d->x});
      const double y0 = std::min({a->y, b->y, c->y, d->y}), y1 = std::max({a->y, b->y, c->y, d->y});
      worst = std::max({worst, x1 - x0, y1 - y0});
    }
  return worst;
}

// nullopt when the patch has no projected bound.
std::optional<DiceGrid> refined_grid(const BezierPatch& p, const Camera& camera, Screen screen, double rate) {
  const auto bounds = patch_screen_bounds(p, camera, screen);
  if (!bounds) return std::nullopt;
  DiceGrid g = evaluate_grid(p, dice_resolution(*bounds, rate), camera, screen);
  // Each round aims the largest cell at `rate`; the loop guard is the looser bound.
  while (g.n < kMaxDiceResolution) {
    const double worst = largest_cell(g);
    if (!(worst > rate * (1 + kDiceTolerance))) break;
    const double want = std::ceil(g.n * worst / rate);
    const int next = static_cast<int>(std::min<double>(std::max<double>(want, g.n + 1), kMaxDiceResolution));
    g = evaluate_grid(p, next, camera, screen);
  }
  return g;
}

}  // namespace

int dice_resolution(const BezierPatch& p, const Camera& camera, Screen screen, double rate) {
  const auto g = refined_grid(p, camera, screen, rate);
  return g ? g->n : 0;
}

std::vector<Micropolygon> dice_patch(const BezierPatch& p, const Camera& camera, Screen screen, double rate) {
  std::vector<Micropolygon> out;
  const auto grid = refined_grid(p, camera, screen, rate);
  if (!grid) return out;
  const int n = grid->n;
  const int stride = n + 1;
  const auto& pts = grid->points;
  out.reserve(static_cast<std::size_t>(n) * n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const auto& a = pts[j * stride + i];
      const auto& b = pts[j * stride + i + 1];
      const auto& c = pts[(j + 1) * stride + i + 1];
      const auto& d = pts[(j + 1) * stride + i];
      if (!a || !b || !c || !d) continue;
      out.push_back(assemble_micropolygon({*a, *b, *c, *d}, p.node_id, static_cast<std::uint32_t>(j * n + i)));
    }
  return out;
}

double micropolygon_extent(const Micropolygon& mp) {
  double x0 = mp.corners[0].x, x1 = x0, y0 = mp.corners[0].y, y1 = y0;
  for (const auto& c : mp.corners) {
    x0 = std::min(x0, c.x);
    x1 = std::max(x1, c.x);
    y0 = std::min(y0, c.y);
    y1 = std::max(y1, c.y);
  }
  return std::max(x1 - x0, y1 - y0);
}

}  // namespace binpipe
