#include "binpipe/scenes.hpp"

#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>
#include <vector>

#include <fmt/format.h>

#include "binpipe/bezier.hpp"

namespace binpipe {

Camera make_camera(const CameraSpec& spec, Screen screen) {
  const double aspect = static_cast<double>(screen.width) / static_cast<double>(screen.height);
  const double fovy = spec.fovy_degrees * std::numbers::pi / 180.0;
  return {perspective(fovy, aspect, spec.z_near, spec.z_far) * look_at(spec.eye, spec.center, spec.up), spec.eye};
}

Camera Scene::camera_for(Screen screen) const { return camera ? make_camera(*camera, screen) : default_camera(screen); }

Scene quad_scene() {
  const Vec3 n{0, 0, 1};
  const Vertex a{{-4, -4, 0}, n}, b{{4, -4, 0}, n}, c{{4, 4, 0}, n}, d{{-4, 4, 0}, n};
  Scene s;
  s.name = "quad";
  s.primitives = std::vector<MeshTriangle>{{{a, b, c}, 0}, {{a, c, d}, 1}};
  return s;
}

namespace {

// World point seen at pixel (px, py) at view distance d under the default
// camera (eye on +z looking at the origin, 45 degree fovy).
Vec3 unproject_default(Screen screen, double px, double py, double d) {
  const double aspect = static_cast<double>(screen.width) / static_cast<double>(screen.height);
  const double t = std::tan(std::numbers::pi / 8);
  const double ndc_x = px / screen.width * 2 - 1;
  const double ndc_y = 1 - py / screen.height * 2;
  return {ndc_x * d * t * aspect, ndc_y * d * t, 3 - d};
}

struct SizeBand {
  double weight, lo, hi;
};

Scene soup(std::string name, Screen screen, std::size_t count, std::uint64_t seed, const std::vector<SizeBand>& bands) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> weights;
  for (const auto& b : bands) weights.push_back(b.weight);
  std::discrete_distribution<int> pick(weights.begin(), weights.end());

  std::vector<MeshTriangle> tris;
  tris.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const SizeBand& band = bands[static_cast<std::size_t>(pick(rng))];
    const double size = band.lo + (band.hi - band.lo) * unit(rng);
    // Centers may sit slightly off screen so edge bins see partial triangles.
    const double cx = -0.05 * screen.width + 1.1 * screen.width * unit(rng);
    const double cy = -0.05 * screen.height + 1.1 * screen.height * unit(rng);
    const double depth = 2.0 + 2.0 * unit(rng);
    const double phase = 2 * std::numbers::pi * unit(rng);
    MeshTriangle t;
    t.id = i;
    for (int k = 0; k < 3; ++k) {
      const double angle = phase + k * 2 * std::numbers::pi / 3 + 0.6 * (unit(rng) - 0.5);
      const double r = 0.5 * size * (0.6 + 0.4 * unit(rng));
      const double d = depth + 0.05 * (unit(rng) - 0.5);
      t.v[k].position = unproject_default(screen, cx + r * std::cos(angle), cy + r * std::sin(angle), d);
      t.v[k].normal = normalize({unit(rng) * 2 - 1, unit(rng) * 2 - 1, 0.3 + unit(rng)});
    }
    tris.push_back(t);
  }
  Scene s;
  s.name = std::move(name);
  s.primitives = std::move(tris);
  return s;
}

std::uint64_t index_root(std::size_t i) { return root_node_id(static_cast<std::uint64_t>(i)); }

}  // namespace

Scene mixed_soup(Screen screen, std::size_t count, std::uint64_t seed) {
  return soup("mixed", screen, count, seed, {{0.80, 1, 8}, {0.19, 8, 48}, {0.01, 64, 200}});
}

Scene small_soup(Screen screen, std::size_t count, std::uint64_t seed) {
  return soup("small", screen, count, seed, {{1.0, 1, 6}});
}

Scene patch_array(int nx, int ny) {
  if (nx <= 0 || ny <= 0) throw std::invalid_argument("patch array needs positive dimensions");
  const double span = 2.4;  // world units covered by the whole array
  const double w = span / nx, h = span / ny;
  std::vector<BezierPatch> patches;
  for (int py = 0; py < ny; ++py)
    for (int px = 0; px < nx; ++px) {
      BezierPatch p;
      for (int j = 0; j < 4; ++j)
        for (int i = 0; i < 4; ++i) {
          const double x = -span / 2 + (px + i / 3.0) * w;
          const double y = -span / 2 + (py + j / 3.0) * h;
          // Interior bumps alternate in sign per patch.
          const bool inner = (i == 1 || i == 2) && (j == 1 || j == 2);
          const double z = inner ? (((px + py) & 1) ? 0.35 : -0.25) : 0.0;
          p.cp[j * 4 + i] = {x, y, z};
        }
      p.node_id = index_root(patches.size());
      patches.push_back(p);
    }
  Scene s;
  s.name = fmt::format("patches{}x{}", nx, ny);
  s.primitives = std::move(patches);
  return s;
}

Scene load_patches(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(fmt::format("cannot open patch file '{}'", path));
  std::vector<Vec3> points;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    Vec3 p;
    std::string extra;
    if (!(ls >> p.x >> p.y >> p.z) || (ls >> extra))
      throw std::runtime_error(fmt::format("{}:{}: expected 'x y z'", path, line_no));
    points.push_back(p);
  }
  if (points.empty() || points.size() % 16 != 0)
    throw std::runtime_error(fmt::format("{}: {} control points is not a positive multiple of 16", path, points.size()));
  std::vector<BezierPatch> patches(points.size() / 16);
  for (std::size_t k = 0; k < patches.size(); ++k) {
    for (int c = 0; c < 16; ++c) patches[k].cp[c] = points[k * 16 + c];
    patches[k].node_id = index_root(k);
  }
  Scene s;
  s.name = path;
  s.primitives = std::move(patches);
  return s;
}

Scene teapot_scene() {
  Scene s = load_patches(std::string(BINPIPE_DATA_DIR) + "/teapot.patches");
  s.name = "teapot";
  s.camera = CameraSpec{{6.5, -8.5, 6.0}, {0.25, 0, 1.4}, {0, 0, 1}, 32, 0.5, 100};
  return s;
}

Scene load_obj(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(fmt::format("cannot open OBJ file '{}'", path));
  std::vector<Vec3> positions, normals;
  std::vector<MeshTriangle> tris;
  std::string line;
  int line_no = 0;

  auto resolve = [&](long idx, std::size_t n, const char* what) -> std::size_t {
    const long r = idx > 0 ? idx - 1 : static_cast<long>(n) + idx;
    if (idx == 0 || r < 0 || r >= static_cast<long>(n))
      throw std::runtime_error(fmt::format("{}:{}: {} index {} out of range", path, line_no, what, idx));
    return static_cast<std::size_t>(r);
  };

  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag) || tag[0] == '#') continue;
    if (tag == "v" || tag == "vn") {
      Vec3 p;
      if (!(ls >> p.x >> p.y >> p.z)) throw std::runtime_error(fmt::format("{}:{}: bad '{}'", path, line_no, tag));
      (tag == "v" ? positions : normals).push_back(p);
    } else if (tag == "f") {
      struct Ref {
        std::size_t v;
        std::optional<std::size_t> n;
      };
      std::vector<Ref> refs;
      std::string tok;
      while (ls >> tok) {
        Ref r{};
        const auto s1 = tok.find('/');
        r.v = resolve(std::stol(tok.substr(0, s1)), positions.size(), "vertex");
        if (s1 != std::string::npos) {
          const auto s2 = tok.find('/', s1 + 1);
          if (s2 != std::string::npos && s2 + 1 < tok.size())
            r.n = resolve(std::stol(tok.substr(s2 + 1)), normals.size(), "normal");
        }
        refs.push_back(r);
      }
      if (refs.size() < 3) throw std::runtime_error(fmt::format("{}:{}: face needs 3 vertices", path, line_no));
      for (std::size_t k = 1; k + 1 < refs.size(); ++k) {
        const std::array<Ref, 3> f = {refs[0], refs[k], refs[k + 1]};
        const Vec3 face = normalize(cross(positions[f[1].v] - positions[f[0].v], positions[f[2].v] - positions[f[0].v]));
        MeshTriangle t;
        t.id = tris.size();
        for (int c = 0; c < 3; ++c) {
          t.v[c].position = positions[f[c].v];
          t.v[c].normal = f[c].n ? normals[*f[c].n] : face;
        }
        tris.push_back(t);
      }
    }
  }
  Scene s;
  s.name = path;
  s.primitives = std::move(tris);
  return s;
}

Scene load_scene_file(const std::string& path) {
  if (path.ends_with(".obj")) return load_obj(path);
  if (path.ends_with(".patches") || path.ends_with(".txt")) return load_patches(path);
  throw std::runtime_error(fmt::format("unrecognised scene file extension: '{}'", path));
}

Scene procedural_scene(const std::string& spec, Screen screen) {
  std::vector<std::string> parts;
  std::stringstream ss(spec);
  for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
  if (parts.empty()) throw std::invalid_argument("empty scene spec");
  auto num = [&](std::size_t i, std::uint64_t fallback) -> std::uint64_t {
    if (i >= parts.size()) return fallback;
    try {
      return std::stoull(parts[i]);
    } catch (const std::exception&) {
      throw std::invalid_argument(fmt::format("bad number '{}' in scene spec '{}'", parts[i], spec));
    }
  };
  const std::string& kind = parts[0];
  if (kind == "quad" && parts.size() == 1) return quad_scene();
  if (kind == "teapot" && parts.size() == 1) return teapot_scene();
  if (kind == "mixed" && parts.size() <= 3) return mixed_soup(screen, num(1, 10000), num(2, 1));
  if (kind == "small" && parts.size() <= 3) return small_soup(screen, num(1, 100000), num(2, 2));
  if (kind == "patches" && parts.size() <= 2) {
    int nx = 4, ny = 4;
    if (parts.size() == 2 && std::sscanf(parts[1].c_str(), "%dx%d", &nx, &ny) != 2)
      throw std::invalid_argument(fmt::format("bad patch array size in '{}'", spec));
    return patch_array(nx, ny);
  }
  throw std::invalid_argument(fmt::format("unknown scene spec '{}'", spec));
}

}  // namespace binpipe
