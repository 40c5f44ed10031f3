#pragma once

// Scene inputs: procedural generators and the two file formats.
//
// OBJ subset: `v x y z`, `vn x y z`, `f a b c ...` with a, a/t, a//n or a/t/n
// references (1-based, negative = relative). Polygons are fanned into
// triangles; faces without normals get the geometric normal. Every other
// statement is ignored.
//
// Patch text: one control point `x y z` per line, 16 consecutive points per
// bicubic patch in row-major order (v outer, u inner). Blank lines and lines
// starting with '#' are skipped.

#include <cstdint>
#include <optional>
#include <string>

#include "binpipe/primitives.hpp"
#include "binpipe/raster.hpp"

namespace binpipe {

struct CameraSpec {
  Vec3 eye{0, 0, 3};
  Vec3 center{0, 0, 0};
  Vec3 up{0, 1, 0};
  double fovy_degrees = 45;
  double z_near = 0.1;
  double z_far = 100;
};

Camera make_camera(const CameraSpec& spec, Screen screen);

struct Scene {
  std::string name;
  PrimitiveList primitives = make_list(PrimitiveType::MeshTriangle);
  std::optional<CameraSpec> camera;  // default_camera when absent

  Camera camera_for(Screen screen) const;
  bool is_patches() const { return type_of(primitives) == PrimitiveType::Patch; }
};

// Two triangles covering the whole default view, normal (0,0,1).
Scene quad_scene();

// Triangles whose projected extent under the default camera follows a size
// mix; deterministic in (count, seed, screen).
Scene mixed_soup(Screen screen, std::size_t count = 10000, std::uint64_t seed = 1);  // 80% 1-8px, 19% 8-48px, 1% 64-200px
Scene small_soup(Screen screen, std::size_t count = 100000, std::uint64_t seed = 2);  // 1-6px

// nx x ny bumpy patches facing the default camera.
Scene patch_array(int nx = 4, int ny = 4);

// The shipped teapot with its own camera.
Scene teapot_scene();

// Throws std::runtime_error on I/O or parse errors.
Scene load_obj(const std::string& path);
Scene load_patches(const std::string& path);
// Dispatches on the extension (.obj, .patches / .txt).
Scene load_scene_file(const std::string& path);

// "quad", "mixed[:N[:SEED]]", "small[:N[:SEED]]", "patches[:NXxNY]", "teapot".
// Throws std::invalid_argument for anything else.
Scene procedural_scene(const std::string& spec, Screen screen);

}  // namespace binpipe
