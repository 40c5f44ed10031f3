#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "binpipe/math.hpp"

namespace binpipe {

struct Vertex {
  Vec3 position;
  Vec3 normal;
};

// Object-space triangle as submitted by a scene.
struct MeshTriangle {
  std::array<Vertex, 3> v;
  std::uint64_t id = 0;
};

struct ScreenVertex {
  double x = 0, y = 0;  // pixels, y down
  double z = 0;         // depth in [0,1]
  double inv_w = 1;     // 1 / clip w, for perspective-correct attributes
  Vec3 normal;
};

// Post-transform triangle.
struct Triangle {
  std::array<ScreenVertex, 3> v;
  std::uint64_t id = 0;
};

struct Fragment {
  std::int32_t x = 0, y = 0;
  float depth = 0;
  Vec3f normal;
  Vec3f color;
  std::uint64_t id = 0;   // primitive id, first depth tie-break
  std::uint32_t sub = 0;  // sub-primitive id (micropolygon cell), second tie-break
};

// Bicubic Bezier patch; control points row-major with v outer and u inner.
struct BezierPatch {
  std::array<Vec3, 16> cp;
  double u0 = 0, u1 = 1, v0 = 0, v1 = 1;
  std::uint32_t depth = 0;    // number of splits applied so far
  std::uint64_t node_id = 0;  // (patch index << 33) | split path with leading 1
};

struct ScreenPoint {
  double x = 0, y = 0;
};

// Flat-shaded quad; depth and normal are constant over the quad.
struct Micropolygon {
  // Corners in grid order: (i,j), (i+1,j), (i+1,j+1), (i,j+1).
  std::array<ScreenPoint, 4> corners;
  Vec3f normal;
  float depth = 0;
  std::uint64_t id = 0;
  std::uint32_t sub = 0;
};

// Minimal spatial primitive for synthetic pipelines and runtime tests.
struct Token {
  std::uint64_t id = 0;
  std::int32_t x = 0, y = 0;
  std::uint32_t hops = 0;
};

enum class PrimitiveType : std::uint8_t { MeshTriangle, Triangle, Fragment, Patch, Micropolygon, Token };

inline constexpr std::size_t kPrimitiveTypeCount = 6;

using Primitive = std::variant<MeshTriangle, Triangle, Fragment, BezierPatch, Micropolygon, Token>;

using PrimitiveList = std::variant<std::vector<MeshTriangle>, std::vector<Triangle>, std::vector<Fragment>,
                                   std::vector<BezierPatch>, std::vector<Micropolygon>, std::vector<Token>>;

template <class T>
struct PrimitiveTypeOf;
template <> struct PrimitiveTypeOf<MeshTriangle> { static constexpr auto value = PrimitiveType::MeshTriangle; };
template <> struct PrimitiveTypeOf<Triangle> { static constexpr auto value = PrimitiveType::Triangle; };
template <> struct PrimitiveTypeOf<Fragment> { static constexpr auto value = PrimitiveType::Fragment; };
template <> struct PrimitiveTypeOf<BezierPatch> { static constexpr auto value = PrimitiveType::Patch; };
template <> struct PrimitiveTypeOf<Micropolygon> { static constexpr auto value = PrimitiveType::Micropolygon; };
template <> struct PrimitiveTypeOf<Token> { static constexpr auto value = PrimitiveType::Token; };

inline PrimitiveType type_of(const Primitive& p) { return static_cast<PrimitiveType>(p.index()); }
inline PrimitiveType type_of(const PrimitiveList& l) { return static_cast<PrimitiveType>(l.index()); }

std::string_view to_string(PrimitiveType t);
std::optional<PrimitiveType> parse_primitive_type(std::string_view s);

PrimitiveList make_list(PrimitiveType t);
std::size_t size(const PrimitiveList& l);
void clear(PrimitiveList& l);

// Throws std::invalid_argument when the primitive's type differs from the list's.
void push(PrimitiveList& l, Primitive&& p);
void append(PrimitiveList& dst, PrimitiveList&& src);
Primitive element(const PrimitiveList& l, std::size_t i);

}  // namespace binpipe
