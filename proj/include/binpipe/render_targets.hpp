#pragma once

// Render targets with a commutative per-pixel merge. Each pixel keeps the
// record with the lexicographically smallest (depth, id, sub) key; the result
// is independent of the order in which concurrent writers arrive.

#include <atomic>
#include <compare>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <vector>

#include "binpipe/math.hpp"
#include "binpipe/primitives.hpp"
#include "binpipe/raster.hpp"

namespace binpipe {

struct DepthKey {
  float depth = std::numeric_limits<float>::infinity();
  std::uint64_t id = std::numeric_limits<std::uint64_t>::max();
  std::uint32_t sub = std::numeric_limits<std::uint32_t>::max();

  friend auto operator<=>(const DepthKey&, const DepthKey&) = default;
  bool empty() const { return *this == DepthKey{}; }
};

struct Record {
  DepthKey key;
  Vec3f payload;
};

class RecordBuffer {
 public:
  RecordBuffer() = default;
  explicit RecordBuffer(Screen screen);

  Screen screen() const { return screen_; }

  // Stores (key, payload) iff key is smaller than the current key. Returns true
  // when the pixel holds `key` after the call.
  bool merge(int x, int y, const DepthKey& key, Vec3f payload);

  Record get(int x, int y) const;
  void reset();

 private:
  struct Lock {
    std::atomic_flag* flag;
    explicit Lock(std::atomic_flag* f);
    ~Lock();
  };

  Screen screen_;
  std::vector<Record> records_;
  std::unique_ptr<std::atomic_flag[]> locks_;
};

struct Framebuffer {
  int width = 0;
  int height = 0;
  std::vector<Vec3f> pixels;

  Framebuffer() = default;
  Framebuffer(int w, int h, Vec3f fill) : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, fill) {}

  Vec3f& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
  const Vec3f& at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
  friend bool operator==(const Framebuffer&, const Framebuffer&) = default;
};

inline constexpr Vec3f kBackground{0.05f, 0.05f, 0.08f};

struct RenderTargets {
  Screen screen;
  RecordBuffer depth;    // payload unused
  RecordBuffer gbuffer;  // payload = surface normal
  RecordBuffer color;    // payload = shaded color
  Vec3f background = kBackground;

  explicit RenderTargets(Screen s) : screen(s), depth(s), gbuffer(s), color(s) {}

  // Winning color per pixel, background where nothing was merged.
  Framebuffer composite() const;
};

}  // namespace binpipe
