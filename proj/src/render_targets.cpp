#include "binpipe/render_targets.hpp"

#include <thread>

namespace binpipe {

RecordBuffer::Lock::Lock(std::atomic_flag* f) : flag(f) {
  while (flag->test_and_set(std::memory_order_acquire)) {
    while (flag->test(std::memory_order_relaxed)) std::this_thread::yield();
  }
}

RecordBuffer::Lock::~Lock() { flag->clear(std::memory_order_release); }

RecordBuffer::RecordBuffer(Screen screen)
    : screen_(screen),
      records_(static_cast<std::size_t>(screen.width) * screen.height),
      locks_(new std::atomic_flag[static_cast<std::size_t>(screen.width) * screen.height]) {}

bool RecordBuffer::merge(int x, int y, const DepthKey& key, Vec3f payload) {
  const std::size_t i = static_cast<std::size_t>(y) * screen_.width + x;
  Lock lock(&locks_[i]);
  Record& r = records_[i];
  if (key < r.key) {
    r.key = key;
    r.payload = payload;
    return true;
  }
  return r.key == key;
}

Record RecordBuffer::get(int x, int y) const {
  const std::size_t i = static_cast<std::size_t>(y) * screen_.width + x;
  Lock lock(&locks_[i]);
  return records_[i];
}

void RecordBuffer::reset() {
  for (auto& r : records_) r = Record{};
}

Framebuffer RenderTargets::composite() const {
  Framebuffer fb(screen.width, screen.height, background);
  for (int y = 0; y < screen.height; ++y)
    for (int x = 0; x < screen.width; ++x) {
      const Record r = color.get(x, y);
      if (!r.key.empty()) fb.at(x, y) = r.payload;
    }
  return fb;
}

}  // namespace binpipe
