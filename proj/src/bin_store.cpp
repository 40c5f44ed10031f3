#include "binpipe/bin_store.hpp"

#include <algorithm>

namespace binpipe {

BinStore::BinStore(PrimitiveType type, int bins, int workers)
    : type_(type), bins_(static_cast<std::size_t>(bins), make_list(type)), shards_(static_cast<std::size_t>(workers)) {
  for (auto& s : shards_) s.is_dirty.assign(static_cast<std::size_t>(bins), false);
}

void BinStore::append(int worker, int bin, Primitive&& p) {
  Shard& s = shards_[worker];
  if (s.bins.empty()) s.bins.assign(bins_.size(), make_list(type_));
  if (!s.is_dirty[bin]) {
    s.is_dirty[bin] = true;
    s.dirty.push_back(bin);
  }
  push(s.bins[bin], std::move(p));
}

void BinStore::seal() {
  for (Shard& s : shards_) {
    for (int b : s.dirty) {
      const std::size_t n = binpipe::size(s.bins[b]);
      total_ += n;
      appended_ += n;
      binpipe::append(bins_[b], std::move(s.bins[b]));
      clear(s.bins[b]);
      s.is_dirty[b] = false;
    }
    s.dirty.clear();
  }
}

PrimitiveList BinStore::take(int bin) {
  PrimitiveList out = make_list(type_);
  std::swap(out, bins_[bin]);
  total_ -= binpipe::size(out);
  return out;
}

std::vector<int> BinStore::non_empty_bins() const {
  std::vector<int> out;
  if (total_ == 0) return out;
  for (int b = 0; b < bin_count(); ++b)
    if (binpipe::size(bins_[b]) > 0) out.push_back(b);
  return out;
}

}  // namespace binpipe
