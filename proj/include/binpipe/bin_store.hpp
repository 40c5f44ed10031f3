#pragma once

#include <atomic>
#include <cstdint>
#include <vector>

#include "binpipe/primitives.hpp"

namespace binpipe {

// Per-stage bins. Workers append into private shards while a kernel runs;
// seal() publishes the shards into the bins and is called only between
// kernel launches, so no append is ever lost and post-seal reads see every
// append. Within a bin, shard contents land in ascending worker order.
class BinStore {
 public:
  BinStore(PrimitiveType type, int bins, int workers);

  PrimitiveType type() const { return type_; }
  int bin_count() const { return static_cast<int>(bins_.size()); }

  void append(int worker, int bin, Primitive&& p);
  void seal();

  // Moves the bin's sealed contents out, leaving it empty.
  PrimitiveList take(int bin);
  std::size_t size(int bin) const { return binpipe::size(bins_[bin]); }
  std::size_t total() const { return total_.load(); }
  bool empty() const { return total_ == 0; }
  std::vector<int> non_empty_bins() const;
  std::uint64_t appended() const { return appended_; }  // since construction

 private:
  struct Shard {
    std::vector<PrimitiveList> bins;
    std::vector<int> dirty;
    std::vector<bool> is_dirty;
  };

  PrimitiveType type_;
  std::vector<PrimitiveList> bins_;
  std::vector<Shard> shards_;
  std::atomic<std::size_t> total_ = 0;  // take() runs concurrently on distinct bins
  std::uint64_t appended_ = 0;
};

}  // namespace binpipe
