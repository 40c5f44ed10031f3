#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace binpipe {

// Occupancy bucket k counts launched bins holding [2^k, 2^(k+1)) primitives.
inline constexpr int kOccupancyBuckets = 24;

struct KernelStats {
  std::string name;
  std::string dispatch;
  double ms = 0;
  std::uint64_t launches = 0;  // kernel invocations (loop iterations, depth-first sweeps)
  std::uint64_t units = 0;     // work units dispatched
};

struct StageStats {
  std::string name;
  int threads_per_bin = 1;
  std::uint64_t received = 0;   // appended to its bins or delivered by a fused call
  std::uint64_t processed = 0;  // handed to its Process phase
  std::uint64_t emitted = 0;
  std::uint64_t max_bin = 0;
  std::array<std::uint64_t, kOccupancyBuckets> occupancy{};
};

struct EdgeTraffic {
  std::string producer;
  int channel = 0;
  std::string consumer;
  bool fused = false;
  std::uint64_t stored = 0;  // primitives written to the consumer's bin store
  std::uint64_t direct = 0;  // primitives handed over inside a fused kernel
};

struct LoopStats {
  std::vector<std::string> stages;
  int max_iterations = 0;  // over strip-mined batches
  std::uint64_t total_iterations = 0;
};

struct RunStats {
  int workers = 1;
  std::uint64_t batches = 0;
  std::uint64_t input_primitives = 0;
  std::vector<KernelStats> kernels;
  std::vector<StageStats> stages;
  std::vector<EdgeTraffic> traffic;
  std::vector<LoopStats> loops;
  std::uint64_t units_generated = 0;
  std::uint64_t units_completed = 0;
  std::uint64_t units_not_exactly_once = 0;
  std::uint64_t lost_primitives = 0;
  double total_ms = 0;

  bool exactly_once() const { return units_not_exactly_once == 0 && units_generated == units_completed; }
  std::uint64_t stored_traffic() const;
  const StageStats* stage(const std::string& name) const;
  nlohmann::json to_json() const;
};

int occupancy_bucket(std::uint64_t count);

}  // namespace binpipe
