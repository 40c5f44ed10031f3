#include "binpipe/run_stats.hpp"

#include <algorithm>
#include <bit>

namespace binpipe {

int occupancy_bucket(std::uint64_t count) {
  if (count == 0) return 0;
  return std::min(static_cast<int>(std::bit_width(count)) - 1, kOccupancyBuckets - 1);
}

std::uint64_t RunStats::stored_traffic() const {
  std::uint64_t t = 0;
  for (const auto& e : traffic) t += e.stored;
  return t;
}

const StageStats* RunStats::stage(const std::string& name) const {
  for (const auto& s : stages)
    if (s.name == name) return &s;
  return nullptr;
}

nlohmann::json RunStats::to_json() const {
  using nlohmann::json;
  json kernels_j = json::array();
  for (const auto& k : kernels)
    kernels_j.push_back({{"name", k.name}, {"dispatch", k.dispatch}, {"ms", k.ms}, {"launches", k.launches},
                         {"units", k.units}});
  json stages_j = json::array();
  for (const auto& s : stages) {
    // Trailing empty buckets are dropped.
    std::size_t used = s.occupancy.size();
    while (used > 0 && s.occupancy[used - 1] == 0) --used;
    stages_j.push_back({{"name", s.name},
                        {"threads_per_bin", s.threads_per_bin},
                        {"received", s.received},
                        {"processed", s.processed},
                        {"emitted", s.emitted},
                        {"max_bin", s.max_bin},
                        {"occupancy_log2", std::vector<std::uint64_t>(s.occupancy.begin(), s.occupancy.begin() + used)}});
  }
  json traffic_j = json::array();
  for (const auto& e : traffic)
    traffic_j.push_back({{"producer", e.producer}, {"channel", e.channel}, {"consumer", e.consumer},
                         {"fused", e.fused}, {"stored", e.stored}, {"direct", e.direct}});
  json loops_j = json::array();
  for (const auto& l : loops)
    loops_j.push_back({{"stages", l.stages}, {"max_iterations", l.max_iterations},
                       {"total_iterations", l.total_iterations}});
  return {{"workers", workers},
          {"batches", batches},
          {"input_primitives", input_primitives},
          {"total_ms", total_ms},
          {"kernels", kernels_j},
          {"stages", stages_j},
          {"traffic", traffic_j},
          {"stored_traffic_total", stored_traffic()},
          {"loops", loops_j},
          {"units_generated", units_generated},
          {"units_completed", units_completed},
          {"units_not_exactly_once", units_not_exactly_once},
          {"exactly_once", exactly_once()},
          {"lost_primitives", lost_primitives}};
}

}  // namespace binpipe
