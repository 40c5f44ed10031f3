#pragma once

#include <cstddef>
#include <memory>
#include <stdexcept>
#include <utility>
#include <vector>

#include "binpipe/graph.hpp"
#include "binpipe/phases.hpp"
#include "binpipe/render_targets.hpp"
#include "binpipe/run_stats.hpp"
#include "binpipe/synthesis.hpp"
#include "binpipe/worker_pool.hpp"

namespace binpipe {

struct RuntimeConfig {
  int workers = 1;
  int cycle_cap = 32;              // LoopUntilEmpty iterations per batch
  std::size_t strip_mine = 65536;  // input batch size; 0 = one batch
};

class RuntimeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunResult {
  Framebuffer image;
  RunStats stats;
  std::shared_ptr<RenderTargets> targets;
};

// `graph` must be the graph `mapping` was synthesized from (stage indices
// agree). When `pool` is given its size overrides config.workers.
RunResult execute(const PipelineGraph& graph, const KernelMapping& mapping, const PrimitiveList& input,
                  const RenderParams& params, const RuntimeConfig& config, WorkerPool* pool = nullptr);

// Bins each worker owns under a static dispatch, in processing order.
// PreScheduledMap: bin mod workers. SerializeToOne: everything on worker 0.
std::vector<std::vector<int>> prescheduled_assignment(const std::vector<int>& bins, int workers, Dispatch dispatch);

// [begin, end) chunks of at most `split` consecutive primitives; split == 0
// divides the bin evenly across `workers`.
std::vector<std::pair<std::size_t, std::size_t>> split_chunks(std::size_t count, int split, int workers);

}  // namespace binpipe
