#pragma once

// Kernel synthesis: phases of consecutive stages are packed into kernels and
// rewritten by a fixed sequence of passes.

#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "binpipe/graph.hpp"
#include "binpipe/ordering.hpp"
#include "binpipe/skeleton.hpp"

namespace binpipe {

enum class PhaseKind { AssignBin, Schedule, Process };

struct PhaseRef {
  int stage = 0;
  PhaseKind phase = PhaseKind::Process;
  friend bool operator==(const PhaseRef&, const PhaseRef&) = default;
};

// RuntimeSchedule: the stage's own Schedule phase still runs inside the kernel.
enum class Dispatch { RuntimeSchedule, HardwareLoadBalance, PreScheduledMap, SerializeToOne, SplitAll };
enum class SyncKind { None, GlobalBarrier, LocalPerBinBarrier };

std::string to_string(PhaseKind k);
std::string to_string(Dispatch d);
std::string to_string(SyncKind s);

inline constexpr const char* kBinModWorkers = "bin_mod_workers";

struct Kernel {
  std::vector<int> stages;  // fused chain; stages[0] owns the dispatched bins
  std::vector<PhaseRef> phases;
  Dispatch dispatch = Dispatch::RuntimeSchedule;
  std::string core_map;     // PreScheduledMap only
  int tile_split_size = 0;  // SplitAll only; 0 splits each bin evenly across workers
  SyncKind entry_sync = SyncKind::None;
  std::vector<SyncKind> fused_sync;  // between stages[k] and stages[k + 1]
  int loop = -1;   // cycle set index
  int group = -1;  // depth-first group (schedule entry index)

  friend bool operator==(const Kernel&, const Kernel&) = default;
};

struct Wiring {
  int producer = 0;
  int channel = 0;
  int consumer = 0;
  bool fused = false;  // delivered by direct call, never stored
  friend bool operator==(const Wiring&, const Wiring&) = default;
};

struct SynthesisReport {
  std::vector<std::string> fused_pairs;
  std::vector<std::string> eliminated_schedules;
  std::vector<std::string> prescheduled;
  std::vector<std::string> barriers;
  friend bool operator==(const SynthesisReport&, const SynthesisReport&) = default;
};

struct KernelMapping {
  PipelineSkeleton skeleton;
  StageSchedule schedule;
  std::vector<PhaseRef> injection;  // phases applied to input primitives
  std::vector<Kernel> kernels;
  std::vector<Wiring> wiring;
  std::vector<std::string> counters;
  SynthesisReport report;

  int kernel_of(int stage) const;  // kernel holding the stage's Process phase
  std::string kernel_name(int k) const;
  friend bool operator==(const KernelMapping&, const KernelMapping&) = default;
};

class SynthesisError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

KernelMapping baseline_mapping(const StageSchedule& schedule, const PipelineSkeleton& sk);
KernelMapping preschedule(KernelMapping m, const PipelineSkeleton& sk);
KernelMapping eliminate_schedule(KernelMapping m, const PipelineSkeleton& sk);
// Throws SynthesisError when an EndStage target does not run before its dependent.
KernelMapping resolve_dependencies(KernelMapping m, const PipelineSkeleton& sk);
KernelMapping fuse(KernelMapping m, const PipelineSkeleton& sk);

// Throws SynthesisError on validation diagnostics, OrderingError from ordering.
KernelMapping synthesize(const PipelineGraph& graph);

std::string describe(const KernelMapping& m);
nlohmann::json report_json(const KernelMapping& m);

}  // namespace binpipe
