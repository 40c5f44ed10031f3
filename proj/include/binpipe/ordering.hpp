#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "binpipe/skeleton.hpp"

namespace binpipe {

enum class EntryKind { LaunchStage, LoopUntilEmpty, DepthFirstGroup };
std::string to_string(EntryKind k);

struct ScheduleEntry {
  EntryKind kind = EntryKind::LaunchStage;
  std::vector<int> stages;
  friend bool operator==(const ScheduleEntry&, const ScheduleEntry&) = default;
};

struct StageSchedule {
  std::vector<ScheduleEntry> entries;
  int entry_of(int stage) const;  // -1 if absent
  friend bool operator==(const StageSchedule&, const StageSchedule&) = default;
};

class OrderingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Throws OrderingError when EndStage constraints can never be satisfied.
StageSchedule order_stages(const PipelineSkeleton& sk);

struct Launch {
  int position = 0;       // index into the group
  std::vector<int> bins;  // ascending
  friend bool operator==(const Launch&, const Launch&) = default;
};

struct DepthFirstPlan {
  std::vector<Launch> sweep;   // per leading bin, the chain over overlapping bins
  std::vector<Launch> resume;  // stages >= 1 over every bin, after the sweep
};

// grids[k] is the grid of group member k; blocking[k] stops a bin's chain
// before member k (it then runs only in the resume pass).
DepthFirstPlan depth_first_plan(const std::vector<BinGrid>& grids, const std::vector<bool>& blocking);

struct ReadinessRule {
  std::vector<int> wait_for;             // producers that must have completed
  std::vector<int> loop_back_producers;  // producers inside a cycle with the stage
  bool governed_by_loop = false;         // the stage itself repeats until empty
};

ReadinessRule multi_cycle_gate(const PipelineSkeleton& sk, int stage);

std::string describe(const StageSchedule& schedule, const PipelineSkeleton& sk);

}  // namespace binpipe
