#include "binpipe/ordering.hpp"

#include <algorithm>
#include <sstream>

#include <fmt/format.h>

namespace binpipe {

std::string to_string(EntryKind k) {
  switch (k) {
    case EntryKind::LaunchStage: return "Launch";
    case EntryKind::LoopUntilEmpty: return "LoopUntilEmpty";
    case EntryKind::DepthFirstGroup: return "DepthFirstGroup";
  }
  return "?";
}

int StageSchedule::entry_of(int stage) const {
  for (int i = 0; i < static_cast<int>(entries.size()); ++i)
    if (std::find(entries[i].stages.begin(), entries[i].stages.end(), stage) != entries[i].stages.end()) return i;
  return -1;
}

namespace {

bool fits_within(const BinConfig& inner, const BinConfig& outer) {
  return inner.bin_width <= outer.bin_width && inner.bin_height <= outer.bin_height;
}

// Groups [lead(All), s1, s2, ...] of consecutive single-linked launches whose
// bins never grow along the chain.
std::vector<ScheduleEntry> form_depth_first_groups(const PipelineSkeleton& sk, std::vector<ScheduleEntry> in) {
  std::vector<ScheduleEntry> out;
  for (std::size_t i = 0; i < in.size();) {
    const ScheduleEntry& e = in[i];
    if (e.kind != EntryKind::LaunchStage || sk.stages[e.stages[0]].schedule.kind != ScheduleKind::All) {
      out.push_back(e);
      ++i;
      continue;
    }
    std::vector<int> group{e.stages[0]};
    std::size_t j = i + 1;
    for (; j < in.size(); ++j) {
      if (in[j].kind != EntryKind::LaunchStage) break;
      const int prev = group.back();
      const int next = in[j].stages[0];
      const auto succ = sk.forward_successors(prev);
      const auto pred = sk.forward_predecessors(next);
      if (succ != std::vector<int>{next} || pred != std::vector<int>{prev}) break;
      if (sk.stages[next].has(DependencyKind::EndStage)) break;
      if (!fits_within(sk.stages[next].bin, sk.stages[prev].bin)) break;
      group.push_back(next);
    }
    if (group.size() >= 2) {
      out.push_back({EntryKind::DepthFirstGroup, group});
    } else {
      out.push_back(e);
    }
    i = i + group.size();
  }
  return out;
}

}  // namespace

StageSchedule order_stages(const PipelineSkeleton& sk) {
  const int n = static_cast<int>(sk.stages.size());
  auto unit_of = [&](int s) -> std::vector<int> {
    if (sk.cycle_of[s] < 0) return {s};
    std::vector<int> members = sk.cycle_sets[sk.cycle_of[s]];
    std::sort(members.begin(), members.end(), [&](int a, int b) {
      if (sk.distance[a] != sk.distance[b]) return sk.distance[a] > sk.distance[b];
      return sk.stages[a].name < sk.stages[b].name;
    });
    return members;
  };

  std::vector<bool> scheduled(n, false);
  auto blockers = [&](const std::vector<int>& unit) {
    std::vector<std::string> why;
    auto inside = [&](int s) { return std::find(unit.begin(), unit.end(), s) != unit.end(); };
    for (int m : unit) {
      for (int p : sk.forward_predecessors(m))
        if (!inside(p) && !scheduled[p]) why.push_back(sk.stages[m].name + " <- " + sk.stages[p].name);
      for (const auto& d : sk.stages[m].dependencies) {
        if (d.kind != DependencyKind::EndStage) continue;
        const int t = sk.index_of(d.target_stage);
        if (t < 0 || inside(t) || !scheduled[t])
          why.push_back(sk.stages[m].name + " EndStage(" + d.target_stage + ")");
      }
    }
    return why;
  };

  std::vector<ScheduleEntry> entries;
  std::vector<std::size_t> pos(sk.branches.size(), 0);
  int remaining = n;
  while (remaining > 0) {
    bool progress = false;
    for (std::size_t b = 0; b < sk.branches.size(); ++b) {
      const auto& stages = sk.branches[b].stages;
      while (pos[b] < stages.size()) {
        const int s = stages[pos[b]];
        if (scheduled[s]) {
          ++pos[b];
          continue;
        }
        const auto unit = unit_of(s);
        if (!blockers(unit).empty()) break;
        const bool loop = sk.cycle_of[s] >= 0;
        entries.push_back({loop ? EntryKind::LoopUntilEmpty : EntryKind::LaunchStage, unit});
        for (int m : unit) scheduled[m] = true;
        remaining -= static_cast<int>(unit.size());
        ++pos[b];
        progress = true;
      }
    }
    if (!progress) {
      std::string msg = "unsatisfiable stage dependencies:";
      for (int s = 0; s < n; ++s)
        if (!scheduled[s])
          for (const auto& why : blockers(unit_of(s))) msg += " [" + why + "]";
      throw OrderingError(msg);
    }
  }
  return {form_depth_first_groups(sk, std::move(entries))};
}

DepthFirstPlan depth_first_plan(const std::vector<BinGrid>& grids, const std::vector<bool>& blocking) {
  DepthFirstPlan plan;
  if (grids.empty()) return plan;
  const BinGrid& lead = grids[0];
  for (int b = 0; b < lead.count(); ++b) {
    plan.sweep.push_back({0, {b}});
    const PixelRange r = lead.rect(b);
    for (std::size_t k = 1; k < grids.size(); ++k) {
      if (blocking[k]) break;
      Launch l{static_cast<int>(k), {}};
      for (int c = 0; c < grids[k].count(); ++c)
        if (ranges_overlap(grids[k].rect(c), r)) l.bins.push_back(c);
      plan.sweep.push_back(std::move(l));
    }
  }
  for (std::size_t k = 1; k < grids.size(); ++k) {
    Launch l{static_cast<int>(k), {}};
    for (int c = 0; c < grids[k].count(); ++c) l.bins.push_back(c);
    plan.resume.push_back(std::move(l));
  }
  return plan;
}

ReadinessRule multi_cycle_gate(const PipelineSkeleton& sk, int stage) {
  ReadinessRule r;
  const int cyc = sk.cycle_of[stage];
  r.governed_by_loop = cyc >= 0;
  for (int p : sk.predecessors[stage]) {
    if (p == stage) continue;
    const bool loop_back = cyc >= 0 && sk.cycle_of[p] == cyc;
    (loop_back ? r.loop_back_producers : r.wait_for).push_back(p);
  }
  return r;
}

std::string describe(const StageSchedule& schedule, const PipelineSkeleton& sk) {
  std::ostringstream os;
  os << "schedule:\n";
  for (const auto& e : schedule.entries) {
    os << "  " << to_string(e.kind);
    if (e.kind == EntryKind::LaunchStage) {
      os << " " << sk.stages[e.stages[0]].name << "\n";
      continue;
    }
    os << " {";
    for (std::size_t k = 0; k < e.stages.size(); ++k) os << (k ? ", " : "") << sk.stages[e.stages[k]].name;
    os << "}\n";
  }
  return os.str();
}

}  // namespace binpipe
