#include "binpipe/synthesis.hpp"

#include <algorithm>
#include <sstream>

#include <fmt/format.h>

namespace binpipe {

std::string to_string(PhaseKind k) {
  switch (k) {
    case PhaseKind::AssignBin: return "AssignBin";
    case PhaseKind::Schedule: return "Schedule";
    case PhaseKind::Process: return "Process";
  }
  return "?";
}

std::string to_string(Dispatch d) {
  switch (d) {
    case Dispatch::RuntimeSchedule: return "RuntimeSchedule";
    case Dispatch::HardwareLoadBalance: return "HardwareLoadBalance";
    case Dispatch::PreScheduledMap: return "PreScheduledMap";
    case Dispatch::SerializeToOne: return "SerializeToOne";
    case Dispatch::SplitAll: return "SplitAll";
  }
  return "?";
}

std::string to_string(SyncKind s) {
  switch (s) {
    case SyncKind::None: return "None";
    case SyncKind::GlobalBarrier: return "GlobalBarrier";
    case SyncKind::LocalPerBinBarrier: return "LocalPerBinBarrier";
  }
  return "?";
}

int KernelMapping::kernel_of(int stage) const {
  for (int k = 0; k < static_cast<int>(kernels.size()); ++k)
    if (std::find(kernels[k].stages.begin(), kernels[k].stages.end(), stage) != kernels[k].stages.end()) return k;
  return -1;
}

std::string KernelMapping::kernel_name(int k) const {
  std::string name;
  for (int s : kernels.at(k).stages) name += (name.empty() ? "" : "+") + skeleton.stages[s].name;
  return name;
}

namespace {

bool contains(const std::vector<PhaseRef>& phases, PhaseRef p) {
  return std::find(phases.begin(), phases.end(), p) != phases.end();
}

void erase_phase(std::vector<PhaseRef>& phases, PhaseRef p) {
  phases.erase(std::remove(phases.begin(), phases.end(), p), phases.end());
}

// Puts Schedule(s) right after AssignBin(s) when the latter is present.
void hoist_schedule(std::vector<PhaseRef>& phases, int s) {
  const PhaseRef assign{s, PhaseKind::AssignBin};
  const PhaseRef sched{s, PhaseKind::Schedule};
  auto it = std::find(phases.begin(), phases.end(), assign);
  if (it == phases.end() || contains(phases, sched)) return;
  phases.insert(it + 1, sched);
}

void add_unique(std::vector<std::string>& v, const std::string& s) {
  if (std::find(v.begin(), v.end(), s) == v.end()) v.push_back(s);
}

void refresh_counters(KernelMapping& m) {
  m.counters.clear();
  for (const Wiring& w : m.wiring)
    if (!w.fused)
      m.counters.push_back(fmt::format("{}:{}->{}", m.skeleton.stages[w.producer].name, w.channel,
                                       m.skeleton.stages[w.consumer].name));
}

}  // namespace

KernelMapping baseline_mapping(const StageSchedule& schedule, const PipelineSkeleton& sk) {
  KernelMapping m;
  m.skeleton = sk;
  m.schedule = schedule;
  for (int s : sk.sources) m.injection.push_back({s, PhaseKind::AssignBin});
  for (int e = 0; e < static_cast<int>(schedule.entries.size()); ++e) {
    const ScheduleEntry& entry = schedule.entries[e];
    for (int s : entry.stages) {
      Kernel k;
      k.stages = {s};
      k.phases = {{s, PhaseKind::Schedule}, {s, PhaseKind::Process}};
      for (int c : sk.successors[s]) k.phases.push_back({c, PhaseKind::AssignBin});
      if (entry.kind == EntryKind::LoopUntilEmpty) k.loop = sk.cycle_of[s];
      if (entry.kind == EntryKind::DepthFirstGroup) k.group = e;
      m.kernels.push_back(std::move(k));
    }
  }
  for (const auto& e : sk.edges) m.wiring.push_back({e.producer, e.channel, e.consumer, false});
  refresh_counters(m);
  return m;
}

KernelMapping preschedule(KernelMapping m, const PipelineSkeleton& sk) {
  for (int s = 0; s < static_cast<int>(sk.stages.size()); ++s) {
    const ScheduleDirective& d = sk.stages[s].schedule;
    if (d.kind == ScheduleKind::LoadBalance) continue;
    const int k = m.kernel_of(s);
    if (k < 0) continue;
    Kernel& own = m.kernels[k];
    erase_phase(own.phases, {s, PhaseKind::Schedule});
    if (own.stages[0] == s) {
      switch (d.kind) {
        case ScheduleKind::DirectMap:
          own.dispatch = Dispatch::PreScheduledMap;
          own.core_map = kBinModWorkers;
          break;
        case ScheduleKind::Serialize: own.dispatch = Dispatch::SerializeToOne; break;
        case ScheduleKind::All:
          own.dispatch = Dispatch::SplitAll;
          own.tile_split_size = d.tile_split_size.value_or(0);
          break;
        case ScheduleKind::LoadBalance: break;
      }
    }
    for (Kernel& other : m.kernels) hoist_schedule(other.phases, s);
    hoist_schedule(m.injection, s);
    add_unique(m.report.prescheduled, sk.stages[s].name);
  }
  return m;
}

KernelMapping eliminate_schedule(KernelMapping m, const PipelineSkeleton& sk) {
  for (int s = 0; s < static_cast<int>(sk.stages.size()); ++s) {
    if (sk.stages[s].schedule.kind != ScheduleKind::LoadBalance) continue;
    const int k = m.kernel_of(s);
    if (k < 0) continue;
    erase_phase(m.kernels[k].phases, {s, PhaseKind::Schedule});
    if (m.kernels[k].stages[0] == s) m.kernels[k].dispatch = Dispatch::HardwareLoadBalance;
    add_unique(m.report.eliminated_schedules, sk.stages[s].name);
  }
  return m;
}

KernelMapping resolve_dependencies(KernelMapping m, const PipelineSkeleton& sk) {
  for (int k = 0; k < static_cast<int>(m.kernels.size()); ++k) {
    Kernel& kernel = m.kernels[k];
    const int s = kernel.stages[0];
    const StageSummary& st = sk.stages[s];
    SyncKind sync = SyncKind::None;
    for (const auto& d : st.dependencies) {
      if (d.kind == DependencyKind::EndStage) {
        const int t = sk.index_of(d.target_stage);
        const int tk = t < 0 ? -1 : m.kernel_of(t);
        if (tk < 0 || tk >= k || (kernel.loop >= 0 && m.kernels[tk].loop == kernel.loop))
          throw SynthesisError(fmt::format("EndStage({}) of '{}' is not scheduled before it", d.target_stage, st.name));
        sync = SyncKind::GlobalBarrier;
      } else if (sync != SyncKind::GlobalBarrier) {
        bool split = kernel.dispatch == Dispatch::SplitAll;
        for (int p : sk.predecessors[s]) {
          const int pk = m.kernel_of(p);
          if (pk >= 0 && m.kernels[pk].dispatch == Dispatch::SplitAll) split = true;
        }
        sync = split ? SyncKind::GlobalBarrier : SyncKind::LocalPerBinBarrier;
      }
    }
    kernel.entry_sync = sync;
    if (sync != SyncKind::None) add_unique(m.report.barriers, st.name + ":" + to_string(sync));
  }
  return m;
}

namespace {

bool can_fuse(const KernelMapping& m, const Kernel& A, const Kernel& B, const PipelineSkeleton& sk) {
  const int a = A.stages.back();
  const int b = B.stages[0];
  if (A.loop >= 0 || B.loop >= 0 || A.group != B.group) return false;
  // (d) single-input / single-output linkage
  if (sk.successors[a] != std::vector<int>{b} || sk.predecessors[b] != std::vector<int>{a}) return false;
  if (!sk.stages[a].fusible || !sk.stages[b].fusible) return false;
  // (a) same bin size
  if (!(sk.stages[a].grid == sk.stages[b].grid)) return false;
  // (b) same bin mapping; custom functions are never assumed equal
  const bool same_map = sk.stages[b].assign == AssignKind::AssignPreviousBins ||
                        (sk.stages[a].assign == sk.stages[b].assign && sk.stages[a].assign != AssignKind::Custom);
  if (!same_map) return false;
  // (c) dependencies: only a per-bin EndBin barrier may sit inside a kernel
  if (sk.stages[b].has(DependencyKind::EndStage)) return false;
  if (sk.stages[b].has(DependencyKind::EndBin) && B.entry_sync != SyncKind::LocalPerBinBarrier) return false;
  // (e) identical static core assignment
  if (A.dispatch != B.dispatch) return false;
  if (A.dispatch == Dispatch::PreScheduledMap) return A.core_map == B.core_map;
  (void)m;
  return A.dispatch == Dispatch::SerializeToOne;
}

}  // namespace

KernelMapping fuse(KernelMapping m, const PipelineSkeleton& sk) {
  for (std::size_t i = 0; i + 1 < m.kernels.size();) {
    Kernel& A = m.kernels[i];
    Kernel& B = m.kernels[i + 1];
    if (!can_fuse(m, A, B, sk)) {
      ++i;
      continue;
    }
    const int a = A.stages.back();
    const int b = B.stages[0];
    if (sk.stages[b].assign == AssignKind::AssignPreviousBins) {
      erase_phase(A.phases, {b, PhaseKind::AssignBin});
      erase_phase(A.phases, {b, PhaseKind::Schedule});
    }
    for (const PhaseRef& p : B.phases)
      if (!(p.stage == b && p.phase == PhaseKind::Schedule)) A.phases.push_back(p);
    A.fused_sync.push_back(B.entry_sync == SyncKind::LocalPerBinBarrier ? SyncKind::LocalPerBinBarrier
                                                                         : SyncKind::None);
    A.fused_sync.insert(A.fused_sync.end(), B.fused_sync.begin(), B.fused_sync.end());
    A.stages.insert(A.stages.end(), B.stages.begin(), B.stages.end());
    for (Wiring& w : m.wiring)
      if (w.producer == a && w.consumer == b) w.fused = true;
    add_unique(m.report.fused_pairs, sk.stages[a].name + "+" + sk.stages[b].name);
    m.kernels.erase(m.kernels.begin() + static_cast<std::ptrdiff_t>(i) + 1);
  }
  refresh_counters(m);
  return m;
}

KernelMapping synthesize(const PipelineGraph& graph) {
  const auto diags = validate(graph);
  if (!diags.empty()) {
    std::string msg = "invalid pipeline:";
    for (const auto& d : diags) msg += fmt::format(" [{} {}: {}]", to_string(d.kind), d.subject, d.message);
    throw SynthesisError(msg);
  }
  const PipelineGraph g = normalize_bins(graph);
  const PipelineSkeleton sk = build_skeleton(g);
  const StageSchedule schedule = order_stages(sk);
  KernelMapping m = baseline_mapping(schedule, sk);
  m = preschedule(std::move(m), sk);
  m = eliminate_schedule(std::move(m), sk);
  m = resolve_dependencies(std::move(m), sk);
  m = fuse(std::move(m), sk);
  return m;
}

std::string describe(const KernelMapping& m) {
  std::ostringstream os;
  const auto& sk = m.skeleton;
  auto phase_list = [&](const std::vector<PhaseRef>& phases) {
    std::string out;
    for (const auto& p : phases) out += fmt::format(" {}({})", to_string(p.phase), sk.stages[p.stage].name);
    return out;
  };
  os << "injection:" << phase_list(m.injection) << "\n";
  os << fmt::format("kernels: {}\n", m.kernels.size());
  for (int k = 0; k < static_cast<int>(m.kernels.size()); ++k) {
    const Kernel& K = m.kernels[k];
    std::string dispatch = to_string(K.dispatch);
    if (K.dispatch == Dispatch::PreScheduledMap) dispatch += "(" + K.core_map + ")";
    if (K.dispatch == Dispatch::SplitAll) dispatch += fmt::format("({})", K.tile_split_size);
    std::string inner;
    for (std::size_t f = 0; f < K.fused_sync.size(); ++f)
      if (K.fused_sync[f] != SyncKind::None)
        inner += fmt::format(" {}|{}:{}", sk.stages[K.stages[f]].name, sk.stages[K.stages[f + 1]].name,
                             to_string(K.fused_sync[f]));
    os << fmt::format("  K{} {} dispatch={} entry_sync={}{}{}{}\n", k, m.kernel_name(k), dispatch,
                      to_string(K.entry_sync), K.loop >= 0 ? " loop" : "",
                      K.group >= 0 ? fmt::format(" depth-first-group={}", K.group) : "",
                      inner.empty() ? "" : " fused-sync:" + inner);
    os << "     phases:" << phase_list(K.phases) << "\n";
  }
  auto list = [](const std::vector<std::string>& v) {
    std::string out;
    for (const auto& s : v) out += " " + s;
    return out.empty() ? std::string(" none") : out;
  };
  os << "fused:" << list(m.report.fused_pairs) << "\n";
  os << "eliminated schedules:" << list(m.report.eliminated_schedules) << "\n";
  os << "prescheduled:" << list(m.report.prescheduled) << "\n";
  os << "barriers:" << list(m.report.barriers) << "\n";
  os << "bin-store counters:" << list(m.counters) << "\n";
  return os.str();
}

nlohmann::json report_json(const KernelMapping& m) {
  using nlohmann::json;
  json kernels = json::array();
  for (int k = 0; k < static_cast<int>(m.kernels.size()); ++k) {
    const Kernel& K = m.kernels[k];
    json stages = json::array();
    for (int s : K.stages) stages.push_back(m.skeleton.stages[s].name);
    json syncs = json::array();
    for (SyncKind s : K.fused_sync) syncs.push_back(to_string(s));
    json phases = json::array();
    for (const auto& p : K.phases) phases.push_back(to_string(p.phase) + "(" + m.skeleton.stages[p.stage].name + ")");
    kernels.push_back({{"name", m.kernel_name(k)},
                       {"stages", stages},
                       {"dispatch", to_string(K.dispatch)},
                       {"tile_split_size", K.tile_split_size},
                       {"entry_sync", to_string(K.entry_sync)},
                       {"fused_sync", syncs},
                       {"loop", K.loop >= 0},
                       {"depth_first_group", K.group},
                       {"phases", phases}});
  }
  return {{"kernel_count", m.kernels.size()},
          {"kernels", kernels},
          {"fused_pairs", m.report.fused_pairs},
          {"eliminated_schedules", m.report.eliminated_schedules},
          {"prescheduled", m.report.prescheduled},
          {"barriers", m.report.barriers},
          {"counters", m.counters}};
}

}  // namespace binpipe
