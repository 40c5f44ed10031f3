#include "binpipe/graph.hpp"

#include <algorithm>
#include <deque>

#include <fmt/format.h>

namespace binpipe {

std::string to_string(DiagnosticKind k) {
  switch (k) {
    case DiagnosticKind::EmptyGraph: return "EmptyGraph";
    case DiagnosticKind::NoSource: return "NoSource";
    case DiagnosticKind::NoDrain: return "NoDrain";
    case DiagnosticKind::CannotReachDrain: return "CannotReachDrain";
    case DiagnosticKind::UnreachableFromSource: return "UnreachableFromSource";
    case DiagnosticKind::UnknownDependencyTarget: return "UnknownDependencyTarget";
    case DiagnosticKind::TypeMismatch: return "TypeMismatch";
    case DiagnosticKind::UnconnectedChannel: return "UnconnectedChannel";
    case DiagnosticKind::InvalidBinConfig: return "InvalidBinConfig";
    case DiagnosticKind::InvalidSchedule: return "InvalidSchedule";
    case DiagnosticKind::InvalidAssign: return "InvalidAssign";
    case DiagnosticKind::MissingProcess: return "MissingProcess";
    case DiagnosticKind::ProcessInputMismatch: return "ProcessInputMismatch";
    case DiagnosticKind::InvalidScreen: return "InvalidScreen";
  }
  return "?";
}

std::string to_string(ScheduleKind k) {
  switch (k) {
    case ScheduleKind::DirectMap: return "DirectMap";
    case ScheduleKind::LoadBalance: return "LoadBalance";
    case ScheduleKind::Serialize: return "Serialize";
    case ScheduleKind::All: return "All";
  }
  return "?";
}

std::string to_string(AssignKind k) {
  switch (k) {
    case AssignKind::Custom: return "Custom";
    case AssignKind::AssignPreviousBins: return "AssignPreviousBins";
    case AssignKind::AssignToBoundingBox: return "AssignToBoundingBox";
    case AssignKind::AssignToAll: return "AssignToAll";
  }
  return "?";
}

std::string to_string(DependencyKind k) { return k == DependencyKind::EndStage ? "EndStage" : "EndBin"; }

std::optional<ScheduleKind> parse_schedule_kind(const std::string& s) {
  for (ScheduleKind k : {ScheduleKind::DirectMap, ScheduleKind::LoadBalance, ScheduleKind::Serialize, ScheduleKind::All})
    if (to_string(k) == s) return k;
  return std::nullopt;
}

std::shared_ptr<const CustomAssign> round_robin_assign() {
  static const auto instance = std::make_shared<const CustomAssign>(CustomAssign{
      "round_robin", false, [](const Primitive&, const AssignContext& ctx, std::vector<int>& out) {
        const std::uint64_t n = ctx.counter->fetch_add(1, std::memory_order_relaxed);
        out.push_back(static_cast<int>(n % static_cast<std::uint64_t>(ctx.grid->count())));
      }});
  return instance;
}

PipelineGraph& PipelineGraph::add_stage(StageDecl decl) {
  if (index_of(decl.name)) throw GraphError("duplicate stage name '" + decl.name + "'");
  auto pos = std::lower_bound(stages_.begin(), stages_.end(), decl.name,
                              [](const StageDecl& s, const std::string& n) { return s.name < n; });
  stages_.insert(pos, std::move(decl));
  reindex();
  return *this;
}

PipelineGraph& PipelineGraph::connect(const std::string& producer, int channel, const std::string& consumer) {
  const auto p = index_of(producer);
  const auto c = index_of(consumer);
  if (!p) throw GraphError("unknown producer stage '" + producer + "'");
  if (!c) throw GraphError("unknown consumer stage '" + consumer + "'");
  const StageDecl& ps = stages_[*p];
  if (channel < 0 || channel >= static_cast<int>(ps.output_types.size()))
    throw GraphError(fmt::format("stage '{}' declares no channel {}", producer, channel));
  const PrimitiveType out = ps.output_types[channel];
  if (out != stages_[*c].input_type)
    throw GraphError(fmt::format("channel {}:{} carries {} but '{}' consumes {}", producer, channel, to_string(out),
                                 consumer, to_string(stages_[*c].input_type)));
  NamedEdge e{producer, channel, consumer};
  if (std::find(named_edges_.begin(), named_edges_.end(), e) == named_edges_.end()) {
    named_edges_.push_back(std::move(e));
    std::sort(named_edges_.begin(), named_edges_.end());
  }
  reindex();
  return *this;
}

void PipelineGraph::reindex() {
  edges_.clear();
  for (const auto& e : named_edges_) edges_.push_back({*index_of(e.producer), e.channel, *index_of(e.consumer)});
  std::sort(edges_.begin(), edges_.end());
}

StageDecl& PipelineGraph::stage(const std::string& name) {
  const auto i = index_of(name);
  if (!i) throw GraphError("unknown stage '" + name + "'");
  return stages_[*i];
}

const StageDecl& PipelineGraph::stage(const std::string& name) const {
  const auto i = index_of(name);
  if (!i) throw GraphError("unknown stage '" + name + "'");
  return stages_[*i];
}

std::optional<int> PipelineGraph::index_of(const std::string& name) const {
  auto pos = std::lower_bound(stages_.begin(), stages_.end(), name,
                              [](const StageDecl& s, const std::string& n) { return s.name < n; });
  if (pos == stages_.end() || pos->name != name) return std::nullopt;
  return static_cast<int>(pos - stages_.begin());
}

std::vector<int> PipelineGraph::successors(int stage) const {
  std::vector<int> out;
  for (const Edge& e : edges_)
    if (e.producer == stage) out.push_back(e.consumer);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<int> PipelineGraph::predecessors(int stage) const {
  std::vector<int> out;
  for (const Edge& e : edges_)
    if (e.consumer == stage) out.push_back(e.producer);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<int> PipelineGraph::sources() const {
  std::vector<int> out;
  for (int s = 0; s < size(); ++s) {
    const auto preds = predecessors(s);
    if (std::all_of(preds.begin(), preds.end(), [s](int p) { return p == s; })) out.push_back(s);
  }
  return out;
}

std::vector<int> PipelineGraph::drains() const {
  std::vector<int> out;
  for (int s = 0; s < size(); ++s) {
    const auto succs = successors(s);
    if (std::all_of(succs.begin(), succs.end(), [s](int c) { return c == s; })) out.push_back(s);
  }
  return out;
}

bool operator==(const PipelineGraph& a, const PipelineGraph& b) {
  if (!(a.screen_ == b.screen_) || a.edges_ != b.edges_ || a.stages_.size() != b.stages_.size()) return false;
  for (std::size_t i = 0; i < a.stages_.size(); ++i) {
    const StageDecl& x = a.stages_[i];
    const StageDecl& y = b.stages_[i];
    const bool same_assign = x.assign.kind == y.assign.kind && x.assign.custom == y.assign.custom;
    if (x.name != y.name || !(x.bin == y.bin) || !same_assign || !(x.schedule == y.schedule) ||
        x.process.name() != y.process.name() || x.process_mode() != y.process_mode() ||
        x.dependencies != y.dependencies || x.input_type != y.input_type || x.output_types != y.output_types)
      return false;
  }
  return true;
}

namespace {

std::vector<bool> reach(const PipelineGraph& g, const std::vector<int>& roots, bool forward) {
  std::vector<bool> seen(g.size(), false);
  std::deque<int> q(roots.begin(), roots.end());
  for (int r : roots) seen[r] = true;
  while (!q.empty()) {
    const int s = q.front();
    q.pop_front();
    for (int n : forward ? g.successors(s) : g.predecessors(s))
      if (!seen[n]) {
        seen[n] = true;
        q.push_back(n);
      }
  }
  return seen;
}

}  // namespace

std::vector<Diagnostic> validate(const PipelineGraph& g) {
  std::vector<Diagnostic> out;
  auto add = [&out](DiagnosticKind k, std::string subject, std::string msg) {
    out.push_back({k, std::move(subject), std::move(msg)});
  };
  if (g.screen().width <= 0 || g.screen().height <= 0)
    add(DiagnosticKind::InvalidScreen, "screen", fmt::format("{}x{}", g.screen().width, g.screen().height));
  if (g.size() == 0) {
    add(DiagnosticKind::EmptyGraph, "graph", "no stages");
    return out;
  }

  for (int i = 0; i < g.size(); ++i) {
    const StageDecl& s = g.stage(i);
    const BinConfig& b = s.bin;
    const bool bins_ok = (b.bin_width == 0 && b.bin_height == 0) || (b.bin_width > 0 && b.bin_height > 0);
    if (!bins_ok || b.threads_per_bin < 1)
      add(DiagnosticKind::InvalidBinConfig, s.name,
          fmt::format("bins {}x{}, threads_per_bin {}", b.bin_width, b.bin_height, b.threads_per_bin));
    if (s.schedule.tile_split_size &&
        (s.schedule.kind != ScheduleKind::All || *s.schedule.tile_split_size < 1))
      add(DiagnosticKind::InvalidSchedule, s.name, "tile_split_size requires the All directive and a positive size");
    if ((s.assign.kind == AssignKind::Custom) != static_cast<bool>(s.assign.custom))
      add(DiagnosticKind::InvalidAssign, s.name, "custom assign-bin function iff kind is Custom");
    if (!s.process.valid()) {
      add(DiagnosticKind::MissingProcess, s.name, "no process phase");
    } else if (s.process.input() != s.input_type) {
      add(DiagnosticKind::ProcessInputMismatch, s.name,
          fmt::format("process '{}' consumes {}, stage declares {}", s.process.name(), to_string(s.process.input()),
                      to_string(s.input_type)));
    }
    for (const auto& d : s.dependencies)
      if (d.kind == DependencyKind::EndStage && !g.index_of(d.target_stage))
        add(DiagnosticKind::UnknownDependencyTarget, s.name, "EndStage names unknown stage '" + d.target_stage + "'");
    for (int ch = 0; ch < static_cast<int>(s.output_types.size()); ++ch) {
      const bool used = std::any_of(g.edges().begin(), g.edges().end(),
                                    [&](const Edge& e) { return e.producer == i && e.channel == ch; });
      if (!used) add(DiagnosticKind::UnconnectedChannel, fmt::format("{}:{}", s.name, ch), "channel has no consumer");
    }
  }
  for (const Edge& e : g.edges()) {
    const auto& p = g.stage(e.producer);
    const auto& c = g.stage(e.consumer);
    if (p.output_types.at(e.channel) != c.input_type)
      add(DiagnosticKind::TypeMismatch, fmt::format("{}:{}->{}", p.name, e.channel, c.name), "channel type differs");
  }

  const auto sources = g.sources();
  const auto drains = g.drains();
  if (sources.empty()) add(DiagnosticKind::NoSource, "graph", "every stage has a producer");
  if (drains.empty()) add(DiagnosticKind::NoDrain, "graph", "every stage has a consumer");
  if (!drains.empty()) {
    const auto ok = reach(g, drains, false);
    for (int i = 0; i < g.size(); ++i)
      if (!ok[i]) add(DiagnosticKind::CannotReachDrain, g.stage(i).name, "no path to a drain");
  }
  if (!sources.empty()) {
    const auto ok = reach(g, sources, true);
    for (int i = 0; i < g.size(); ++i)
      if (!ok[i]) add(DiagnosticKind::UnreachableFromSource, g.stage(i).name, "no path from a source");
  }
  return out;
}

PipelineGraph normalize_bins(const PipelineGraph& graph) {
  PipelineGraph out = graph;
  for (const StageDecl& s : graph.stages()) {
    if (!s.bin.full_screen()) continue;
    StageDecl& d = out.stage(s.name);
    d.bin.bin_width = graph.screen().width;
    d.bin.bin_height = graph.screen().height;
  }
  return out;
}

BinGrid grid_of(const PipelineGraph& graph, int stage) { return make_grid(graph.screen(), graph.stage(stage).bin); }

}  // namespace binpipe
