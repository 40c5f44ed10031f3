#include "binpipe/skeleton.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <sstream>

#include <fmt/format.h>

namespace binpipe {

std::string to_string(CutReason r) {
  switch (r) {
    case CutReason::Convergence: return "convergence";
    case CutReason::Divergence: return "divergence";
    case CutReason::ExplicitDependency: return "dependency";
    case CutReason::Terminal: return "terminal";
  }
  return "?";
}

bool StageSummary::has(DependencyKind k) const {
  return std::any_of(dependencies.begin(), dependencies.end(), [k](const auto& d) { return d.kind == k; });
}

int PipelineSkeleton::index_of(const std::string& name) const {
  for (int i = 0; i < static_cast<int>(stages.size()); ++i)
    if (stages[i].name == name) return i;
  return -1;
}

std::vector<int> PipelineSkeleton::forward_predecessors(int stage) const {
  std::vector<int> out;
  for (const auto& e : edges)
    if (e.consumer == stage && !e.back && e.producer != stage) out.push_back(e.producer);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<int> PipelineSkeleton::forward_successors(int stage) const {
  std::vector<int> out;
  for (const auto& e : edges)
    if (e.producer == stage && !e.back && e.consumer != stage) out.push_back(e.consumer);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

namespace {

// Tarjan; component ids are assigned in completion order.
std::vector<int> scc_ids(const PipelineGraph& g) {
  const int n = g.size();
  std::vector<int> index(n, -1), low(n, 0), comp(n, -1), stack;
  std::vector<bool> on_stack(n, false);
  int next_index = 0, next_comp = 0;
  std::function<void(int)> visit = [&](int v) {
    index[v] = low[v] = next_index++;
    stack.push_back(v);
    on_stack[v] = true;
    for (int w : g.successors(v)) {
      if (index[w] < 0) {
        visit(w);
        low[v] = std::min(low[v], low[w]);
      } else if (on_stack[w]) {
        low[v] = std::min(low[v], index[w]);
      }
    }
    if (low[v] == index[v]) {
      int w;
      do {
        w = stack.back();
        stack.pop_back();
        on_stack[w] = false;
        comp[w] = next_comp;
      } while (w != v);
      ++next_comp;
    }
  };
  for (int v = 0; v < n; ++v)
    if (index[v] < 0) visit(v);
  return comp;
}

std::vector<int> reverse_bfs(int n, const std::vector<int>& roots, const std::vector<Edge>& edges,
                             const std::vector<bool>& skip) {
  std::vector<int> dist(n, -1);
  std::deque<int> q;
  for (int r : roots) {
    dist[r] = 0;
    q.push_back(r);
  }
  while (!q.empty()) {
    const int s = q.front();
    q.pop_front();
    for (std::size_t i = 0; i < edges.size(); ++i) {
      const Edge& e = edges[i];
      if (skip[i] || e.consumer != s || e.producer == e.consumer || dist[e.producer] >= 0) continue;
      dist[e.producer] = dist[s] + 1;
      q.push_back(e.producer);
    }
  }
  return dist;
}

std::vector<bool> back_edges(const PipelineGraph& g) {
  const auto comp = scc_ids(g);
  const auto& edges = g.edges();
  const auto d0 = reverse_bfs(g.size(), g.drains(), edges, std::vector<bool>(edges.size(), false));
  std::vector<bool> back(edges.size(), false);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const Edge& e = edges[i];
    if (comp[e.producer] != comp[e.consumer]) continue;
    back[i] = e.producer == e.consumer || d0[e.consumer] >= d0[e.producer];
  }
  return back;
}

bool has_bbox(PrimitiveType t) { return t != PrimitiveType::MeshTriangle && t != PrimitiveType::Patch; }

}  // namespace

std::vector<std::vector<int>> detect_cycles(const PipelineGraph& g) {
  const auto comp = scc_ids(g);
  std::vector<std::vector<int>> by_comp(g.size());
  for (int v = 0; v < g.size(); ++v) by_comp[comp[v]].push_back(v);
  std::vector<std::vector<int>> out;
  for (auto& members : by_comp) {
    if (members.empty()) continue;
    const bool self_loop = members.size() == 1 && [&] {
      const auto s = g.successors(members[0]);
      return std::find(s.begin(), s.end(), members[0]) != s.end();
    }();
    if (members.size() > 1 || self_loop) out.push_back(members);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<int> distance_from_drain(const PipelineGraph& g) {
  return reverse_bfs(g.size(), g.drains(), g.edges(), back_edges(g));
}

std::vector<Branch> partition_branches(const PipelineSkeleton& sk) {
  const int n = static_cast<int>(sk.stages.size());
  // Degrees count every edge except self-loops, so cycle entries and exits cut.
  std::vector<std::vector<int>> preds(n), succs(n);
  for (int s = 0; s < n; ++s) {
    for (int p : sk.predecessors[s])
      if (p != s) preds[s].push_back(p);
    for (int c : sk.successors[s])
      if (c != s) succs[s].push_back(c);
  }
  auto entry_reason = [&](int s) -> std::optional<CutReason> {
    if (preds[s].empty()) return CutReason::Terminal;
    if (preds[s].size() > 1) return CutReason::Convergence;
    if (succs[preds[s][0]].size() > 1) return CutReason::Divergence;
    if (sk.stages[s].has(DependencyKind::EndStage)) return CutReason::ExplicitDependency;
    return std::nullopt;
  };

  std::vector<bool> taken(n, false);
  std::vector<Branch> out;
  auto grow = [&](int head, CutReason entry) {
    Branch b;
    b.entry = entry;
    b.start_distance = sk.distance[head];
    int s = head;
    while (true) {
      b.stages.push_back(s);
      taken[s] = true;
      if (succs[s].size() != 1) {
        b.exit = succs[s].empty() ? CutReason::Terminal : CutReason::Divergence;
        break;
      }
      const int next = succs[s][0];
      const auto cut = entry_reason(next);
      if (cut || taken[next]) {
        b.exit = cut.value_or(CutReason::Convergence);
        break;
      }
      s = next;
    }
    out.push_back(std::move(b));
  };
  for (int s = 0; s < n; ++s)
    if (auto r = entry_reason(s)) grow(s, *r);
  // Heads of cycles entered only through loop-back edges.
  for (int s = 0; s < n; ++s)
    if (!taken[s]) grow(s, CutReason::Convergence);

  std::sort(out.begin(), out.end(), [&](const Branch& a, const Branch& b) {
    if (a.start_distance != b.start_distance) return a.start_distance > b.start_distance;
    return sk.stages[a.stages[0]].name < sk.stages[b.stages[0]].name;
  });
  return out;
}

PipelineSkeleton build_skeleton(const PipelineGraph& graph) {
  const PipelineGraph g = normalize_bins(graph);
  const int n = g.size();
  PipelineSkeleton sk;
  sk.screen = g.screen();
  for (int i = 0; i < n; ++i) {
    const StageDecl& d = g.stage(i);
    StageSummary s;
    s.name = d.name;
    s.bin = d.bin;
    s.grid = make_grid(g.screen(), d.bin);
    s.schedule = d.schedule;
    s.assign = d.assign.kind;
    if (d.assign.custom) s.custom_assign = d.assign.custom->name;
    s.fusible = d.process_mode() == ProcessMode::PerPrimitive;
    s.dependencies = d.dependencies;
    s.input = d.input_type;
    s.outputs = d.output_types;
    sk.stages.push_back(std::move(s));
    sk.successors.push_back(g.successors(i));
    sk.predecessors.push_back(g.predecessors(i));
  }
  const auto back = back_edges(g);
  for (std::size_t i = 0; i < g.edges().size(); ++i) {
    const Edge& e = g.edges()[i];
    sk.edges.push_back({e.producer, e.channel, e.consumer, back[i]});
  }
  sk.cycle_sets = detect_cycles(g);
  sk.cycle_of.assign(n, -1);
  for (int c = 0; c < static_cast<int>(sk.cycle_sets.size()); ++c)
    for (int s : sk.cycle_sets[c]) sk.cycle_of[s] = c;
  sk.distance = reverse_bfs(n, g.drains(), g.edges(), back);
  sk.sources = g.sources();
  sk.drains = g.drains();

  // Spatial meaning of bin ids, propagated through AssignPreviousBins.
  std::vector<bool> spatial(n, true);
  for (int i = 0; i < n; ++i) {
    const StageDecl& d = g.stage(i);
    if (d.assign.kind == AssignKind::Custom) spatial[i] = d.assign.custom && d.assign.custom->spatial;
  }
  for (bool changed = true; changed;) {
    changed = false;
    for (int i = 0; i < n; ++i) {
      if (g.stage(i).assign.kind != AssignKind::AssignPreviousBins || !spatial[i]) continue;
      bool ok = false;
      for (int p : sk.predecessors[i]) {
        if (p == i) continue;
        const bool compatible = sk.stages[p].grid == sk.stages[i].grid || has_bbox(sk.stages[i].input);
        ok = spatial[p] && compatible;
        if (!ok) break;
      }
      if (!ok) {
        spatial[i] = false;
        changed = true;
      }
    }
  }
  for (int i = 0; i < n; ++i) sk.stages[i].spatial_bins = spatial[i];

  sk.branches = partition_branches(sk);
  sk.branch_of.assign(n, -1);
  for (int b = 0; b < static_cast<int>(sk.branches.size()); ++b)
    for (int s : sk.branches[b].stages) sk.branch_of[s] = b;
  return sk;
}

std::string describe(const PipelineSkeleton& sk) {
  std::ostringstream os;
  os << fmt::format("screen {}x{}\n", sk.screen.width, sk.screen.height);
  os << "stages:\n";
  for (int i = 0; i < static_cast<int>(sk.stages.size()); ++i) {
    const auto& s = sk.stages[i];
    std::string sched = to_string(s.schedule.kind);
    if (s.schedule.tile_split_size) sched += fmt::format("(tileSplitSize={})", *s.schedule.tile_split_size);
    std::string assign = to_string(s.assign);
    if (!s.custom_assign.empty()) assign += "(" + s.custom_assign + ")";
    std::string deps;
    for (const auto& d : s.dependencies)
      deps += " " + to_string(d.kind) + (d.kind == DependencyKind::EndStage ? "(" + d.target_stage + ")" : "");
    os << fmt::format("  {:<16} dist={} bins={}x{} grid={}x{}{} schedule={} assign={}{}{}\n", s.name, sk.distance[i],
                      s.bin.bin_width, s.bin.bin_height, s.grid.nx, s.grid.ny, s.spatial_bins ? "" : " (non-spatial)",
                      sched, assign, s.fusible ? "" : " per-bin-list", deps);
  }
  os << "branches:\n";
  for (const auto& b : sk.branches) {
    os << "  [";
    for (std::size_t k = 0; k < b.stages.size(); ++k) os << (k ? ", " : "") << sk.stages[b.stages[k]].name;
    os << fmt::format("] start={} entry={} exit={}\n", b.start_distance, to_string(b.entry), to_string(b.exit));
  }
  os << "cycles:";
  if (sk.cycle_sets.empty()) os << " none";
  for (const auto& c : sk.cycle_sets) {
    os << " {";
    for (std::size_t k = 0; k < c.size(); ++k) os << (k ? ", " : "") << sk.stages[c[k]].name;
    os << "}";
  }
  os << "\n";
  return os.str();
}

}  // namespace binpipe
