#pragma once

// Token-graph helpers shared by the unit tests.

#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include "binpipe/graph.hpp"
#include "binpipe/ordering.hpp"
#include "binpipe/pipelines.hpp"
#include "binpipe/synthesis.hpp"

namespace binpipe::testing {

inline StageDecl token_stage(const std::string& name, int outputs, BinConfig bin = {},
                             BinAssignDirective assign = BinAssignDirective::previous(),
                             ScheduleDirective schedule = {ScheduleKind::LoadBalance, std::nullopt}) {
  StageDecl d;
  d.name = name;
  d.input_type = PrimitiveType::Token;
  d.output_types.assign(static_cast<std::size_t>(outputs), PrimitiveType::Token);
  d.process = *registered_phase("token_pass:" + std::to_string(outputs));
  d.bin = bin;
  d.assign = std::move(assign);
  d.schedule = schedule;
  return d;
}

inline std::vector<Token> tokens(int n, Screen screen, unsigned seed = 7) {
  std::vector<Token> out;
  unsigned s = seed;
  for (int i = 0; i < n; ++i) {
    s = s * 1103515245u + 12345u;
    const int x = static_cast<int>((s >> 8) % static_cast<unsigned>(screen.width));
    s = s * 1103515245u + 12345u;
    const int y = static_cast<int>((s >> 8) % static_cast<unsigned>(screen.height));
    out.push_back({static_cast<std::uint64_t>(i), x, y, 0});
  }
  return out;
}

// Random DAGs of 1..12 stages with random bins, schedules and EndStage
// constraints on ancestors. Stage names are shuffled so that name order says
// nothing about topology. Counts:
//  - stages not scheduled exactly once
//  - forward edges whose producer is scheduled after the consumer
//  - EndStage targets not scheduled strictly before the dependent
//  - kernels out of schedule order, Process phases not present exactly once
//  - graphs that fail validation or throw
inline int random_dag_violations(int graphs, std::uint64_t seed) {
  const Screen screen{1024, 768};
  std::mt19937_64 rng(seed);
  const std::vector<BinConfig> bins = {{0, 0, 1}, {8, 8, 1}, {16, 16, 1}, {32, 32, 1}};
  const std::vector<ScheduleKind> kinds = {ScheduleKind::DirectMap, ScheduleKind::LoadBalance, ScheduleKind::Serialize,
                                           ScheduleKind::All};
  int violations = 0;
  for (int trial = 0; trial < graphs; ++trial) {
    const int n = std::uniform_int_distribution<int>(1, 12)(rng);
    std::vector<std::string> label(n);
    for (int i = 0; i < n; ++i) label[i] = "S" + std::to_string(i);
    std::shuffle(label.begin(), label.end(), rng);

    std::vector<std::vector<int>> out(n);
    std::bernoulli_distribution edge(0.3);
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (edge(rng)) out[i].push_back(j);

    std::vector<std::vector<int>> ancestors(n);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < j; ++i)
        if (std::find(out[i].begin(), out[i].end(), j) != out[i].end()) {
          ancestors[j].push_back(i);
          ancestors[j].insert(ancestors[j].end(), ancestors[i].begin(), ancestors[i].end());
        }

    PipelineGraph g(screen);
    for (int i = 0; i < n; ++i) {
      const ScheduleKind k = kinds[rng() % kinds.size()];
      ScheduleDirective sd{k, std::nullopt};
      if (k == ScheduleKind::All && rng() % 2) sd.tile_split_size = 64;
      const auto assign = rng() % 2 ? BinAssignDirective::previous() : BinAssignDirective::bounding_box();
      StageDecl d = token_stage(label[i], static_cast<int>(out[i].size()), bins[rng() % bins.size()], assign, sd);
      if (!ancestors[i].empty() && rng() % 4 == 0)
        d.dependencies.push_back({DependencyKind::EndStage, label[ancestors[i][rng() % ancestors[i].size()]]});
      if (rng() % 6 == 0) d.dependencies.push_back({DependencyKind::EndBin, ""});
      g.add_stage(std::move(d));
    }
    for (int i = 0; i < n; ++i)
      for (std::size_t c = 0; c < out[i].size(); ++c) g.connect(label[i], static_cast<int>(c), label[out[i][c]]);
    if (!validate(g).empty()) {
      ++violations;
      continue;
    }

    try {
      const PipelineSkeleton sk = build_skeleton(g);
      const StageSchedule s = order_stages(sk);
      std::vector<int> count(n, 0);
      for (const auto& e : s.entries)
        for (int st : e.stages) ++count[st];
      for (int i = 0; i < n; ++i) violations += count[i] != 1;
      for (const auto& e : sk.edges)
        if (!e.back && s.entry_of(e.producer) > s.entry_of(e.consumer)) ++violations;
      for (int i = 0; i < n; ++i)
        for (const auto& dep : sk.stages[i].dependencies)
          if (dep.kind == DependencyKind::EndStage && s.entry_of(sk.index_of(dep.target_stage)) >= s.entry_of(i))
            ++violations;

      const KernelMapping m = synthesize(g);
      std::vector<int> process(n, 0);
      int last_entry = -1;
      for (const auto& k : m.kernels) {
        for (const auto& p : k.phases)
          if (p.phase == PhaseKind::Process) ++process[p.stage];
        const int e = s.entry_of(k.stages[0]);
        violations += e < last_entry;
        last_entry = e;
      }
      for (int i = 0; i < n; ++i) violations += process[i] != 1;
    } catch (const std::exception&) {
      ++violations;
    }
  }
  return violations;
}

}  // namespace binpipe::testing
