#pragma once

#include <string>
#include <vector>

#include "binpipe/graph.hpp"

namespace binpipe {

enum class CutReason { Convergence, Divergence, ExplicitDependency, Terminal };
std::string to_string(CutReason r);

struct Branch {
  std::vector<int> stages;  // linear chain, descending distance
  int start_distance = 0;
  CutReason entry = CutReason::Terminal;
  CutReason exit = CutReason::Terminal;
  friend bool operator==(const Branch&, const Branch&) = default;
};

struct StageSummary {
  std::string name;
  BinConfig bin;  // normalized, never 0x0
  BinGrid grid;
  ScheduleDirective schedule;
  AssignKind assign = AssignKind::AssignPreviousBins;
  std::string custom_assign;  // name of the custom function, if any
  bool spatial_bins = true;   // bin ids denote screen regions
  bool fusible = true;        // false for PerBinList process phases
  std::vector<DependencyConstraint> dependencies;
  PrimitiveType input = PrimitiveType::Token;
  std::vector<PrimitiveType> outputs;

  bool has(DependencyKind k) const;
  friend bool operator==(const StageSummary&, const StageSummary&) = default;
};

struct SkeletonEdge {
  int producer = 0;
  int channel = 0;
  int consumer = 0;
  bool back = false;  // loop-back edge inside a cycle set (self-loops included)
  friend bool operator==(const SkeletonEdge&, const SkeletonEdge&) = default;
};

struct PipelineSkeleton {
  Screen screen;
  std::vector<StageSummary> stages;  // same indices as the graph
  std::vector<SkeletonEdge> edges;
  std::vector<std::vector<int>> successors;    // distinct, all edges
  std::vector<std::vector<int>> predecessors;  // distinct, all edges
  std::vector<std::vector<int>> cycle_sets;
  std::vector<int> cycle_of;  // index into cycle_sets, -1 if acyclic
  std::vector<int> distance;  // hops to the nearest drain
  std::vector<Branch> branches;
  std::vector<int> branch_of;
  std::vector<int> sources;
  std::vector<int> drains;

  int index_of(const std::string& name) const;  // -1 if absent
  // Producers reached through forward (non-loop-back) edges, excluding self.
  std::vector<int> forward_predecessors(int stage) const;
  std::vector<int> forward_successors(int stage) const;
  friend bool operator==(const PipelineSkeleton&, const PipelineSkeleton&) = default;
};

// Strongly connected components with more than one stage or a self-loop.
std::vector<std::vector<int>> detect_cycles(const PipelineGraph& graph);

// Shortest hop count to any drain with loop-back edges removed. Stages that
// reach no drain get -1.
std::vector<int> distance_from_drain(const PipelineGraph& graph);

// Uses the distances, edges and cycle data already in `sk`.
std::vector<Branch> partition_branches(const PipelineSkeleton& sk);

// Precondition: validate(graph) is empty.
PipelineSkeleton build_skeleton(const PipelineGraph& graph);

std::string describe(const PipelineSkeleton& sk);

}  // namespace binpipe
