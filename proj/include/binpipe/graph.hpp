#pragma once

// Pipeline description: stages with AssignBin / Schedule / Process phases,
// connected by typed channels.

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "binpipe/binning.hpp"
#include "binpipe/phases.hpp"
#include "binpipe/primitives.hpp"

namespace binpipe {

enum class ScheduleKind { DirectMap, LoadBalance, Serialize, All };

struct ScheduleDirective {
  ScheduleKind kind = ScheduleKind::LoadBalance;
  std::optional<int> tile_split_size;  // All only

  friend bool operator==(const ScheduleDirective&, const ScheduleDirective&) = default;
};

enum class AssignKind { Custom, AssignPreviousBins, AssignToBoundingBox, AssignToAll };

struct BinAssignDirective {
  AssignKind kind = AssignKind::AssignPreviousBins;
  std::shared_ptr<const CustomAssign> custom;  // present iff kind == Custom

  static BinAssignDirective previous() { return {AssignKind::AssignPreviousBins, nullptr}; }
  static BinAssignDirective bounding_box() { return {AssignKind::AssignToBoundingBox, nullptr}; }
  static BinAssignDirective to_all() { return {AssignKind::AssignToAll, nullptr}; }
  static BinAssignDirective with(std::shared_ptr<const CustomAssign> fn) { return {AssignKind::Custom, std::move(fn)}; }
};

enum class DependencyKind { EndStage, EndBin };

struct DependencyConstraint {
  DependencyKind kind = DependencyKind::EndBin;
  std::string target_stage;  // EndStage only

  friend bool operator==(const DependencyConstraint&, const DependencyConstraint&) = default;
};

struct StageDecl {
  std::string name;
  BinConfig bin;
  BinAssignDirective assign;
  ScheduleDirective schedule;
  ProcessPhase process;
  std::vector<DependencyConstraint> dependencies;
  PrimitiveType input_type = PrimitiveType::Token;
  std::vector<PrimitiveType> output_types;  // indexed by channel id

  ProcessMode process_mode() const { return process.mode(); }
};

struct Edge {
  int producer = 0;
  int channel = 0;
  int consumer = 0;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

enum class DiagnosticKind {
  EmptyGraph,
  NoSource,
  NoDrain,
  CannotReachDrain,
  UnreachableFromSource,
  UnknownDependencyTarget,
  TypeMismatch,
  UnconnectedChannel,
  InvalidBinConfig,
  InvalidSchedule,
  InvalidAssign,
  MissingProcess,
  ProcessInputMismatch,
  InvalidScreen,
};

struct Diagnostic {
  DiagnosticKind kind;
  std::string subject;  // offending stage or edge
  std::string message;
};

std::string to_string(DiagnosticKind k);
std::string to_string(ScheduleKind k);
std::string to_string(AssignKind k);
std::string to_string(DependencyKind k);
std::optional<ScheduleKind> parse_schedule_kind(const std::string& s);

class GraphError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Stages are kept sorted by name, so insertion order never matters. Stage
// indices are stable once construction is finished.
class PipelineGraph {
 public:
  PipelineGraph() = default;
  explicit PipelineGraph(Screen screen) : screen_(screen) {}

  // Throws GraphError on a duplicate name.
  PipelineGraph& add_stage(StageDecl decl);
  // Throws GraphError for unknown stages, undeclared channels and type mismatches.
  PipelineGraph& connect(const std::string& producer, int channel, const std::string& consumer);

  Screen screen() const { return screen_; }
  void set_screen(Screen s) { screen_ = s; }

  const std::vector<StageDecl>& stages() const { return stages_; }
  StageDecl& stage(const std::string& name);
  const StageDecl& stage(const std::string& name) const;
  const StageDecl& stage(int index) const { return stages_.at(index); }
  std::optional<int> index_of(const std::string& name) const;
  int size() const { return static_cast<int>(stages_.size()); }

  // Sorted (producer, channel, consumer) by stage index.
  const std::vector<Edge>& edges() const { return edges_; }

  // Self-loops do not make a stage a non-source or a non-drain.
  std::vector<int> sources() const;
  std::vector<int> drains() const;
  std::vector<int> successors(int stage) const;    // distinct, ascending, includes self-loops
  std::vector<int> predecessors(int stage) const;  // distinct, ascending, includes self-loops

  friend bool operator==(const PipelineGraph& a, const PipelineGraph& b);

 private:
  struct NamedEdge {
    std::string producer;
    int channel;
    std::string consumer;
    friend auto operator<=>(const NamedEdge&, const NamedEdge&) = default;
  };
  void reindex();

  Screen screen_;
  std::vector<StageDecl> stages_;
  std::vector<NamedEdge> named_edges_;
  std::vector<Edge> edges_;
};

std::vector<Diagnostic> validate(const PipelineGraph& graph);

// Replaces every 0x0 bin config by the screen size.
PipelineGraph normalize_bins(const PipelineGraph& graph);

BinGrid grid_of(const PipelineGraph& graph, int stage);

}  // namespace binpipe
