#pragma once

// Phase functions attached to stage declarations. Process phases are type
// erased over the stage's input primitive type; AssignBin functions map one
// primitive to a set of bins of the consuming stage.

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "binpipe/bezier.hpp"
#include "binpipe/binning.hpp"
#include "binpipe/primitives.hpp"
#include "binpipe/raster.hpp"

namespace binpipe {

struct RenderTargets;

// Knobs visible to every phase function of a run.
struct RenderParams {
  Screen screen;
  Camera camera;
  int shader_cost = 0;  // extra transcendental iterations per shaded sample
  ReyesParams reyes;
  bool fault_skew_depth = false;  // negative control for verification
};

class Emitter {
 public:
  virtual ~Emitter() = default;
  virtual void emit_primitive(int channel, Primitive&& p) = 0;

  template <class T>
  void emit(int channel, T&& value) {
    emit_primitive(channel, Primitive{std::forward<T>(value)});
  }
};

struct ProcessContext {
  int stage = -1;
  const std::string* stage_name = nullptr;
  int bin = 0;
  PixelRange clip;  // pixels this invocation may touch
  int worker = 0;
  const RenderParams* params = nullptr;
  RenderTargets* targets = nullptr;
};

enum class ProcessMode { PerPrimitive, PerBinList };

class ProcessPhase {
 public:
  using ListFn = std::function<void(const PrimitiveList&, std::size_t, std::size_t, const ProcessContext&, Emitter&)>;
  using OneFn = std::function<void(const Primitive&, const ProcessContext&, Emitter&)>;

  ProcessPhase() = default;

  // f(const In&, const ProcessContext&, Emitter&)
  template <class In, class F>
  static ProcessPhase per_primitive(std::string name, F f) {
    ProcessPhase p;
    p.name_ = std::move(name);
    p.input_ = PrimitiveTypeOf<In>::value;
    p.mode_ = ProcessMode::PerPrimitive;
    auto shared = std::make_shared<F>(std::move(f));
    p.list_ = [shared](const PrimitiveList& l, std::size_t b, std::size_t e, const ProcessContext& c, Emitter& em) {
      const auto& v = std::get<std::vector<In>>(l);
      for (std::size_t i = b; i < e; ++i) (*shared)(v[i], c, em);
    };
    p.one_ = [shared](const Primitive& prim, const ProcessContext& c, Emitter& em) {
      (*shared)(std::get<In>(prim), c, em);
    };
    return p;
  }

  // f(std::span<const In>, const ProcessContext&, Emitter&). Cannot be fused.
  template <class In, class F>
  static ProcessPhase per_bin_list(std::string name, F f) {
    ProcessPhase p;
    p.name_ = std::move(name);
    p.input_ = PrimitiveTypeOf<In>::value;
    p.mode_ = ProcessMode::PerBinList;
    auto shared = std::make_shared<F>(std::move(f));
    p.list_ = [shared](const PrimitiveList& l, std::size_t b, std::size_t e, const ProcessContext& c, Emitter& em) {
      const auto& v = std::get<std::vector<In>>(l);
      (*shared)(std::span<const In>(v.data() + b, e - b), c, em);
    };
    return p;
  }

  const std::string& name() const { return name_; }
  PrimitiveType input() const { return input_; }
  ProcessMode mode() const { return mode_; }
  bool valid() const { return static_cast<bool>(list_); }

  void run(const PrimitiveList& l, std::size_t begin, std::size_t end, const ProcessContext& c, Emitter& em) const {
    list_(l, begin, end, c, em);
  }

  void run_one(const Primitive& prim, const ProcessContext& c, Emitter& em) const {
    if (!one_) throw std::logic_error("process phase '" + name_ + "' has no per-primitive entry");
    one_(prim, c, em);
  }

 private:
  std::string name_;
  PrimitiveType input_ = PrimitiveType::Token;
  ProcessMode mode_ = ProcessMode::PerPrimitive;
  ListFn list_;
  OneFn one_;
};

struct AssignContext {
  const BinGrid* grid = nullptr;  // consumer grid
  int producer_bin = 0;
  std::atomic<std::uint64_t>* counter = nullptr;  // per-edge, shared by all workers
  const RenderParams* params = nullptr;
};

struct CustomAssign {
  std::string name;
  bool spatial = false;  // bins correspond to screen regions
  std::function<void(const Primitive&, const AssignContext&, std::vector<int>&)> fn;
};

// Next bin in a shared rotation; per-bin counts never differ by more than one.
std::shared_ptr<const CustomAssign> round_robin_assign();

}  // namespace binpipe
