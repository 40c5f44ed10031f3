#include "binpipe/runtime.hpp"

#include <algorithm>
#include <chrono>
#include <map>
#include <optional>

#include <fmt/format.h>

#include "binpipe/bin_store.hpp"

namespace binpipe {

std::vector<std::vector<int>> prescheduled_assignment(const std::vector<int>& bins, int workers, Dispatch dispatch) {
  std::vector<std::vector<int>> out(static_cast<std::size_t>(workers));
  for (int b : bins) out[dispatch == Dispatch::SerializeToOne ? 0 : b % workers].push_back(b);
  for (auto& v : out) std::sort(v.begin(), v.end());
  return out;
}

std::vector<std::pair<std::size_t, std::size_t>> split_chunks(std::size_t count, int split, int workers) {
  std::size_t size = split > 0 ? static_cast<std::size_t>(split)
                               : (count + static_cast<std::size_t>(workers) - 1) / static_cast<std::size_t>(workers);
  size = std::max<std::size_t>(size, 1);
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t b = 0; b < count; b += size) out.emplace_back(b, std::min(count, b + size));
  return out;
}

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

struct Route {
  int wiring = -1;  // -1 for input injection
  int consumer = 0;
  bool fused = false;
  std::unique_ptr<std::atomic<std::uint64_t>> counter = std::make_unique<std::atomic<std::uint64_t>>(0);
};

struct WorkerCounters {
  std::vector<std::uint64_t> received, processed, emitted;  // per stage
  std::vector<std::uint64_t> stored, direct;                // per wiring
  std::vector<int> scratch;
};

// Buffers for fused stages behind a per-bin barrier, keyed by chain position.
struct UnitState {
  std::vector<std::map<int, PrimitiveList>> local;
};

class Executor;

class KernelEmitter final : public Emitter {
 public:
  KernelEmitter(Executor& ex, int worker, int kernel, int pos, int bin, UnitState& unit)
      : ex_(ex), worker_(worker), kernel_(kernel), pos_(pos), bin_(bin), unit_(unit) {}
  void emit_primitive(int channel, Primitive&& p) override;

 private:
  Executor& ex_;
  int worker_, kernel_, pos_, bin_;
  UnitState& unit_;
};

class Executor {
 public:
  Executor(const PipelineGraph& graph, const KernelMapping& mapping, const RenderParams& params,
           const RuntimeConfig& config, WorkerPool& pool)
      : g_(graph), m_(mapping), params_(params), config_(config), pool_(pool), targets_(std::make_shared<RenderTargets>(params.screen)) {
    const int n = g_.size();
    if (n != static_cast<int>(m_.skeleton.stages.size()))
      throw RuntimeError("graph and kernel mapping disagree on the stage count");
    const int W = pool_.size();
    for (int s = 0; s < n; ++s) {
      grids_.push_back(m_.skeleton.stages[s].grid);
      stores_.push_back(std::make_unique<BinStore>(g_.stage(s).input_type, grids_[s].count(), W));
    }
    routes_.resize(n);
    for (int s = 0; s < n; ++s) routes_[s].resize(g_.stage(s).output_types.size());
    for (int w = 0; w < static_cast<int>(m_.wiring.size()); ++w) {
      const Wiring& wire = m_.wiring[w];
      Route r;
      r.wiring = w;
      r.consumer = wire.consumer;
      r.fused = wire.fused;
      routes_[wire.producer][wire.channel].push_back(std::move(r));
    }
    for (int s : m_.skeleton.sources) {
      Route r;
      r.consumer = s;
      injection_.push_back(std::move(r));
    }
    counters_.resize(W);
    for (auto& c : counters_) {
      c.received.assign(n, 0);
      c.processed.assign(n, 0);
      c.emitted.assign(n, 0);
      c.stored.assign(m_.wiring.size(), 0);
      c.direct.assign(m_.wiring.size(), 0);
    }
    stats_.workers = W;
    for (int s = 0; s < n; ++s) {
      StageStats st;
      st.name = g_.stage(s).name;
      st.threads_per_bin = g_.stage(s).bin.threads_per_bin;
      stats_.stages.push_back(st);
    }
    for (int k = 0; k < static_cast<int>(m_.kernels.size()); ++k)
      stats_.kernels.push_back({m_.kernel_name(k), to_string(m_.kernels[k].dispatch), 0, 0, 0});
  }

  RunResult run(const PrimitiveList& input) {
    const auto t0 = Clock::now();
    const std::size_t total = size(input);
    bool has_end_stage = false;
    for (const auto& s : m_.skeleton.stages) has_end_stage |= s.has(DependencyKind::EndStage);
    // EndStage means "the whole input has passed stage X", so it disables strip-mining.
    const std::size_t batch = (config_.strip_mine == 0 || has_end_stage) ? std::max<std::size_t>(total, 1)
                                                                         : config_.strip_mine;
    stats_.input_primitives = total;
    for (std::size_t b = 0; b < total; b += batch) {
      inject(input, b, std::min(total, b + batch));
      run_kernels();
      ++stats_.batches;
    }

    for (int s = 0; s < g_.size(); ++s) {
      std::uint64_t received = 0, processed = 0, emitted = 0;
      for (const auto& c : counters_) {
        received += c.received[s];
        processed += c.processed[s];
        emitted += c.emitted[s];
      }
      // Injected primitives were counted on arrival.
      received = stats_.stages[s].received += received;
      stats_.stages[s].processed = processed;
      stats_.stages[s].emitted = emitted;
      const std::uint64_t leftover = stores_[s]->total();
      stats_.lost_primitives += (received > processed ? received - processed : processed - received);
      if (leftover > 0 && received <= processed) stats_.lost_primitives += leftover;
    }
    for (int w = 0; w < static_cast<int>(m_.wiring.size()); ++w) {
      const Wiring& wire = m_.wiring[w];
      EdgeTraffic t{g_.stage(wire.producer).name, wire.channel, g_.stage(wire.consumer).name, wire.fused, 0, 0};
      for (const auto& c : counters_) {
        t.stored += c.stored[w];
        t.direct += c.direct[w];
      }
      stats_.traffic.push_back(t);
    }
    stats_.total_ms = ms_since(t0);
    return {targets_->composite(), std::move(stats_), targets_};
  }

  void deliver(int worker, int k, int pos, int bin, int channel, Primitive&& p, UnitState& unit) {
    const Kernel& K = m_.kernels[k];
    const int s = K.stages[pos];
    WorkerCounters& wc = counters_[worker];
    ++wc.emitted[s];
    auto& routes = routes_[s].at(channel);
    for (std::size_t i = 0; i < routes.size(); ++i) {
      Route& r = routes[i];
      Primitive item = (i + 1 == routes.size()) ? std::move(p) : p;
      const int c = r.consumer;
      std::vector<int>& bins = wc.scratch;
      bins.clear();
      if (r.fused && g_.stage(c).assign.kind == AssignKind::AssignPreviousBins) {
        bins.push_back(bin);
      } else {
        assign_bins(s, r, item, bin, bins);
      }
      const std::size_t nb = bins.size();
      if (r.fused) {
        const bool local = K.fused_sync[pos] == SyncKind::LocalPerBinBarrier;
        // Copy: the recursive call below reuses the scratch vector. The common
        // single-bin case stays off the heap.
        const int only = nb == 1 ? bins[0] : 0;
        std::vector<int> many;
        if (nb > 1) many.assign(bins.begin(), bins.end());
        auto target = [&](std::size_t j) { return nb == 1 ? only : many[j]; };
        for (std::size_t j = 0; j < nb; ++j) {
          ++wc.received[c];
          ++wc.direct[r.wiring];
          Primitive one = (j + 1 == nb) ? std::move(item) : item;
          if (local) {
            auto& l = unit.local[pos + 1];
            auto it = l.try_emplace(target(j), make_list(g_.stage(c).input_type)).first;
            push(it->second, std::move(one));
          } else {
            run_one(worker, k, pos + 1, target(j), one, unit);
          }
        }
      } else {
        for (std::size_t j = 0; j < nb; ++j) {
          ++wc.received[c];
          ++wc.stored[r.wiring];
          stores_[c]->append(worker, bins[j], (j + 1 == nb) ? std::move(item) : Primitive(item));
        }
      }
    }
  }

 private:
  ProcessContext context(int s, int bin, int worker) {
    ProcessContext ctx;
    ctx.stage = s;
    ctx.stage_name = &g_.stage(s).name;
    ctx.bin = bin;
    ctx.clip = m_.skeleton.stages[s].spatial_bins ? grids_[s].rect(bin)
                                                  : PixelRange{0, 0, params_.screen.width, params_.screen.height};
    ctx.worker = worker;
    ctx.params = &params_;
    ctx.targets = targets_.get();
    return ctx;
  }

  void assign_bins(int producer, Route& r, const Primitive& p, int producer_bin, std::vector<int>& out) {
    const int c = r.consumer;
    const BinGrid& grid = grids_[c];
    const BinAssignDirective& a = g_.stage(c).assign;
    auto by_box_or_keep = [&] {
      if (auto box = spatial_bbox(p)) {
        bbox_bins(grid, *box, out);
      } else {
        out.push_back(producer_bin % grid.count());
      }
    };
    switch (a.kind) {
      case AssignKind::AssignToAll:
        for (int b = 0; b < grid.count(); ++b) out.push_back(b);
        break;
      case AssignKind::AssignToBoundingBox: by_box_or_keep(); break;
      case AssignKind::AssignPreviousBins:
        if (producer < 0) {
          out.push_back(0);
        } else if (grids_[producer] == grid) {
          out.push_back(producer_bin);
        } else {
          by_box_or_keep();
        }
        break;
      case AssignKind::Custom: {
        AssignContext ctx{&grid, producer_bin, r.counter.get(), &params_};
        a.custom->fn(p, ctx, out);
        for (int b : out)
          if (b < 0 || b >= grid.count())
            throw RuntimeError(fmt::format("assign-bin '{}' of stage '{}' produced bin {} outside [0, {})",
                                           a.custom->name, g_.stage(c).name, b, grid.count()));
        break;
      }
    }
  }

  [[noreturn]] void rethrow_with_context(int s, int bin) {
    try {
      throw;
    } catch (const RuntimeError&) {
      throw;
    } catch (const std::exception& e) {
      throw RuntimeError(fmt::format("stage '{}' bin {}: {}", g_.stage(s).name, bin, e.what()));
    }
  }

  void run_one(int worker, int k, int pos, int bin, const Primitive& p, UnitState& unit) {
    const int s = m_.kernels[k].stages[pos];
    const ProcessContext ctx = context(s, bin, worker);
    KernelEmitter em(*this, worker, k, pos, bin, unit);
    ++counters_[worker].processed[s];
    try {
      g_.stage(s).process.run_one(p, ctx, em);
    } catch (...) {
      rethrow_with_context(s, bin);
    }
  }

  void run_list(int worker, int k, int pos, const PrimitiveList& list, std::size_t b, std::size_t e, int bin,
                UnitState& unit) {
    const int s = m_.kernels[k].stages[pos];
    const ProcessContext ctx = context(s, bin, worker);
    KernelEmitter em(*this, worker, k, pos, bin, unit);
    counters_[worker].processed[s] += e - b;
    try {
      g_.stage(s).process.run(list, b, e, ctx, em);
    } catch (...) {
      rethrow_with_context(s, bin);
    }
  }

  // One work unit: the lead stage over [b, e) of a bin, then any fused stages
  // that wait behind a per-bin barrier.
  void exec_unit(int worker, int k, const PrimitiveList& list, std::size_t b, std::size_t e, int bin) {
    const Kernel& K = m_.kernels[k];
    UnitState unit;
    unit.local.resize(K.stages.size());
    run_list(worker, k, 0, list, b, e, bin, unit);
    for (std::size_t pos = 1; pos < K.stages.size(); ++pos) {
      auto pending = std::move(unit.local[pos]);
      unit.local[pos].clear();
      for (auto& [bin2, l] : pending) run_list(worker, k, static_cast<int>(pos), l, 0, size(l), bin2, unit);
    }
  }

  Dispatch effective_dispatch(const Kernel& K, int* split) const {
    *split = K.tile_split_size;
    if (K.dispatch != Dispatch::RuntimeSchedule) return K.dispatch;
    const ScheduleDirective& d = m_.skeleton.stages[K.stages[0]].schedule;
    switch (d.kind) {
      case ScheduleKind::LoadBalance: return Dispatch::HardwareLoadBalance;
      case ScheduleKind::DirectMap: return Dispatch::PreScheduledMap;
      case ScheduleKind::Serialize: return Dispatch::SerializeToOne;
      case ScheduleKind::All: *split = d.tile_split_size.value_or(0); return Dispatch::SplitAll;
    }
    return Dispatch::HardwareLoadBalance;
  }

  void run_kernel(int k, const std::vector<int>* filter) {
    const Kernel& K = m_.kernels[k];
    const int lead = K.stages[0];
    BinStore& store = *stores_[lead];
    std::vector<int> bins;
    if (filter) {
      for (int b : *filter)
        if (store.size(b) > 0) bins.push_back(b);
    } else {
      bins = store.non_empty_bins();
    }
    if (bins.empty()) return;

    StageStats& st = stats_.stages[lead];
    for (int b : bins) {
      const std::uint64_t n = store.size(b);
      ++st.occupancy[occupancy_bucket(n)];
      st.max_bin = std::max(st.max_bin, n);
    }

    const auto t0 = Clock::now();
    const int W = pool_.size();
    int split = 0;
    const Dispatch dispatch = effective_dispatch(K, &split);
    std::uint64_t generated = 0;
    std::vector<std::atomic<std::uint32_t>> done;

    if (dispatch == Dispatch::SplitAll) {
      for (int b : bins) {
        const PrimitiveList list = store.take(b);
        const auto chunks = split_chunks(size(list), split, W);
        std::vector<std::atomic<std::uint32_t>> chunk_done(chunks.size());
        std::atomic<std::size_t> next{0};
        pool_.run([&](int w) {
          for (std::size_t i; (i = next.fetch_add(1)) < chunks.size();) {
            exec_unit(w, k, list, chunks[i].first, chunks[i].second, b);
            chunk_done[i].fetch_add(1);
          }
        });
        generated += chunks.size();
        tally(chunk_done);
      }
    } else {
      done = std::vector<std::atomic<std::uint32_t>>(bins.size());
      auto unit = [&](int w, std::size_t i) {
        const PrimitiveList list = store.take(bins[i]);
        exec_unit(w, k, list, 0, size(list), bins[i]);
        done[i].fetch_add(1);
      };
      if (dispatch == Dispatch::HardwareLoadBalance) {
        std::atomic<std::size_t> next{0};
        pool_.run([&](int w) {
          for (std::size_t i; (i = next.fetch_add(1)) < bins.size();) unit(w, i);
        });
      } else {
        const bool serial = dispatch == Dispatch::SerializeToOne;
        pool_.run([&](int w) {
          for (std::size_t i = 0; i < bins.size(); ++i)
            if (serial ? w == 0 : bins[i] % W == w) unit(w, i);
        });
      }
      generated = bins.size();
      tally(done);
    }
    stats_.units_generated += generated;
    for (auto& s : stores_) s->seal();

    KernelStats& ks = stats_.kernels[k];
    ks.ms += ms_since(t0);
    ++ks.launches;
    ks.units += generated;
  }

  void tally(const std::vector<std::atomic<std::uint32_t>>& done) {
    for (const auto& d : done) {
      const std::uint32_t v = d.load();
      stats_.units_completed += v;
      if (v != 1) ++stats_.units_not_exactly_once;
    }
  }

  void inject(const PrimitiveList& input, std::size_t begin, std::size_t end) {
    std::vector<int> bins;
    for (Route& r : injection_) {
      const int s = r.consumer;
      if (g_.stage(s).input_type != type_of(input)) continue;
      for (std::size_t i = begin; i < end; ++i) {
        Primitive p = element(input, i);
        bins.clear();
        assign_bins(-1, r, p, 0, bins);
        for (std::size_t j = 0; j < bins.size(); ++j) {
          stores_[s]->append(0, bins[j], j + 1 == bins.size() ? std::move(p) : Primitive(p));
          ++stats_.stages[s].received;
        }
      }
      stores_[s]->seal();
    }
  }

  void run_kernels() {
    const int K = static_cast<int>(m_.kernels.size());
    for (int k = 0; k < K;) {
      const Kernel& kernel = m_.kernels[k];
      int end = k + 1;
      if (kernel.loop >= 0) {
        while (end < K && m_.kernels[end].loop == kernel.loop) ++end;
        run_loop(k, end);
      } else if (kernel.group >= 0) {
        while (end < K && m_.kernels[end].group == kernel.group) ++end;
        run_group(k, end);
      } else {
        run_kernel(k, nullptr);
      }
      k = end;
    }
  }

  void run_loop(int k0, int k1) {
    std::vector<int> stages;
    for (int k = k0; k < k1; ++k)
      for (int s : m_.kernels[k].stages) stages.push_back(s);
    auto busy = [&] {
      return std::any_of(stages.begin(), stages.end(), [&](int s) { return !stores_[s]->empty(); });
    };
    int iterations = 0;
    while (busy()) {
      if (++iterations > config_.cycle_cap) {
        std::string names;
        for (int s : stages) names += (names.empty() ? "" : ", ") + g_.stage(s).name;
        throw RuntimeError(fmt::format("loop over {{{}}} exceeded the iteration cap of {}", names, config_.cycle_cap));
      }
      for (int k = k0; k < k1; ++k) run_kernel(k, nullptr);
    }
    LoopStats* ls = nullptr;
    for (auto& l : stats_.loops)
      if (l.stages.size() == stages.size() && l.stages[0] == g_.stage(stages[0]).name) ls = &l;
    if (!ls) {
      stats_.loops.emplace_back();
      ls = &stats_.loops.back();
      for (int s : stages) ls->stages.push_back(g_.stage(s).name);
    }
    ls->max_iterations = std::max(ls->max_iterations, iterations);
    ls->total_iterations += static_cast<std::uint64_t>(iterations);
  }

  void run_group(int k0, int k1) {
    std::vector<BinGrid> grids;
    std::vector<bool> blocking;
    for (int k = k0; k < k1; ++k) {
      const Kernel& K = m_.kernels[k];
      grids.push_back(grids_[K.stages[0]]);
      bool block = K.entry_sync != SyncKind::None;
      for (SyncKind s : K.fused_sync) block |= s != SyncKind::None;
      blocking.push_back(block);
    }
    const DepthFirstPlan plan = depth_first_plan(grids, blocking);
    for (const Launch& l : plan.sweep) run_kernel(k0 + l.position, &l.bins);
    for (const Launch& l : plan.resume) run_kernel(k0 + l.position, nullptr);
  }

  const PipelineGraph& g_;
  const KernelMapping& m_;
  const RenderParams& params_;
  RuntimeConfig config_;
  WorkerPool& pool_;
  std::shared_ptr<RenderTargets> targets_;
  std::vector<BinGrid> grids_;
  std::vector<std::unique_ptr<BinStore>> stores_;
  std::vector<std::vector<std::vector<Route>>> routes_;  // [stage][channel]
  std::vector<Route> injection_;
  std::vector<WorkerCounters> counters_;
  RunStats stats_;
};

void KernelEmitter::emit_primitive(int channel, Primitive&& p) {
  ex_.deliver(worker_, kernel_, pos_, bin_, channel, std::move(p), unit_);
}

}  // namespace

RunResult execute(const PipelineGraph& graph, const KernelMapping& mapping, const PrimitiveList& input,
                  const RenderParams& params, const RuntimeConfig& config, WorkerPool* pool) {
  std::optional<WorkerPool> own;
  if (!pool) {
    own.emplace(config.workers);
    pool = &*own;
  }
  Executor ex(graph, mapping, params, config, *pool);
  return ex.run(input);
}

}  // namespace binpipe
