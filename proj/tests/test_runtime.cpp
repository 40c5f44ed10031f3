#include <gtest/gtest.h>

#include <set>
#include <thread>

#include "binpipe/bin_store.hpp"
#include "binpipe/pipelines.hpp"
#include "binpipe/runtime.hpp"
#include "binpipe/scenes.hpp"
#include "support.hpp"

using namespace binpipe;
using binpipe::testing::token_stage;
using binpipe::testing::tokens;

namespace {

const Screen kScreen{256, 128};

PrimitiveList token_list(int n, unsigned seed = 7) {
  PrimitiveList l = make_list(PrimitiveType::Token);
  for (auto& t : tokens(n, kScreen, seed)) push(l, Primitive{t});
  return l;
}

RunResult run(const PipelineGraph& g, const PrimitiveList& in, int workers, std::size_t strip = 65536, int cap = 32) {
  RenderParams params;
  params.screen = g.screen();
  params.camera = default_camera(g.screen());
  return execute(g, synthesize(g), in, params, RuntimeConfig{workers, cap, strip});
}

// A -> B -> C with mixed bin sizes and schedules.
PipelineGraph chain() {
  PipelineGraph g(kScreen);
  g.add_stage(token_stage("A", 1, {}, BinAssignDirective::to_all(), {ScheduleKind::All, 16}));
  g.add_stage(token_stage("B", 1, {32, 32, 1}, BinAssignDirective::bounding_box()));
  g.add_stage(token_stage("C", 0, {16, 16, 1}, BinAssignDirective::bounding_box(),
                          {ScheduleKind::DirectMap, std::nullopt}));
  g.connect("A", 0, "B");
  g.connect("B", 0, "C");
  return g;
}

// Tokens circle through Bounce until they have made three hops.
StageDecl bounce(int max_hops) {
  StageDecl d = token_stage("Bounce", 2);
  d.process = ProcessPhase::per_primitive<Token>("bounce", [max_hops](const Token& t, const ProcessContext&, Emitter& em) {
    Token next = t;
    ++next.hops;
    em.emit(next.hops < static_cast<std::uint32_t>(max_hops) ? 0 : 1, next);
  });
  return d;
}

PipelineGraph bounce_graph(int max_hops) {
  PipelineGraph g(kScreen);
  g.add_stage(bounce(max_hops));
  g.add_stage(token_stage("Sink", 0));
  g.connect("Bounce", 0, "Bounce");
  g.connect("Bounce", 1, "Sink");
  return g;
}

}  // namespace

TEST(Runtime, SplitChunks) {
  using Chunks = std::vector<std::pair<std::size_t, std::size_t>>;
  EXPECT_EQ(split_chunks(130, 64, 4), (Chunks{{0, 64}, {64, 128}, {128, 130}}));
  EXPECT_EQ(split_chunks(0, 64, 4), Chunks{});
  const Chunks even = split_chunks(10, 0, 4);
  std::size_t covered = 0;
  for (const auto& [b, e] : even) {
    EXPECT_EQ(b, covered);
    EXPECT_LE(e - b, 3u);
    covered = e;
  }
  EXPECT_EQ(covered, 10u);
}

TEST(Runtime, PrescheduledAssignment) {
  const std::vector<int> bins = {0, 1, 2, 3, 4, 5, 6, 7};
  const auto map = prescheduled_assignment(bins, 4, Dispatch::PreScheduledMap);
  ASSERT_EQ(map.size(), 4u);
  for (int w = 0; w < 4; ++w) EXPECT_EQ(map[w], (std::vector<int>{w, w + 4}));
  const auto one = prescheduled_assignment(bins, 4, Dispatch::SerializeToOne);
  EXPECT_EQ(one[0], bins);
  for (int w = 1; w < 4; ++w) EXPECT_TRUE(one[w].empty());
}

TEST(Runtime, TokensProcessedExactlyOnce) {
  const PrimitiveList in = token_list(5000);
  for (int workers : {1, 2, 4, 8}) {
    const RunResult r = run(chain(), in, workers);
    EXPECT_TRUE(r.stats.exactly_once()) << workers;
    EXPECT_EQ(r.stats.lost_primitives, 0u);
    for (const char* s : {"A", "B", "C"}) EXPECT_EQ(r.stats.stage(s)->processed, 5000u) << s << " " << workers;
  }
}

TEST(Runtime, StripMiningKeepsCounts) {
  const PrimitiveList in = token_list(1000);
  const RunResult r = run(chain(), in, 4, 64);
  EXPECT_EQ(r.stats.batches, 16u);
  EXPECT_EQ(r.stats.stage("C")->processed, 1000u);
  EXPECT_TRUE(r.stats.exactly_once());
}

TEST(Runtime, EmptyInputGivesBackground) {
  const PipelineGraph g = build_variant("binned", {64, 48});
  const Scene empty{"empty", make_list(PrimitiveType::MeshTriangle), std::nullopt};
  RenderParams p;
  p.screen = g.screen();
  p.camera = default_camera(p.screen);
  const RunResult r = execute(g, synthesize(g), empty.primitives, p, RuntimeConfig{2, 32, 65536});
  EXPECT_EQ(r.image, Framebuffer(64, 48, kBackground));
  EXPECT_TRUE(r.stats.exactly_once());
}

TEST(Runtime, LoopRunsUntilEmpty) {
  const RunResult r = run(bounce_graph(3), token_list(100), 2);
  EXPECT_EQ(r.stats.stage("Bounce")->processed, 300u);
  EXPECT_EQ(r.stats.stage("Sink")->processed, 100u);
  ASSERT_EQ(r.stats.loops.size(), 1u);
  EXPECT_EQ(r.stats.loops[0].max_iterations, 3);
}

TEST(Runtime, LoopCapNamesTheStage) {
  try {
    run(bounce_graph(1000), token_list(10), 1, 65536, 5);
    FAIL() << "expected RuntimeError";
  } catch (const RuntimeError& e) {
    EXPECT_NE(std::string(e.what()).find("Bounce"), std::string::npos) << e.what();
  }
}

TEST(Runtime, PhaseErrorsCarryStageContext) {
  PipelineGraph g(kScreen);
  g.add_stage(token_stage("Src", 1));
  StageDecl bad = token_stage("Faulty", 0, {32, 32, 1}, BinAssignDirective::bounding_box());
  bad.process = ProcessPhase::per_primitive<Token>("faulty", [](const Token& t, const ProcessContext&, Emitter&) {
    if (t.id == 17) throw std::runtime_error("bad token");
  });
  g.add_stage(bad);
  g.connect("Src", 0, "Faulty");
  for (int workers : {1, 4}) {
    try {
      run(g, token_list(100), workers);
      FAIL() << "expected RuntimeError";
    } catch (const RuntimeError& e) {
      const std::string msg = e.what();
      EXPECT_NE(msg.find("Faulty"), std::string::npos) << msg;
      EXPECT_NE(msg.find("bad token"), std::string::npos) << msg;
    }
  }
}

TEST(Runtime, FusedEdgesStoreNothing) {
  PipelineGraph g(kScreen);
  const ScheduleDirective dm{ScheduleKind::DirectMap, std::nullopt};
  g.add_stage(token_stage("A", 1, {32, 32, 1}, BinAssignDirective::bounding_box(), dm));
  g.add_stage(token_stage("B", 0, {32, 32, 1}, BinAssignDirective::previous(), dm));
  g.connect("A", 0, "B");
  ASSERT_EQ(synthesize(g).kernels.size(), 1u);
  const RunResult r = run(g, token_list(500), 4);
  ASSERT_EQ(r.stats.traffic.size(), 1u);
  EXPECT_TRUE(r.stats.traffic[0].fused);
  EXPECT_EQ(r.stats.traffic[0].stored, 0u);
  EXPECT_EQ(r.stats.traffic[0].direct, 500u);
  EXPECT_EQ(r.stats.stage("B")->processed, 500u);
}

TEST(Runtime, StatsJsonFields) {
  const RunResult r = run(chain(), token_list(50), 2);
  const nlohmann::json j = r.stats.to_json();
  for (const char* k : {"workers", "kernels", "stages", "traffic", "exactly_once", "lost_primitives"})
    EXPECT_TRUE(j.contains(k)) << k;
}

TEST(BinStore, ConcurrentAppendsAreAllVisible) {
  constexpr int kWorkers = 8, kBins = 16, kPer = 2000;
  BinStore store(PrimitiveType::Token, kBins, kWorkers);
  std::vector<std::thread> threads;
  for (int w = 0; w < kWorkers; ++w)
    threads.emplace_back([&, w] {
      for (int i = 0; i < kPer; ++i)
        store.append(w, i % kBins, Primitive{Token{static_cast<std::uint64_t>(w * kPer + i), 0, 0, 0}});
    });
  for (auto& t : threads) t.join();
  store.seal();
  EXPECT_EQ(store.total(), static_cast<std::size_t>(kWorkers * kPer));
  std::set<std::uint64_t> ids;
  for (int b = 0; b < kBins; ++b) {
    const PrimitiveList l = store.take(b);
    for (const auto& t : std::get<std::vector<Token>>(l)) ids.insert(t.id);
  }
  EXPECT_EQ(ids.size(), static_cast<std::size_t>(kWorkers * kPer));
  EXPECT_TRUE(store.empty());
}

TEST(BinStore, ShardsLandInWorkerOrder) {
  BinStore store(PrimitiveType::Token, 1, 3);
  store.append(2, 0, Primitive{Token{2, 0, 0, 0}});
  store.append(0, 0, Primitive{Token{0, 0, 0, 0}});
  store.append(1, 0, Primitive{Token{1, 0, 0, 0}});
  store.seal();
  const PrimitiveList l = store.take(0);
  const auto& v = std::get<std::vector<Token>>(l);
  ASSERT_EQ(v.size(), 3u);
  for (std::uint64_t i = 0; i < 3; ++i) EXPECT_EQ(v[i].id, i);
}

TEST(WorkerPool, RethrowsWorkerException) {
  WorkerPool pool(4);
  EXPECT_THROW(pool.run([](int w) {
    if (w == 3) throw std::runtime_error("x");
  }),
               std::runtime_error);
  // Still usable afterwards.
  std::atomic<int> n = 0;
  pool.run([&](int) { ++n; });
  EXPECT_EQ(n.load(), 4);
}
