#include <benchmark/benchmark.h>

#include <random>
#include <thread>

#include "p2pbeam/cluster_tracking.hpp"
#include "p2pbeam/clustering.hpp"
#include "p2pbeam/latest_store.hpp"
#include "p2pbeam/pipeline.hpp"
#include "p2pbeam/scenario.hpp"

using namespace p2pbeam;

static void BM_DbscanDefaultFrame(benchmark::State& state) {
  const Scenario s(default_p_path_config(1));
  const auto frame = s.sample_point_cloud(10, 3);
  const DbscanParams params;
  for (auto _ : state) benchmark::DoNotOptimize(dbscan(frame.points, params));
  state.counters["points"] = static_cast<double>(frame.points.size());
}
BENCHMARK(BM_DbscanDefaultFrame)->Unit(benchmark::kMicrosecond);

static void BM_MatchClusters(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> pos(-5.0, 5.0);
  ClusterFrame prev, curr;
  for (int i = 0; i < n; ++i) {
    Cluster a, b;
    a.label = i;
    a.core_point = Vec2(pos(rng), pos(rng));
    b.label = 100 + i;
    b.core_point = Vec2(pos(rng), pos(rng));
    prev.clusters.push_back(a);
    curr.clusters.push_back(b);
  }
  for (auto _ : state) benchmark::DoNotOptimize(match_clusters(prev, curr));
}
BENCHMARK(BM_MatchClusters)->Arg(2)->Arg(6)->Arg(16)->Arg(64);

static void BM_LatestStoreSnapshot(benchmark::State& state) {
  LatestStore store({0, 1});
  std::atomic<bool> stop{false};
  std::jthread writer([&] {
    ImuSample s;
    for (std::uint32_t seq = 1; !stop.load(std::memory_order_relaxed); ++seq) {
      s.client_id = seq % 2;
      s.seq = seq;
      store.publish(s, seq);
    }
  });
  for (auto _ : state) benchmark::DoNotOptimize(store.snapshot(0));
  stop = true;
}
BENCHMARK(BM_LatestStoreSnapshot);

static void BM_FullRun(benchmark::State& state) {
  const auto cfg = default_p_path_config(5);
  RunOptions o;
  o.mode = RunMode::kBoth;
  for (auto _ : state) benchmark::DoNotOptimize(run_scenario(cfg, o));
}
BENCHMARK(BM_FullRun)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
