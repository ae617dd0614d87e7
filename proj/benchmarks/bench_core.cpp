#include <benchmark/benchmark.h>

#include "uavnet/agent.hpp"
#include "uavnet/channel.hpp"
#include "uavnet/highway_env.hpp"
#include "uavnet/rng.hpp"

using namespace uavnet;

static void BM_LinkBudget(benchmark::State& state) {
  ChannelParams params;
  BaseStation bs;
  bs.pose = {100.0, 40.0, 0.0};
  bs.element_count = 8;
  const Pose3 uav{400.0, 10.0, 100.0};
  for (auto _ : state) {
    benchmark::DoNotOptimize(received_power_dbm(bs, uav, params));
  }
}
BENCHMARK(BM_LinkBudget);

static void BM_EnvStep(benchmark::State& state) {
  HighwayConfig cfg;
  HighwayEnv env(cfg);
  env.reset(7);
  Rng rng(3);
  std::vector<BranchedAction> actions(cfg.uav_count);
  for (auto _ : state) {
    if (env.done()) env.reset(rng.next_u64());
    for (auto& a : actions) {
      a.transport = static_cast<int>(rng.uniform_int(kTransportActionCount));
      a.assoc = static_cast<int>(rng.uniform_int(cfg.assoc_slots));
    }
    benchmark::DoNotOptimize(env.step(actions));
  }
}
BENCHMARK(BM_EnvStep);

static void BM_ForwardOne(benchmark::State& state) {
  Rng rng(1);
  NetOptions o;
  o.input_size = 32;
  o.assoc_actions = 4;
  BranchingNet net(o, rng);
  Observation s(o.input_size);
  for (auto& x : s) x = rng.uniform(-1, 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(net.forward_one(s));
  }
}
BENCHMARK(BM_ForwardOne);

static void BM_TrainStep(benchmark::State& state) {
  TrainConfig cfg;
  cfg.warmup_transitions = 64;
  BdqAgent agent(33, 4, cfg, true, 5);
  Rng rng(9);
  for (int i = 0; i < 2000; ++i) {
    Transition tr;
    tr.s.resize(33);
    tr.s2.resize(33);
    for (auto& x : tr.s) x = rng.uniform(-1, 1);
    for (auto& x : tr.s2) x = rng.uniform(-1, 1);
    tr.a.transport = static_cast<int>(rng.uniform_int(kTransportActionCount));
    tr.a.assoc = static_cast<int>(rng.uniform_int(4));
    tr.r_tran = rng.uniform(0, 0.5);
    tr.r_tele = rng.uniform(0, 1);
    agent.observe(std::move(tr));
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(agent.train_step());
  }
}
BENCHMARK(BM_TrainStep);

BENCHMARK_MAIN();
