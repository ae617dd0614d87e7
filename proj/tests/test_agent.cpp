#include "doctest.h"
#include "uavnet/agent.hpp"
#include "uavnet/checkpoint.hpp"
#include "uavnet/rng.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

using namespace uavnet;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

Transition make_transition(int obs_size, int k2, Rng& rng) {
  Transition tr;
  tr.s.resize(obs_size);
  tr.s2.resize(obs_size);
  for (auto& x : tr.s) x = rng.uniform(-1, 1);
  for (auto& x : tr.s2) x = rng.uniform(-1, 1);
  tr.a.transport = static_cast<int>(rng.uniform_int(kTransportActionCount));
  tr.a.assoc = static_cast<int>(rng.uniform_int(k2));
  tr.r_tran = rng.uniform(0, 0.5);
  tr.r_tele = rng.uniform(0, 1);
  tr.terminal = rng.uniform01() < 0.1;
  return tr;
}

TrainConfig small_train() {
  TrainConfig cfg;
  cfg.trunk1_units = 12;
  cfg.trunk2_units = 12;
  cfg.head_hidden_units = 8;
  cfg.buffer_capacity = 256;
  cfg.warmup_transitions = 16;
  cfg.batch_size = 8;
  return cfg;
}

std::string file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("binary container primitives round trip and detect truncation") {
  const std::string path = temp_path("uavnet_bin_test.bin");
  {
    BinaryWriter w(path);
    write_checkpoint_header(w);
    w.str("BDDQN");
    w.u32(42);
    w.i64(-7);
    w.f64(0.1 + 0.2);
    w.vec({1.0, -2.5, 3e-17});
    w.close();
  }
  {
    BinaryReader r(path);
    check_checkpoint_header(r);
    CHECK(r.str() == "BDDQN");
    CHECK(r.u32() == 42);
    CHECK(r.i64() == -7);
    CHECK(r.f64() == 0.1 + 0.2);
    const auto v = r.vec();
    REQUIRE(v.size() == 3);
    CHECK(v[2] == 3e-17);
    CHECK_THROWS(r.u32());  // past the end
  }
  CHECK(checkpoint_algo(path) == "BDDQN");

  // corrupt magic
  {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << "garbagegarbagegarbage";
  }
  BinaryReader bad(path);
  CHECK_THROWS(check_checkpoint_header(bad));
  std::filesystem::remove(path);
}

TEST_CASE("epsilon schedule: linear head, flat tail") {
  TrainConfig cfg;
  cfg.eps_start = 1.0;
  cfg.eps_end = 0.01;
  cfg.eps_decay_frac = 0.3;
  CHECK(epsilon_at(cfg, 0, 1000) == doctest::Approx(1.0));
  CHECK(epsilon_at(cfg, 150, 1000) == doctest::Approx(0.505));
  CHECK(epsilon_at(cfg, 300, 1000) == doctest::Approx(0.01));
  CHECK(epsilon_at(cfg, 999, 1000) == doctest::Approx(0.01));
}

TEST_CASE("algo names round trip") {
  for (auto a : {Algo::kBdqn, Algo::kBddqn, Algo::kDdqn, Algo::kSdb}) {
    CHECK(algo_from_string(algo_to_string(a)) == a);
  }
  CHECK(algo_from_string("bddqn") == Algo::kBddqn);
  CHECK_THROWS(algo_from_string("dqn2000"));
}

TEST_CASE("train_step loss matches the hand-computed single-transition loss") {
  TrainConfig cfg = small_train();
  cfg.batch_size = 1;
  cfg.warmup_transitions = 1;
  BdqAgent agent(6, 3, cfg, true, 99);
  Rng rng(100);
  const Transition tr = make_transition(6, 3, rng);
  agent.observe(tr);

  const double y = agent.td_target(tr);
  const auto out = agent.online().forward_one(tr.s);
  const double e1 = out.q1[tr.a.transport] - y;
  const double e2 = out.q2[tr.a.assoc] - y;
  const double expected = (e1 * e1 + e2 * e2) / 2.0;
  CHECK(agent.train_step() == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("bdq agent checkpoint: bit-exact save/load/save") {
  TrainConfig cfg = small_train();
  BdqAgent agent(8, 3, cfg, true, 7);
  Rng rng(8);
  for (int i = 0; i < 200; ++i) {
    agent.observe(make_transition(8, 3, rng));
    agent.train_step();
  }
  const std::string p1 = temp_path("uavnet_agent_a.ckpt");
  const std::string p2 = temp_path("uavnet_agent_b.ckpt");
  {
    BinaryWriter w(p1);
    agent.save(w);
    w.close();
  }
  BdqAgent loaded(8, 3, cfg, true, 123456);  // different seed; state overwritten by load
  {
    BinaryReader r(p1);
    loaded.load(r);
  }
  {
    BinaryWriter w(p2);
    loaded.save(w);
    w.close();
  }
  CHECK(file_bytes(p1) == file_bytes(p2));

  // behavioral equality: identical greedy actions and targets
  for (int i = 0; i < 20; ++i) {
    const Transition tr = make_transition(8, 3, rng);
    const auto a = agent.greedy_action(tr.s);
    const auto b = loaded.greedy_action(tr.s);
    CHECK(a.transport == b.transport);
    CHECK(a.assoc == b.assoc);
    CHECK(agent.td_target(tr) == loaded.td_target(tr));
  }

  // shape mismatch rejected
  BdqAgent wrong(9, 3, cfg, true, 1);
  BinaryReader r(p1);
  CHECK_THROWS(wrong.load(r));
  std::filesystem::remove(p1);
  std::filesystem::remove(p2);
}

TEST_CASE("ddqn agent checkpoint round trip") {
  TrainConfig cfg = small_train();
  DdqnAgent agent(8, 3, cfg, 7);
  Rng rng(9);
  for (int i = 0; i < 100; ++i) {
    agent.observe(make_transition(8, 3, rng));
    agent.train_step();
  }
  const std::string p = temp_path("uavnet_agent_ddqn.ckpt");
  {
    BinaryWriter w(p);
    agent.save(w);
    w.close();
  }
  DdqnAgent loaded(8, 3, cfg, 55);
  {
    BinaryReader r(p);
    loaded.load(r);
  }
  for (int i = 0; i < 10; ++i) {
    const Transition tr = make_transition(8, 3, rng);
    CHECK(agent.td_target(tr) == loaded.td_target(tr));
  }
  std::filesystem::remove(p);
}
