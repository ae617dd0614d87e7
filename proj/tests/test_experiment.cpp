#include "doctest.h"
#include "uavnet/experiment.hpp"
#include "uavnet/trace.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace uavnet;
namespace fs = std::filesystem;

namespace {

KeyValueConfig tiny_scenario() {
  KeyValueConfig c;
  c.set_int("env.uav_count", 2);
  c.set_int("env.bs_count", 4);
  c.set_int("env.horizon_steps", 6);
  c.set_double("env.highway_length_m", 600);
  c.set_double("env.spawn_window_m", 120);
  c.set_int("train.trunk1_units", 16);
  c.set_int("train.trunk2_units", 16);
  c.set_int("train.head_hidden_units", 8);
  c.set_int("train.buffer_capacity", 512);
  c.set_int("train.warmup_transitions", 16);
  c.set_int("train.batch_size", 8);
  return c;
}

std::string fresh_dir(const std::string& name) {
  const std::string d = (fs::temp_directory_path() / name).string();
  fs::remove_all(d);
  return d;
}

std::string file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("SDB run: metrics only, no learning, one row per episode") {
  RunSettings rs;
  rs.scenario = tiny_scenario();
  rs.algo = Algo::kSdb;
  rs.episodes = 3;
  rs.seed = 5;
  rs.out_dir = fresh_dir("uavnet_run_sdb");
  const auto metrics = run_training(rs);
  REQUIRE(metrics.size() == 3);
  for (const auto& m : metrics) {
    CHECK(std::isnan(m.loss_mean));
    CHECK(m.epsilon == 0.0);
    CHECK(m.steps >= 1);
  }
  CHECK(fs::exists(rs.out_dir + "/metrics.csv"));
  CHECK(fs::exists(rs.out_dir + "/manifest.txt"));
}

TEST_CASE("episodes=1 gives exactly one metrics row") {
  RunSettings rs;
  rs.scenario = tiny_scenario();
  rs.algo = Algo::kBddqn;
  rs.episodes = 1;
  rs.seed = 2;
  rs.out_dir = fresh_dir("uavnet_run_one");
  CHECK(run_training(rs).size() == 1);
}

TEST_CASE("unknown config keys are rejected before any compute") {
  RunSettings rs;
  rs.scenario = tiny_scenario();
  rs.scenario.set_int("env.lane_cont", 4);  // typo
  rs.algo = Algo::kSdb;
  rs.episodes = 1;
  rs.out_dir = fresh_dir("uavnet_run_badkey");
  CHECK_THROWS_WITH_AS(run_training(rs), doctest::Contains("env.lane_cont"),
                       std::runtime_error);
}

TEST_CASE("manifest re-run reproduces metrics byte-identically") {
  RunSettings rs;
  rs.scenario = tiny_scenario();
  rs.algo = Algo::kBddqn;
  rs.episodes = 4;
  rs.seed = 11;
  rs.out_dir = fresh_dir("uavnet_run_detA");
  run_training(rs);

  // identical settings, fresh dir
  RunSettings rs2 = rs;
  rs2.out_dir = fresh_dir("uavnet_run_detB");
  run_training(rs2);
  CHECK(file_bytes(rs.out_dir + "/metrics.csv") ==
        file_bytes(rs2.out_dir + "/metrics.csv"));

  // re-run from the manifest file itself
  RunSettings rs3;
  rs3.scenario = KeyValueConfig::load_file(rs.out_dir + "/manifest.txt");
  rs3.algo = rs.algo;
  rs3.episodes = rs.episodes;
  rs3.seed = rs.seed;
  rs3.out_dir = fresh_dir("uavnet_run_detC");
  run_training(rs3);
  CHECK(file_bytes(rs.out_dir + "/metrics.csv") ==
        file_bytes(rs3.out_dir + "/metrics.csv"));
  CHECK(file_bytes(rs.out_dir + "/manifest.txt") ==
        file_bytes(rs3.out_dir + "/manifest.txt"));
}

TEST_CASE("episode traces replay bit-exactly; tampering is caught") {
  RunSettings rs;
  rs.scenario = tiny_scenario();
  rs.algo = Algo::kBddqn;
  rs.episodes = 2;
  rs.seed = 21;
  rs.out_dir = fresh_dir("uavnet_run_trace");
  rs.trace_episodes = 2;
  run_training(rs);

  const std::string t0 = rs.out_dir + "/trace_ep0.csv";
  const std::string t1 = rs.out_dir + "/trace_ep1.csv";
  REQUIRE(fs::exists(t0));
  REQUIRE(fs::exists(t1));
  CHECK(verify_trace_file(t0) == "");
  CHECK(verify_trace_file(t1) == "");

  // flip one digit in a data row and expect a mismatch report
  std::string text = file_bytes(t0);
  const auto pos = text.rfind(",0,");  // some numeric field late in the file
  REQUIRE(pos != std::string::npos);
  text[pos + 1] = '1';
  const std::string tampered = rs.out_dir + "/trace_tampered.csv";
  std::ofstream(tampered) << text;
  CHECK(verify_trace_file(tampered) != "");
}

TEST_CASE("evaluate: deterministic report, columns, improvement footer") {
  RunSettings rs;
  rs.scenario = tiny_scenario();
  rs.algo = Algo::kBddqn;
  rs.episodes = 3;
  rs.seed = 31;
  rs.out_dir = fresh_dir("uavnet_run_eval");
  run_training(rs);

  EvalSettings es;
  es.scenario = tiny_scenario();
  es.checkpoints = {rs.out_dir + "/checkpoint.ckpt"};
  es.include_sdb = true;
  es.eval_episodes = 5;
  es.seed = 77;
  const EvalReport r1 = evaluate(es);
  const EvalReport r2 = evaluate(es);
  CHECK(r1.text == r2.text);
  REQUIRE(r1.rows.size() == 2);
  CHECK(r1.rows[0].algo == "BDDQN");
  CHECK(r1.rows[1].algo == "SDB");
  CHECK(r1.text.find("avg_r_tran") != std::string::npos);
  CHECK(r1.text.find("avg_r_tele") != std::string::npos);
  CHECK(r1.text.find("avg_ho_rate") != std::string::npos);
  CHECK(r1.text.find("(x - y) / y") != std::string::npos);

  // aggregation correctness: recompute mean and std from the raw episodes
  const auto eps = eval_episodes_for_checkpoint(es.checkpoints[0], es.eval_episodes, es.seed);
  double mean_tele = 0;
  for (const auto& m : eps) mean_tele += m.sum_r_tele;
  mean_tele /= eps.size();
  double var_tele = 0;
  for (const auto& m : eps) var_tele += (m.sum_r_tele - mean_tele) * (m.sum_r_tele - mean_tele);
  CHECK(r1.rows[0].mean_r_tele == doctest::Approx(mean_tele).epsilon(1e-12));
  CHECK(r1.rows[0].std_r_tele ==
        doctest::Approx(std::sqrt(var_tele / eps.size())).epsilon(1e-12));
}

TEST_CASE("metrics csv aggregation matches an independent recomputation") {
  RunSettings rs;
  rs.scenario = tiny_scenario();
  rs.algo = Algo::kSdb;
  rs.episodes = 4;
  rs.seed = 41;
  rs.out_dir = fresh_dir("uavnet_run_agg");
  const auto metrics = run_training(rs);

  std::ifstream in(rs.out_dir + "/metrics.csv");
  std::string line;
  std::getline(in, line);
  CHECK(line == metrics_csv_header());
  int rows = 0;
  double sum_from_file = 0;
  while (std::getline(in, line)) {
    ++rows;
    std::istringstream ss(line);
    std::string field;
    for (int i = 0; i <= 2; ++i) std::getline(ss, field, ',');
    sum_from_file += std::stod(field);  // sum_r_tran column
  }
  CHECK(rows == 4);
  double sum_direct = 0;
  for (const auto& m : metrics) sum_direct += m.sum_r_tran;
  CHECK(sum_from_file == doctest::Approx(sum_direct).epsilon(1e-12));
}

TEST_CASE("resume continues an interrupted run") {
  RunSettings rs;
  rs.scenario = tiny_scenario();
  rs.algo = Algo::kBddqn;
  rs.episodes = 3;
  rs.seed = 51;
  rs.out_dir = fresh_dir("uavnet_run_resume");
  run_training(rs);

  RunSettings more = rs;
  more.episodes = 6;
  more.resume = true;
  // manifest differs (episodes changed) -> rejected
  CHECK_THROWS(run_training(more));

  // same settings, resume: already complete, zero new episodes
  RunSettings same = rs;
  same.resume = true;
  CHECK(run_training(same).empty());

  std::ifstream in(rs.out_dir + "/metrics.csv");
  int lines = 0;
  std::string l;
  while (std::getline(in, l)) ++lines;
  CHECK(lines == 1 + 3);  // header + 3 episodes, not duplicated by the resume
}

TEST_CASE("sweep: cells, merged long-format table, smoothed curves") {
  SweepSettings ss;
  ss.scenario = tiny_scenario();
  ss.algo = Algo::kSdb;  // fast
  ss.axis = "speed";
  ss.values = {10.0, 20.0};
  ss.seeds = {1, 2};
  ss.episodes = 3;
  ss.eval_episodes = 2;
  ss.out_dir = fresh_dir("uavnet_sweep");
  ss.jobs = 2;
  ss.smoothing_window = 2;
  run_sweep(ss);

  CHECK(fs::exists(sweep_cell_dir(ss, 10.0, 1) + "/metrics.csv"));
  CHECK(fs::exists(sweep_cell_dir(ss, 20.0, 2) + "/eval_metrics.csv"));
  const std::string curves = file_bytes(sweep_cell_dir(ss, 10.0, 1) + "/curves.csv");
  CHECK(curves.find("# smoothing_window = 2") != std::string::npos);

  const std::string table = file_bytes(ss.out_dir + "/sweep_results.csv");
  std::istringstream ts(table);
  std::string line;
  std::getline(ts, line);
  CHECK(line == "axis,value,seed,metric,metric_value");
  int rows = 0;
  int speed10 = 0;
  while (std::getline(ts, line)) {
    ++rows;
    if (line.rfind("speed,10,", 0) == 0) ++speed10;
  }
  CHECK(rows == 2 * 2 * 7);  // cells x metrics
  CHECK(speed10 == 2 * 7);

  // determinism across sweep executions (threaded scheduling must not matter)
  SweepSettings ss2 = ss;
  ss2.out_dir = fresh_dir("uavnet_sweep2");
  run_sweep(ss2);
  CHECK(file_bytes(ss.out_dir + "/sweep_results.csv") ==
        file_bytes(ss2.out_dir + "/sweep_results.csv"));
}

TEST_CASE("per-UAV network mode trains") {
  RunSettings rs;
  rs.scenario = tiny_scenario();
  rs.scenario.set_bool("train.share_network", false);
  rs.algo = Algo::kBdqn;
  rs.episodes = 2;
  rs.seed = 61;
  rs.out_dir = fresh_dir("uavnet_run_peruav");
  const auto metrics = run_training(rs);
  CHECK(metrics.size() == 2);
}
