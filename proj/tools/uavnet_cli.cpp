// uavnet command line: seeded training runs, greedy evaluation, parameter
// sweeps and trace replay for the UAV highway simulator.

#include <cstdint>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "uavnet/experiment.hpp"
#include "uavnet/trace.hpp"

namespace {

uavnet::KeyValueConfig load_scenario(const std::string& path) {
  return uavnet::KeyValueConfig::load_file(path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"uavnet: multi-UAV aerial highway simulator and DRL harness"};
  app.require_subcommand(1);

  // --- train ---
  auto* train = app.add_subcommand("train", "run a seeded training run");
  std::string train_config, train_out, train_algo = "BDDQN";
  std::uint64_t train_seed = 0;
  int train_episodes = 1500, train_trace_eps = 0, train_ckpt_period = 500;
  bool train_resume = false;
  train->add_option("--config", train_config, "scenario config or manifest file")->required();
  train->add_option("--out", train_out, "output directory")->required();
  train->add_option("--seed", train_seed, "master seed")->required();
  train->add_option("--algo", train_algo, "BDQN | BDDQN | DDQN | SDB");
  train->add_option("--episodes", train_episodes, "training episodes");
  train->add_option("--trace-episodes", train_trace_eps, "export traces for the first N episodes");
  train->add_option("--checkpoint-period", train_ckpt_period, "episodes between checkpoints");
  train->add_flag("--resume", train_resume, "resume from an existing checkpoint in --out");

  // --- eval ---
  auto* eval = app.add_subcommand("eval", "greedy evaluation of checkpoints");
  std::string eval_config, eval_out;
  std::vector<std::string> eval_ckpts;
  bool eval_sdb = false;
  int eval_episodes = 100;
  std::uint64_t eval_seed = 1;
  eval->add_option("--config", eval_config, "scenario config (required for --sdb)");
  eval->add_option("--checkpoint", eval_ckpts, "checkpoint file (repeatable)");
  eval->add_flag("--sdb", eval_sdb, "include the SDB baseline");
  eval->add_option("--eval-episodes", eval_episodes, "episodes per evaluation");
  eval->add_option("--seed", eval_seed, "eval episode seed base (shared across rows)");
  eval->add_option("--out", eval_out, "write the report to this file");

  // --- sweep ---
  auto* sweep = app.add_subcommand("sweep", "train+eval over a parameter axis");
  std::string sweep_config, sweep_out, sweep_axis = "speed", sweep_algo = "BDDQN";
  std::vector<double> sweep_values;
  std::vector<std::uint64_t> sweep_seeds;
  int sweep_episodes = 1500, sweep_eval_episodes = 100, sweep_jobs = 2;
  sweep->add_option("--config", sweep_config, "scenario config file")->required();
  sweep->add_option("--out", sweep_out, "output directory")->required();
  sweep->add_option("--axis", sweep_axis, "speed (env.v_max_mps) or bs (env.bs_count)");
  sweep->add_option("--values", sweep_values, "axis values")->required();
  sweep->add_option("--seeds", sweep_seeds, "seeds (default 1 2 3)");
  sweep->add_option("--algo", sweep_algo, "BDQN | BDDQN | DDQN | SDB");
  sweep->add_option("--episodes", sweep_episodes, "training episodes per cell");
  sweep->add_option("--eval-episodes", sweep_eval_episodes, "eval episodes per cell");
  sweep->add_option("--jobs", sweep_jobs, "concurrent cells");

  // --- replay-trace ---
  auto* replay = app.add_subcommand("replay-trace", "re-simulate a trace and verify it");
  std::string replay_path;
  replay->add_option("--trace", replay_path, "trace csv file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) {
      uavnet::RunSettings rs;
      rs.scenario = load_scenario(train_config);
      rs.algo = uavnet::algo_from_string(train_algo);
      rs.episodes = train_episodes;
      rs.seed = train_seed;
      rs.out_dir = train_out;
      rs.trace_episodes = train_trace_eps;
      rs.checkpoint_period = train_ckpt_period;
      rs.resume = train_resume;
      const auto metrics = uavnet::run_training(rs);
      std::printf("trained %zu episodes (%s, seed %llu) -> %s\n", metrics.size(),
                  train_algo.c_str(), static_cast<unsigned long long>(train_seed),
                  train_out.c_str());
    } else if (*eval) {
      uavnet::EvalSettings es;
      if (!eval_config.empty()) es.scenario = load_scenario(eval_config);
      if (eval_sdb && eval_config.empty()) {
        throw std::runtime_error("eval --sdb requires --config");
      }
      es.checkpoints = eval_ckpts;
      es.include_sdb = eval_sdb;
      es.eval_episodes = eval_episodes;
      es.seed = eval_seed;
      es.out_path = eval_out;
      const uavnet::EvalReport report = uavnet::evaluate(es);
      std::cout << report.text;
    } else if (*sweep) {
      uavnet::SweepSettings ss;
      ss.scenario = load_scenario(sweep_config);
      ss.algo = uavnet::algo_from_string(sweep_algo);
      ss.axis = sweep_axis;
      ss.values = sweep_values;
      if (!sweep_seeds.empty()) ss.seeds = sweep_seeds;
      ss.episodes = sweep_episodes;
      ss.eval_episodes = sweep_eval_episodes;
      ss.out_dir = sweep_out;
      ss.jobs = sweep_jobs;
      uavnet::run_sweep(ss);
      std::printf("sweep complete -> %s/sweep_results.csv\n", sweep_out.c_str());
    } else if (*replay) {
      const std::string mismatch = uavnet::verify_trace_file(replay_path);
      if (mismatch.empty()) {
        const uavnet::Trace t = uavnet::load_trace(replay_path);
        std::printf("replay OK: %zu rows reproduced bit-exactly\n", t.rows.size());
      } else {
        std::fprintf(stderr, "replay FAILED: %s\n", mismatch.c_str());
        return 1;
      }
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
