#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "uavnet/agent.hpp"
#include "uavnet/config.hpp"
#include "uavnet/highway_env.hpp"

namespace uavnet {

// Per-episode training/eval record; one metrics.csv row.
struct EpisodeMetrics {
  int episode = 0;
  int steps = 0;
  double sum_r_tran = 0.0;  // sum over steps of per-UAV mean r_tran
  double sum_r_tele = 0.0;
  double ho_rate = 0.0;  // mean over UAVs of ho_count/steps at episode end
  int collisions = 0;    // UAVs flagged in the episode
  double mean_speed = 0.0;
  double mean_rate_bps = 0.0;
  double epsilon = 0.0;
  double loss_mean = 0.0;  // NaN when no gradient step ran
};

std::string metrics_csv_header();
std::string metrics_to_csv(const EpisodeMetrics& m);

// One training run: a (scenario, algorithm, seed) cell.
struct RunSettings {
  KeyValueConfig scenario;
  Algo algo = Algo::kBddqn;
  int episodes = 1500;
  std::uint64_t seed = 1;
  std::string out_dir;
  int trace_episodes = 0;     // export traces for the first N episodes
  int checkpoint_period = 500;  // episodes between periodic checkpoints
  bool resume = false;
};

// Executes the training loop; writes manifest.txt, metrics.csv, trace files
// and checkpoints under out_dir; returns the per-episode metrics. The
// manifest alone reproduces the run byte-for-byte.
std::vector<EpisodeMetrics> run_training(const RunSettings& settings);

// Resolved full config (env + idm + channel + train + experiment.*) for a run.
KeyValueConfig build_manifest(const RunSettings& settings);

struct EvalSettings {
  KeyValueConfig scenario;  // for SDB and shared eval parameters
  std::vector<std::string> checkpoints;
  bool include_sdb = false;
  int eval_episodes = 100;
  std::uint64_t seed = 1;  // base of the shared eval episode seed stream
  std::string out_path;    // report destination ("" = don't write)
};

struct EvalRow {
  std::string label;
  std::string algo;
  double mean_r_tran = 0, std_r_tran = 0;
  double mean_r_tele = 0, std_r_tele = 0;
  double mean_ho_rate = 0, std_ho_rate = 0;
  double mean_total = 0;
};

struct EvalReport {
  std::vector<EvalRow> rows;
  std::string text;  // rendered table + improvement footer
};

// Greedy (eps = 0) evaluation of each checkpoint plus optionally the SDB
// baseline, on a shared eval seed stream so comparisons are paired.
EvalReport evaluate(const EvalSettings& settings);

// Per-episode metrics of a greedy evaluation run (used by evaluate and the
// acceptance suite).
std::vector<EpisodeMetrics> eval_episodes_for_checkpoint(const std::string& checkpoint_path,
                                                         int episodes, std::uint64_t seed);
std::vector<EpisodeMetrics> eval_episodes_sdb(const KeyValueConfig& scenario, int episodes,
                                              std::uint64_t seed);

struct SweepSettings {
  KeyValueConfig scenario;
  Algo algo = Algo::kBddqn;
  std::string axis;  // "speed" (env.v_max_mps) or "bs" (env.bs_count)
  std::vector<double> values;
  std::vector<std::uint64_t> seeds = {1, 2, 3};
  int episodes = 1500;
  int eval_episodes = 100;
  std::string out_dir;
  int jobs = 2;              // concurrent cells
  int smoothing_window = 50;  // moving-average window for curve export
};

// Trains and evaluates every (axis value, seed) cell, in parallel, then
// merges a long-format results table and smoothed training curves.
void run_sweep(const SweepSettings& settings);

// Derived, stable per-cell directory name.
std::string sweep_cell_dir(const SweepSettings& s, double value, std::uint64_t seed);

}  // namespace uavnet
