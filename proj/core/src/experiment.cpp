#include "uavnet/experiment.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "uavnet/checkpoint.hpp"
#include "uavnet/trace.hpp"

namespace fs = std::filesystem;

namespace uavnet {

namespace {

constexpr const char* kMetricsHeader =
    "episode,steps,sum_r_tran,sum_r_tele,ho_rate,collisions,mean_speed_mps,"
    "mean_rate_bps,epsilon,loss_mean";

void ensure_fully_consumed(const KeyValueConfig& cfg) {
  const std::vector<std::string> leftovers = cfg.unconsumed();
  if (leftovers.empty()) return;
  std::string msg = "unknown config keys:";
  for (const auto& k : leftovers) msg += " " + k;
  throw std::runtime_error(msg);
}

// Reads (and therefore marks as consumed) experiment.* keys so a manifest can
// be fed back in as a scenario config. Values are not used here; RunSettings
// carries the authoritative ones.
void consume_experiment_keys(const KeyValueConfig& cfg) {
  cfg.get_string("experiment.algo", "");
  cfg.get_int("experiment.episodes", 0);
  cfg.get_int("experiment.seed", 0);
  cfg.get_int("experiment.trace_episodes", 0);
  cfg.get_int("experiment.checkpoint_period", 0);
  cfg.get_int("experiment.eval_episodes", 0);
}

// A learning agent slot; empty for SDB.
struct Learner {
  std::unique_ptr<BdqAgent> bdq;
  std::unique_ptr<DdqnAgent> ddqn;

  BranchedAction select(const Observation& s, double eps) {
    return bdq ? bdq->select_action(s, eps) : ddqn->select_action(s, eps);
  }
  BranchedAction greedy(const Observation& s) const {
    return bdq ? bdq->greedy_action(s) : ddqn->greedy_action(s);
  }
  void observe(Transition tr) {
    if (bdq) {
      bdq->observe(std::move(tr));
    } else {
      ddqn->observe(std::move(tr));
    }
  }
  double train_step() { return bdq ? bdq->train_step() : ddqn->train_step(); }
  void save(BinaryWriter& w) const { bdq ? bdq->save(w) : ddqn->save(w); }
  void load(BinaryReader& r) { bdq ? bdq->load(r) : ddqn->load(r); }
};

std::vector<Learner> make_learners(Algo algo, const HighwayConfig& env_cfg,
                                   const TrainConfig& tcfg, std::uint64_t seed) {
  std::vector<Learner> learners;
  if (algo == Algo::kSdb) return learners;
  const int count = tcfg.share_network ? 1 : env_cfg.uav_count;
  for (int i = 0; i < count; ++i) {
    Learner l;
    const std::uint64_t agent_seed = mix_seed(seed, 200 + i);
    if (algo == Algo::kDdqn) {
      l.ddqn = std::make_unique<DdqnAgent>(env_cfg.observation_size(), env_cfg.assoc_slots,
                                           tcfg, agent_seed);
    } else {
      l.bdq = std::make_unique<BdqAgent>(env_cfg.observation_size(), env_cfg.assoc_slots,
                                         tcfg, algo == Algo::kBddqn, agent_seed);
    }
    learners.push_back(std::move(l));
  }
  return learners;
}

struct RunState {
  std::int64_t episodes_done = 0;
  std::int64_t env_steps = 0;
  Rng episode_seed_rng;
};

void save_run_checkpoint(const std::string& path, Algo algo, const std::string& manifest,
                         const RunState& state, const std::vector<Learner>& learners) {
  BinaryWriter w(path);
  write_checkpoint_header(w);
  w.str(algo_to_string(algo));
  w.str(manifest);
  w.i64(state.episodes_done);
  w.i64(state.env_steps);
  w.str(state.episode_seed_rng.serialize());
  w.u32(static_cast<std::uint32_t>(learners.size()));
  for (const auto& l : learners) l.save(w);
  w.close();
}

struct LoadedRun {
  Algo algo = Algo::kSdb;
  std::string manifest_text;
  KeyValueConfig manifest;
  HighwayConfig env_cfg;
  TrainConfig train_cfg;
  RunState state;
  std::vector<Learner> learners;
};

LoadedRun load_run_checkpoint(const std::string& path) {
  BinaryReader r(path);
  check_checkpoint_header(r);
  LoadedRun run;
  run.algo = algo_from_string(r.str());
  run.manifest_text = r.str();
  run.manifest = KeyValueConfig::parse(run.manifest_text);
  run.env_cfg = HighwayConfig::from_config(run.manifest);
  run.train_cfg = TrainConfig::from_config(run.manifest);
  run.state.episodes_done = r.i64();
  run.state.env_steps = r.i64();
  run.state.episode_seed_rng.deserialize(r.str());
  const std::uint32_t count = r.u32();
  const std::uint64_t seed =
      static_cast<std::uint64_t>(run.manifest.get_int("experiment.seed", 1));
  run.learners = make_learners(run.algo, run.env_cfg, run.train_cfg, seed);
  if (run.learners.size() != count) {
    throw std::runtime_error("checkpoint: learner count mismatch");
  }
  for (auto& l : run.learners) l.load(r);
  return run;
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  double s = 0;
  for (double x : v) s += x;
  return s / v.size();
}

double std_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / v.size());
}

}  // namespace

std::string metrics_csv_header() { return kMetricsHeader; }

std::string metrics_to_csv(const EpisodeMetrics& m) {
  std::ostringstream os;
  os << m.episode << ',' << m.steps << ',' << format_double(m.sum_r_tran) << ','
     << format_double(m.sum_r_tele) << ',' << format_double(m.ho_rate) << ','
     << m.collisions << ',' << format_double(m.mean_speed) << ','
     << format_double(m.mean_rate_bps) << ',' << format_double(m.epsilon) << ','
     << format_double(m.loss_mean);
  return os.str();
}

KeyValueConfig build_manifest(const RunSettings& settings) {
  const HighwayConfig env_cfg = HighwayConfig::from_config(settings.scenario);
  const TrainConfig train_cfg = TrainConfig::from_config(settings.scenario);
  consume_experiment_keys(settings.scenario);
  ensure_fully_consumed(settings.scenario);

  KeyValueConfig manifest;
  env_cfg.to_config(manifest);
  train_cfg.to_config(manifest);
  manifest.set_string("experiment.algo", algo_to_string(settings.algo));
  manifest.set_int("experiment.episodes", settings.episodes);
  manifest.set_int("experiment.seed", static_cast<std::int64_t>(settings.seed));
  manifest.set_int("experiment.trace_episodes", settings.trace_episodes);
  manifest.set_int("experiment.checkpoint_period", settings.checkpoint_period);
  return manifest;
}

std::vector<EpisodeMetrics> run_training(const RunSettings& settings) {
  if (settings.episodes < 1) throw std::runtime_error("run_training: episodes must be >= 1");
  if (settings.out_dir.empty()) throw std::runtime_error("run_training: out_dir required");

  // Resolve and validate everything before any compute.
  const KeyValueConfig manifest = build_manifest(settings);
  const std::string manifest_text = manifest.serialize();
  const HighwayConfig env_cfg = HighwayConfig::from_config(manifest);
  const TrainConfig train_cfg = TrainConfig::from_config(manifest);

  fs::create_directories(settings.out_dir);
  const std::string manifest_path = settings.out_dir + "/manifest.txt";
  const std::string metrics_path = settings.out_dir + "/metrics.csv";
  const std::string final_ckpt_path = settings.out_dir + "/checkpoint.ckpt";

  RunState state;
  std::vector<Learner> learners;
  bool resumed = false;
  if (settings.resume && fs::exists(final_ckpt_path)) {
    LoadedRun run = load_run_checkpoint(final_ckpt_path);
    if (run.manifest_text != manifest_text) {
      throw std::runtime_error("resume: checkpoint manifest differs from current settings");
    }
    state = std::move(run.state);
    learners = std::move(run.learners);
    resumed = true;
  } else {
    state.episode_seed_rng = Rng(mix_seed(settings.seed, 100));
    learners = make_learners(settings.algo, env_cfg, train_cfg, settings.seed);
  }

  manifest.save_file(manifest_path);
  std::ofstream metrics_out;
  if (resumed) {
    metrics_out.open(metrics_path, std::ios::app);
  } else {
    metrics_out.open(metrics_path, std::ios::trunc);
    metrics_out << kMetricsHeader << "\n";
  }
  if (!metrics_out) throw std::runtime_error("cannot write metrics file: " + metrics_path);

  HighwayEnv env(env_cfg);
  const bool learning = settings.algo != Algo::kSdb;
  const std::int64_t planned_total =
      static_cast<std::int64_t>(settings.episodes) * env_cfg.horizon_steps;

  std::vector<EpisodeMetrics> all_metrics;
  for (std::int64_t ep = state.episodes_done; ep < settings.episodes; ++ep) {
    const std::uint64_t ep_seed = state.episode_seed_rng.next_u64();
    std::vector<Observation> obs = env.reset(ep_seed);

    std::unique_ptr<TraceWriter> trace;
    if (ep < settings.trace_episodes) {
      trace = std::make_unique<TraceWriter>(
          settings.out_dir + "/trace_ep" + std::to_string(ep) + ".csv", manifest, ep_seed);
    }

    EpisodeMetrics m;
    m.episode = static_cast<int>(ep);
    double speed_accum = 0.0, rate_accum = 0.0, loss_accum = 0.0;
    int loss_count = 0;
    double eps = 0.0;

    std::vector<BranchedAction> actions(env_cfg.uav_count);
    while (!env.done()) {
      eps = learning ? epsilon_at(train_cfg, state.env_steps, planned_total) : 0.0;
      for (int k = 0; k < env_cfg.uav_count; ++k) {
        if (!learning) {
          actions[k] = env.sdb_action(k);
        } else {
          Learner& l = learners[train_cfg.share_network ? 0 : k];
          actions[k] = l.select(obs[k], eps);
        }
      }
      const StepOutcome out = env.step(actions);
      if (trace) trace->add_step(actions, out);

      double step_r_tran = 0.0, step_r_tele = 0.0;
      for (int k = 0; k < env_cfg.uav_count; ++k) {
        const UavStepResult& u = out.uav[k];
        step_r_tran += u.r_tran;
        step_r_tele += u.r_tele;
        speed_accum += std::hypot(u.v_x, u.v_y);
        rate_accum += u.rate_bps;
        if (learning) {
          Transition tr;
          tr.s = obs[k];
          tr.a = actions[k];
          tr.s2 = u.observation;
          tr.r_tran = u.r_tran;
          tr.r_tele = u.r_tele;
          tr.terminal = out.episode_done;
          learners[train_cfg.share_network ? 0 : k].observe(std::move(tr));
        }
        obs[k] = out.uav[k].observation;
      }
      m.sum_r_tran += step_r_tran / env_cfg.uav_count;
      m.sum_r_tele += step_r_tele / env_cfg.uav_count;

      ++state.env_steps;
      if (learning && state.env_steps % train_cfg.train_freq == 0) {
        for (auto& l : learners) {
          const double loss = l.train_step();
          if (std::isfinite(loss)) {
            loss_accum += loss;
            ++loss_count;
          }
        }
      }
    }

    m.steps = env.step_count();
    for (const auto& u : env.uav_states()) {
      if (u.crashed) ++m.collisions;
      m.ho_rate += static_cast<double>(u.ho_count) / std::max(1, m.steps);
    }
    m.ho_rate /= env_cfg.uav_count;
    m.mean_speed = speed_accum / (static_cast<double>(m.steps) * env_cfg.uav_count);
    m.mean_rate_bps = rate_accum / (static_cast<double>(m.steps) * env_cfg.uav_count);
    m.epsilon = eps;
    m.loss_mean = loss_count > 0 ? loss_accum / loss_count
                                 : std::numeric_limits<double>::quiet_NaN();

    if (trace) trace->close();
    metrics_out << metrics_to_csv(m) << "\n";
    metrics_out.flush();
    all_metrics.push_back(m);

    state.episodes_done = ep + 1;
    if (settings.checkpoint_period > 0 && learning &&
        state.episodes_done % settings.checkpoint_period == 0 &&
        state.episodes_done < settings.episodes) {
      save_run_checkpoint(settings.out_dir + "/checkpoint_ep" +
                              std::to_string(state.episodes_done) + ".ckpt",
                          settings.algo, manifest_text, state, learners);
    }
  }

  save_run_checkpoint(final_ckpt_path, settings.algo, manifest_text, state, learners);
  return all_metrics;
}

namespace {

std::vector<EpisodeMetrics> run_greedy_episodes(HighwayEnv& env,
                                                const std::vector<Learner>* learners,
                                                bool share_network, int episodes,
                                                std::uint64_t seed_base) {
  const HighwayConfig& cfg = env.config();
  std::vector<EpisodeMetrics> out;
  out.reserve(episodes);
  for (int ep = 0; ep < episodes; ++ep) {
    std::vector<Observation> obs = env.reset(mix_seed(seed_base, 1000 + ep));
    EpisodeMetrics m;
    m.episode = ep;
    double speed_accum = 0.0, rate_accum = 0.0;
    std::vector<BranchedAction> actions(cfg.uav_count);
    while (!env.done()) {
      for (int k = 0; k < cfg.uav_count; ++k) {
        if (learners == nullptr) {
          actions[k] = env.sdb_action(k);
        } else {
          actions[k] = (*learners)[share_network ? 0 : k].greedy(obs[k]);
        }
      }
      const StepOutcome step = env.step(actions);
      double step_r_tran = 0.0, step_r_tele = 0.0;
      for (int k = 0; k < cfg.uav_count; ++k) {
        step_r_tran += step.uav[k].r_tran;
        step_r_tele += step.uav[k].r_tele;
        speed_accum += std::hypot(step.uav[k].v_x, step.uav[k].v_y);
        rate_accum += step.uav[k].rate_bps;
        obs[k] = step.uav[k].observation;
      }
      m.sum_r_tran += step_r_tran / cfg.uav_count;
      m.sum_r_tele += step_r_tele / cfg.uav_count;
    }
    m.steps = env.step_count();
    for (const auto& u : env.uav_states()) {
      if (u.crashed) ++m.collisions;
      m.ho_rate += static_cast<double>(u.ho_count) / std::max(1, m.steps);
    }
    m.ho_rate /= cfg.uav_count;
    m.mean_speed = speed_accum / (static_cast<double>(m.steps) * cfg.uav_count);
    m.mean_rate_bps = rate_accum / (static_cast<double>(m.steps) * cfg.uav_count);
    m.epsilon = 0.0;
    m.loss_mean = std::numeric_limits<double>::quiet_NaN();
    out.push_back(m);
  }
  return out;
}

EvalRow summarize_eval(const std::string& label, const std::string& algo,
                       const std::vector<EpisodeMetrics>& eps) {
  std::vector<double> r_tran, r_tele, ho;
  for (const auto& m : eps) {
    r_tran.push_back(m.sum_r_tran);
    r_tele.push_back(m.sum_r_tele);
    ho.push_back(m.ho_rate);
  }
  EvalRow row;
  row.label = label;
  row.algo = algo;
  row.mean_r_tran = mean_of(r_tran);
  row.std_r_tran = std_of(r_tran);
  row.mean_r_tele = mean_of(r_tele);
  row.std_r_tele = std_of(r_tele);
  row.mean_ho_rate = mean_of(ho);
  row.std_ho_rate = std_of(ho);
  row.mean_total = row.mean_r_tran + row.mean_r_tele;
  return row;
}

std::string render_eval_report(const std::vector<EvalRow>& rows) {
  std::ostringstream os;
  char buf[256];
  os << "algo        avg_r_tran (std)      avg_r_tele (std)      avg_ho_rate (std)     "
        "avg_total\n";
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%-10s  %9.4f (%7.4f)   %9.4f (%7.4f)   %9.5f (%7.5f)   %9.4f\n",
                  r.algo.c_str(), r.mean_r_tran, r.std_r_tran, r.mean_r_tele, r.std_r_tele,
                  r.mean_ho_rate, r.std_ho_rate, r.mean_total);
    os << buf;
  }
  if (rows.size() >= 2) {
    const EvalRow& base = rows.back();
    os << "\nimprovement vs " << base.algo
       << " computed as (x - y) / y, y = " << base.algo << ":\n";
    for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
      const EvalRow& r = rows[i];
      auto pct = [](double x, double y) {
        if (y == 0.0) return std::numeric_limits<double>::quiet_NaN();
        return 100.0 * (x - y) / y;
      };
      std::snprintf(buf, sizeof(buf),
                    "  %-10s r_tran %+7.2f%%   r_tele %+7.2f%%   ho_rate %+7.2f%%\n",
                    r.algo.c_str(), pct(r.mean_r_tran, base.mean_r_tran),
                    pct(r.mean_r_tele, base.mean_r_tele),
                    pct(r.mean_ho_rate, base.mean_ho_rate));
      os << buf;
    }
  }
  return os.str();
}

}  // namespace

std::vector<EpisodeMetrics> eval_episodes_for_checkpoint(const std::string& checkpoint_path,
                                                         int episodes, std::uint64_t seed) {
  LoadedRun run = load_run_checkpoint(checkpoint_path);
  if (run.algo == Algo::kSdb) {
    throw std::runtime_error("eval: SDB has no checkpoint; use the scenario config");
  }
  HighwayEnv env(run.env_cfg);
  return run_greedy_episodes(env, &run.learners, run.train_cfg.share_network, episodes, seed);
}

std::vector<EpisodeMetrics> eval_episodes_sdb(const KeyValueConfig& scenario, int episodes,
                                              std::uint64_t seed) {
  const HighwayConfig cfg = HighwayConfig::from_config(scenario);
  HighwayEnv env(cfg);
  return run_greedy_episodes(env, nullptr, true, episodes, seed);
}

EvalReport evaluate(const EvalSettings& settings) {
  if (settings.checkpoints.empty() && !settings.include_sdb) {
    throw std::runtime_error("evaluate: nothing to evaluate");
  }
  EvalReport report;
  for (const auto& path : settings.checkpoints) {
    const std::string algo = checkpoint_algo(path);
    const std::vector<EpisodeMetrics> eps =
        eval_episodes_for_checkpoint(path, settings.eval_episodes, settings.seed);
    report.rows.push_back(summarize_eval(path, algo, eps));
  }
  if (settings.include_sdb) {
    const std::vector<EpisodeMetrics> eps =
        eval_episodes_sdb(settings.scenario, settings.eval_episodes, settings.seed);
    report.rows.push_back(summarize_eval("sdb", "SDB", eps));
  }
  report.text = render_eval_report(report.rows);
  if (!settings.out_path.empty()) {
    std::ofstream out(settings.out_path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write eval report: " + settings.out_path);
    out << report.text;
  }
  return report;
}

std::string sweep_cell_dir(const SweepSettings& s, double value, std::uint64_t seed) {
  std::ostringstream os;
  os << s.out_dir << "/" << s.axis << "=" << format_double(value) << "/seed"
     << seed;
  return os.str();
}

void run_sweep(const SweepSettings& settings) {
  if (settings.axis != "speed" && settings.axis != "bs") {
    throw std::runtime_error("sweep: axis must be 'speed' or 'bs'");
  }
  if (settings.values.empty()) throw std::runtime_error("sweep: no axis values");
  if (settings.seeds.empty()) throw std::runtime_error("sweep: no seeds");

  struct Cell {
    double value;
    std::uint64_t seed;
    std::vector<EpisodeMetrics> train, eval;
    bool failed = false;
    std::string error;
  };
  std::vector<Cell> cells;
  for (double v : settings.values) {
    for (std::uint64_t s : settings.seeds) cells.push_back({v, s, {}, {}, false, ""});
  }

  fs::create_directories(settings.out_dir);

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cells.size()) return;
      Cell& cell = cells[i];
      try {
        RunSettings rs;
        rs.scenario = settings.scenario;
        if (settings.axis == "speed") {
          rs.scenario.set_double("env.v_max_mps", cell.value);
        } else {
          rs.scenario.set_int("env.bs_count", static_cast<std::int64_t>(cell.value));
        }
        rs.algo = settings.algo;
        rs.episodes = settings.episodes;
        rs.seed = cell.seed;
        rs.out_dir = sweep_cell_dir(settings, cell.value, cell.seed);
        cell.train = run_training(rs);
        if (settings.algo == Algo::kSdb) {
          cell.eval = eval_episodes_sdb(rs.scenario, settings.eval_episodes,
                                        mix_seed(cell.seed, 999));
        } else {
          cell.eval = eval_episodes_for_checkpoint(rs.out_dir + "/checkpoint.ckpt",
                                                   settings.eval_episodes,
                                                   mix_seed(cell.seed, 999));
        }
        // Per-cell eval metrics file and smoothed training curves.
        {
          std::ofstream ev(rs.out_dir + "/eval_metrics.csv", std::ios::trunc);
          ev << kMetricsHeader << "\n";
          for (const auto& m : cell.eval) ev << metrics_to_csv(m) << "\n";
        }
        {
          std::ofstream cv(rs.out_dir + "/curves.csv", std::ios::trunc);
          cv << "# smoothing_window = " << settings.smoothing_window << "\n";
          cv << "episode,ma_sum_r_tran,ma_sum_r_tele,ma_ho_rate\n";
          double acc_tran = 0, acc_tele = 0, acc_ho = 0;
          std::vector<const EpisodeMetrics*> window;
          for (std::size_t e = 0; e < cell.train.size(); ++e) {
            window.push_back(&cell.train[e]);
            acc_tran += cell.train[e].sum_r_tran;
            acc_tele += cell.train[e].sum_r_tele;
            acc_ho += cell.train[e].ho_rate;
            if (static_cast<int>(window.size()) > settings.smoothing_window) {
              acc_tran -= window.front()->sum_r_tran;
              acc_tele -= window.front()->sum_r_tele;
              acc_ho -= window.front()->ho_rate;
              window.erase(window.begin());
            }
            const double n = static_cast<double>(window.size());
            cv << e << ',' << format_double(acc_tran / n) << ','
               << format_double(acc_tele / n) << ',' << format_double(acc_ho / n) << "\n";
          }
        }
      } catch (const std::exception& e) {
        cell.failed = true;
        cell.error = e.what();
      }
    }
  };

  const std::size_t n_threads =
      std::min<std::size_t>(std::max(1, settings.jobs), cells.size());
  std::vector<std::thread> pool;
  for (std::size_t i = 0; i < n_threads; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  for (const auto& c : cells) {
    if (c.failed) {
      throw std::runtime_error("sweep cell " + settings.axis + "=" +
                               format_double(c.value) + " seed " + std::to_string(c.seed) +
                               " failed: " + c.error);
    }
  }

  // Long-format merged table, deterministic cell order.
  std::ofstream out(settings.out_dir + "/sweep_results.csv", std::ios::trunc);
  if (!out) throw std::runtime_error("sweep: cannot write sweep_results.csv");
  out << "axis,value,seed,metric,metric_value\n";
  auto emit = [&](const Cell& c, const std::string& metric, double value) {
    out << settings.axis << ',' << format_double(c.value) << ',' << c.seed << ','
        << metric << ',' << format_double(value) << "\n";
  };
  for (const auto& c : cells) {
    std::vector<double> tr_tran, tr_tele, tr_ho, tr_coll, ev_tran, ev_tele, ev_ho;
    for (const auto& m : c.train) {
      tr_tran.push_back(m.sum_r_tran);
      tr_tele.push_back(m.sum_r_tele);
      tr_ho.push_back(m.ho_rate);
      tr_coll.push_back(m.collisions);
    }
    for (const auto& m : c.eval) {
      ev_tran.push_back(m.sum_r_tran);
      ev_tele.push_back(m.sum_r_tele);
      ev_ho.push_back(m.ho_rate);
    }
    emit(c, "train_mean_r_tran", mean_of(tr_tran));
    emit(c, "train_mean_r_tele", mean_of(tr_tele));
    emit(c, "train_mean_ho_rate", mean_of(tr_ho));
    emit(c, "train_mean_collisions", mean_of(tr_coll));
    emit(c, "eval_mean_r_tran", mean_of(ev_tran));
    emit(c, "eval_mean_r_tele", mean_of(ev_tele));
    emit(c, "eval_mean_ho_rate", mean_of(ev_ho));
  }
}

}  // namespace uavnet
