#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "uavnet/checkpoint.hpp"
#include "uavnet/config.hpp"
#include "uavnet/network.hpp"
#include "uavnet/replay.hpp"

namespace uavnet {

enum class Algo { kBdqn, kBddqn, kDdqn, kSdb };

Algo algo_from_string(const std::string& s);  // throws on unknown name
std::string algo_to_string(Algo a);

struct TrainConfig {
  double lr = 5e-4;
  double gamma = 0.8;
  int batch_size = 32;
  double eps_start = 1.0;
  double eps_end = 0.002;
  double eps_decay_frac = 0.3;  // fraction of planned env steps spent decaying
  int target_sync_period = 200;
  int buffer_capacity = 50000;
  int warmup_transitions = 1000;
  std::string optimizer = "adam";  // adam | sgd
  int trunk1_units = 256;
  int trunk2_units = 256;
  int head_hidden_units = 128;
  bool relu_second_trunk_layer = true;
  bool share_network = true;  // one network for all UAVs
  int train_freq = 1;         // gradient steps every N env steps

  static TrainConfig from_config(const KeyValueConfig& cfg);
  void to_config(KeyValueConfig& cfg) const;
  void validate() const;
};

// Linear eps_start -> eps_end over the first eps_decay_frac of
// planned_total_steps, then flat.
double epsilon_at(const TrainConfig& cfg, std::int64_t env_step,
                  std::int64_t planned_total_steps);

// --- TD targets -------------------------------------------------------------

// y = r_tele + r_tran + (gamma/2) * sum_d Qd_target(s', argmax_a Qd_online(s', a));
// terminal transitions drop the bootstrap.
double td_target_bddqn(const BranchingNet& target, const BranchingNet& online,
                       const Transition& tr, double gamma);

// Selection and evaluation both on the online network.
double td_target_bdqn(const BranchingNet& online, const Transition& tr, double gamma);

// Standard double-DQN over the flat 5*n joint action space.
double td_target_ddqn(const JointNet& target, const JointNet& online,
                      const Transition& tr, double gamma);

inline int joint_action_index(const BranchedAction& a, int assoc_actions) {
  return a.transport * assoc_actions + a.assoc;
}

// --- loss + gradients ---------------------------------------------------------

// L = (1/m) sum_k sum_d (Q_d(s_k, a_dk) - y_k)^2 / 2. Gradients are written
// into grad (zeroed first). Throws on a non-finite loss.
double bdq_loss_and_gradients(const BranchingNet& net,
                              const std::vector<const Transition*>& batch,
                              const std::vector<double>& targets, BranchingNet& grad,
                              BranchingNet::Cache& ws);

double ddqn_loss_and_gradients(const JointNet& net,
                               const std::vector<const Transition*>& batch,
                               const std::vector<double>& targets, JointNet& grad,
                               JointNet::Cache& ws);

// --- agents -------------------------------------------------------------------

// BDQN/BDDQN learner: branching dueling network, replay, eps-greedy control,
// Adam, periodic hard target sync. Also covers the non-dueling-baseline DDQN
// through DdqnAgent below with the same interface shape.
class BdqAgent {
 public:
  BdqAgent(int obs_size, int assoc_actions, const TrainConfig& cfg, bool double_q,
           std::uint64_t seed, int transport_actions = kTransportActionCount);

  // eps-greedy: with probability eps a uniform (transport, assoc) pair.
  BranchedAction select_action(const Observation& s, double eps);
  BranchedAction greedy_action(const Observation& s) const;

  void observe(Transition tr) { buffer_.push(std::move(tr)); }

  // One minibatch gradient step when the buffer is warm; returns the loss,
  // or NaN when skipped. Syncs the target network on schedule.
  double train_step();

  double td_target(const Transition& tr) const;

  const BranchingNet& online() const { return online_; }
  const BranchingNet& target() const { return target_; }
  BranchingNet& mutable_online() { return online_; }
  ReplayBuffer& buffer() { return buffer_; }
  std::int64_t grad_steps() const { return grad_steps_; }
  const TrainConfig& train_config() const { return cfg_; }
  bool double_q() const { return double_q_; }
  int assoc_actions() const { return assoc_actions_; }

  void save(BinaryWriter& w) const;
  void load(BinaryReader& r);  // shapes must match; throws otherwise

 private:
  TrainConfig cfg_;
  bool double_q_ = true;
  int assoc_actions_ = 0;
  BranchingNet online_, target_, grad_;
  AdamState adam_;
  OptimizerConfig opt_cfg_;
  ReplayBuffer buffer_;
  Rng rng_;
  std::int64_t grad_steps_ = 0;
  mutable BranchingNet::Cache ws_, ws_next_, ws_tgt_;
};

// Joint-action double-DQN baseline sharing the replay/optimizer/eps machinery.
class DdqnAgent {
 public:
  DdqnAgent(int obs_size, int assoc_actions, const TrainConfig& cfg, std::uint64_t seed,
            int transport_actions = kTransportActionCount);

  BranchedAction select_action(const Observation& s, double eps);
  BranchedAction greedy_action(const Observation& s) const;
  void observe(Transition tr) { buffer_.push(std::move(tr)); }
  double train_step();
  double td_target(const Transition& tr) const;

  const JointNet& online() const { return online_; }
  const JointNet& target() const { return target_; }
  ReplayBuffer& buffer() { return buffer_; }
  std::int64_t grad_steps() const { return grad_steps_; }
  const TrainConfig& train_config() const { return cfg_; }
  int assoc_actions() const { return assoc_actions_; }

  void save(BinaryWriter& w) const;
  void load(BinaryReader& r);

 private:
  TrainConfig cfg_;
  int assoc_actions_ = 0;
  JointNet online_, target_, grad_;
  AdamState adam_;
  OptimizerConfig opt_cfg_;
  ReplayBuffer buffer_;
  Rng rng_;
  std::int64_t grad_steps_ = 0;
  mutable JointNet::Cache ws_, ws_next_, ws_tgt_;
};

}  // namespace uavnet
