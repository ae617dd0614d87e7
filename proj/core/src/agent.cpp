#include "uavnet/agent.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace uavnet {

Algo algo_from_string(const std::string& s) {
  std::string up = s;
  std::transform(up.begin(), up.end(), up.begin(),
                 [](unsigned char c) { return std::toupper(c); });
  if (up == "BDQN") return Algo::kBdqn;
  if (up == "BDDQN") return Algo::kBddqn;
  if (up == "DDQN") return Algo::kDdqn;
  if (up == "SDB") return Algo::kSdb;
  throw std::runtime_error("unknown algorithm '" + s + "' (expected BDQN, BDDQN, DDQN or SDB)");
}

std::string algo_to_string(Algo a) {
  switch (a) {
    case Algo::kBdqn:
      return "BDQN";
    case Algo::kBddqn:
      return "BDDQN";
    case Algo::kDdqn:
      return "DDQN";
    case Algo::kSdb:
      return "SDB";
  }
  return "?";
}

TrainConfig TrainConfig::from_config(const KeyValueConfig& cfg) {
  TrainConfig t;
  t.lr = cfg.get_double("train.lr", t.lr);
  t.gamma = cfg.get_double("train.gamma", t.gamma);
  t.batch_size = static_cast<int>(cfg.get_int("train.batch_size", t.batch_size));
  t.eps_start = cfg.get_double("train.eps_start", t.eps_start);
  t.eps_end = cfg.get_double("train.eps_end", t.eps_end);
  t.eps_decay_frac = cfg.get_double("train.eps_decay_frac", t.eps_decay_frac);
  t.target_sync_period =
      static_cast<int>(cfg.get_int("train.target_sync_period", t.target_sync_period));
  t.buffer_capacity = static_cast<int>(cfg.get_int("train.buffer_capacity", t.buffer_capacity));
  t.warmup_transitions =
      static_cast<int>(cfg.get_int("train.warmup_transitions", t.warmup_transitions));
  t.optimizer = cfg.get_string("train.optimizer", t.optimizer);
  t.trunk1_units = static_cast<int>(cfg.get_int("train.trunk1_units", t.trunk1_units));
  t.trunk2_units = static_cast<int>(cfg.get_int("train.trunk2_units", t.trunk2_units));
  t.head_hidden_units =
      static_cast<int>(cfg.get_int("train.head_hidden_units", t.head_hidden_units));
  t.relu_second_trunk_layer =
      cfg.get_bool("train.relu_second_trunk_layer", t.relu_second_trunk_layer);
  t.share_network = cfg.get_bool("train.share_network", t.share_network);
  t.train_freq = static_cast<int>(cfg.get_int("train.train_freq", t.train_freq));
  t.validate();
  return t;
}

void TrainConfig::to_config(KeyValueConfig& cfg) const {
  cfg.set_double("train.lr", lr);
  cfg.set_double("train.gamma", gamma);
  cfg.set_int("train.batch_size", batch_size);
  cfg.set_double("train.eps_start", eps_start);
  cfg.set_double("train.eps_end", eps_end);
  cfg.set_double("train.eps_decay_frac", eps_decay_frac);
  cfg.set_int("train.target_sync_period", target_sync_period);
  cfg.set_int("train.buffer_capacity", buffer_capacity);
  cfg.set_int("train.warmup_transitions", warmup_transitions);
  cfg.set_string("train.optimizer", optimizer);
  cfg.set_int("train.trunk1_units", trunk1_units);
  cfg.set_int("train.trunk2_units", trunk2_units);
  cfg.set_int("train.head_hidden_units", head_hidden_units);
  cfg.set_bool("train.relu_second_trunk_layer", relu_second_trunk_layer);
  cfg.set_bool("train.share_network", share_network);
  cfg.set_int("train.train_freq", train_freq);
}

void TrainConfig::validate() const {
  auto fail = [](const std::string& msg) { throw std::runtime_error("TrainConfig: " + msg); };
  if (lr <= 0) fail("lr must be > 0");
  if (gamma <= 0 || gamma >= 1) fail("gamma must be in (0, 1)");
  if (batch_size < 1) fail("batch_size must be >= 1");
  if (eps_start < 0 || eps_start > 1 || eps_end < 0 || eps_end > 1) {
    fail("epsilon bounds must be in [0, 1]");
  }
  if (eps_decay_frac <= 0 || eps_decay_frac > 1) fail("eps_decay_frac must be in (0, 1]");
  if (target_sync_period < 1) fail("target_sync_period must be >= 1");
  if (buffer_capacity < 1) fail("buffer_capacity must be >= 1");
  if (warmup_transitions < 0) fail("warmup_transitions must be >= 0");
  if (optimizer != "adam" && optimizer != "sgd") fail("optimizer must be adam or sgd");
  if (trunk1_units < 1 || trunk2_units < 1 || head_hidden_units < 1) {
    fail("network widths must be >= 1");
  }
  if (train_freq < 1) fail("train_freq must be >= 1");
}

double epsilon_at(const TrainConfig& cfg, std::int64_t env_step,
                  std::int64_t planned_total_steps) {
  const auto decay_steps = std::max<std::int64_t>(
      1, static_cast<std::int64_t>(cfg.eps_decay_frac * planned_total_steps));
  if (env_step >= decay_steps) return cfg.eps_end;
  return cfg.eps_start +
         (cfg.eps_end - cfg.eps_start) * static_cast<double>(env_step) / decay_steps;
}

// --- TD targets ---------------------------------------------------------------

double td_target_bddqn(const BranchingNet& target, const BranchingNet& online,
                       const Transition& tr, double gamma) {
  const double r = tr.r_tele + tr.r_tran;
  if (tr.terminal) return r;
  const BranchingNet::Output sel = online.forward_one(tr.s2);
  const int a1 = argmax_index(sel.q1.data(), static_cast<int>(sel.q1.size()));
  const int a2 = argmax_index(sel.q2.data(), static_cast<int>(sel.q2.size()));
  const BranchingNet::Output ev = target.forward_one(tr.s2);
  return r + 0.5 * gamma * (ev.q1[a1] + ev.q2[a2]);
}

double td_target_bdqn(const BranchingNet& online, const Transition& tr, double gamma) {
  return td_target_bddqn(online, online, tr, gamma);
}

double td_target_ddqn(const JointNet& target, const JointNet& online,
                      const Transition& tr, double gamma) {
  const double r = tr.r_tele + tr.r_tran;
  if (tr.terminal) return r;
  const std::vector<double> sel = online.forward_one(tr.s2);
  const int a = argmax_index(sel.data(), static_cast<int>(sel.size()));
  const std::vector<double> ev = target.forward_one(tr.s2);
  return r + gamma * ev[a];
}

// --- loss + gradients -----------------------------------------------------------

namespace {

void gather_states(const std::vector<const Transition*>& batch, int obs_size,
                   bool next_state, std::vector<double>& x) {
  x.resize(batch.size() * static_cast<std::size_t>(obs_size));
  for (std::size_t k = 0; k < batch.size(); ++k) {
    const Observation& s = next_state ? batch[k]->s2 : batch[k]->s;
    if (static_cast<int>(s.size()) != obs_size) {
      throw std::invalid_argument("transition observation size mismatch");
    }
    std::copy(s.begin(), s.end(), x.begin() + k * static_cast<std::size_t>(obs_size));
  }
}

}  // namespace

double bdq_loss_and_gradients(const BranchingNet& net,
                              const std::vector<const Transition*>& batch,
                              const std::vector<double>& targets, BranchingNet& grad,
                              BranchingNet::Cache& ws) {
  const std::size_t m = batch.size();
  if (m == 0 || targets.size() != m) {
    throw std::invalid_argument("bdq_loss_and_gradients: bad batch/target sizes");
  }
  const int k1 = net.opt.transport_actions;
  const int k2 = net.opt.assoc_actions;
  std::vector<double> x;
  gather_states(batch, net.opt.input_size, false, x);
  net.forward(x.data(), static_cast<int>(m), ws);

  std::vector<int> a1_idx(m), a2_idx(m);
  std::vector<double> dq1(m), dq2(m);
  double loss = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    const BranchedAction& a = batch[k]->a;
    if (a.transport < 0 || a.transport >= k1 || a.assoc < 0 || a.assoc >= k2) {
      throw std::invalid_argument("bdq_loss_and_gradients: action index out of range");
    }
    a1_idx[k] = a.transport;
    a2_idx[k] = a.assoc;
    const double q1 = ws.q1[k * k1 + a.transport];
    const double q2 = ws.q2[k * k2 + a.assoc];
    const double e1 = q1 - targets[k];
    const double e2 = q2 - targets[k];
    loss += (e1 * e1 + e2 * e2) / (2.0 * m);
    dq1[k] = e1 / m;
    dq2[k] = e2 / m;
  }
  if (!std::isfinite(loss)) {
    throw std::runtime_error("bdq_loss_and_gradients: non-finite loss (batch of " +
                             std::to_string(m) + ", first target " +
                             format_double(targets[0]) + ")");
  }
  grad.zero_like(net);
  net.backward(ws, a1_idx, dq1, a2_idx, dq2, grad);
  return loss;
}

double ddqn_loss_and_gradients(const JointNet& net,
                               const std::vector<const Transition*>& batch,
                               const std::vector<double>& targets, JointNet& grad,
                               JointNet::Cache& ws) {
  const std::size_t m = batch.size();
  if (m == 0 || targets.size() != m) {
    throw std::invalid_argument("ddqn_loss_and_gradients: bad batch/target sizes");
  }
  const int k = net.joint_actions();
  std::vector<double> x;
  gather_states(batch, net.opt.input_size, false, x);
  net.forward(x.data(), static_cast<int>(m), ws);

  std::vector<int> a_idx(m);
  std::vector<double> dq(m);
  double loss = 0.0;
  for (std::size_t s = 0; s < m; ++s) {
    const int j = joint_action_index(batch[s]->a, net.opt.assoc_actions);
    if (j < 0 || j >= k) {
      throw std::invalid_argument("ddqn_loss_and_gradients: action index out of range");
    }
    a_idx[s] = j;
    const double e = ws.q[s * k + j] - targets[s];
    loss += e * e / (2.0 * m);
    dq[s] = e / m;
  }
  if (!std::isfinite(loss)) {
    throw std::runtime_error("ddqn_loss_and_gradients: non-finite loss (batch of " +
                             std::to_string(m) + ")");
  }
  grad.zero_like(net);
  net.backward(ws, a_idx, dq, grad);
  return loss;
}

// --- BdqAgent -------------------------------------------------------------------

namespace {

NetOptions net_options_for(int obs_size, int assoc_actions, const TrainConfig& cfg,
                           int transport_actions) {
  NetOptions o;
  o.input_size = obs_size;
  o.trunk1_units = cfg.trunk1_units;
  o.trunk2_units = cfg.trunk2_units;
  o.head_hidden_units = cfg.head_hidden_units;
  o.transport_actions = transport_actions;
  o.assoc_actions = assoc_actions;
  o.relu_second_trunk_layer = cfg.relu_second_trunk_layer;
  return o;
}

OptimizerConfig optimizer_config_for(const TrainConfig& cfg) {
  OptimizerConfig o;
  o.kind = cfg.optimizer == "sgd" ? OptimizerConfig::Kind::kSgd
                                  : OptimizerConfig::Kind::kAdam;
  o.lr = cfg.lr;
  return o;
}

}  // namespace

BdqAgent::BdqAgent(int obs_size, int assoc_actions, const TrainConfig& cfg, bool double_q,
                   std::uint64_t seed, int transport_actions)
    : cfg_(cfg),
      double_q_(double_q),
      assoc_actions_(assoc_actions),
      buffer_(cfg.buffer_capacity, mix_seed(seed, 1)),
      rng_(mix_seed(seed, 2)) {
  cfg_.validate();
  Rng init_rng(mix_seed(seed, 0));
  online_ = BranchingNet(net_options_for(obs_size, assoc_actions, cfg_, transport_actions),
                         init_rng);
  target_ = online_;
  grad_.zero_like(online_);
  opt_cfg_ = optimizer_config_for(cfg_);
  adam_.init_for(static_cast<const BranchingNet&>(online_).param_arrays());
}

BranchedAction BdqAgent::select_action(const Observation& s, double eps) {
  if (eps < 0.0 || eps > 1.0) throw std::invalid_argument("select_action: eps outside [0, 1]");
  if (rng_.uniform01() < eps) {
    BranchedAction a;
    a.transport = static_cast<int>(rng_.uniform_int(online_.opt.transport_actions));
    a.assoc = static_cast<int>(rng_.uniform_int(assoc_actions_));
    return a;
  }
  return greedy_action(s);
}

BranchedAction BdqAgent::greedy_action(const Observation& s) const {
  const BranchingNet::Output out = online_.forward_one(s);
  BranchedAction a;
  a.transport = argmax_index(out.q1.data(), static_cast<int>(out.q1.size()));
  a.assoc = argmax_index(out.q2.data(), static_cast<int>(out.q2.size()));
  return a;
}

double BdqAgent::td_target(const Transition& tr) const {
  return double_q_ ? td_target_bddqn(target_, online_, tr, cfg_.gamma)
                   : td_target_bdqn(online_, tr, cfg_.gamma);
}

double BdqAgent::train_step() {
  const std::size_t m = static_cast<std::size_t>(cfg_.batch_size);
  if (buffer_.size() < static_cast<std::size_t>(cfg_.warmup_transitions) ||
      !buffer_.can_sample(m)) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  const std::vector<const Transition*> batch = buffer_.sample(m);

  // Batched targets: one forward over s' per network.
  std::vector<double> x2;
  gather_states(batch, online_.opt.input_size, true, x2);
  online_.forward(x2.data(), static_cast<int>(m), ws_next_);
  const BranchingNet::Cache* eval = &ws_next_;
  if (double_q_) {
    target_.forward(x2.data(), static_cast<int>(m), ws_tgt_);
    eval = &ws_tgt_;
  }
  const int k1 = online_.opt.transport_actions;
  const int k2 = online_.opt.assoc_actions;
  std::vector<double> targets(m);
  for (std::size_t k = 0; k < m; ++k) {
    const double r = batch[k]->r_tele + batch[k]->r_tran;
    if (batch[k]->terminal) {
      targets[k] = r;
      continue;
    }
    const int b1 = ws_next_.amax1[k];  // argmax of A == argmax of Q per branch
    const int b2 = ws_next_.amax2[k];
    targets[k] =
        r + 0.5 * cfg_.gamma * (eval->q1[k * k1 + b1] + eval->q2[k * k2 + b2]);
  }

  const double loss = bdq_loss_and_gradients(online_, batch, targets, grad_, ws_);
  optimizer_step(online_.param_arrays(),
                 static_cast<const BranchingNet&>(grad_).param_arrays(), adam_, opt_cfg_);
  ++grad_steps_;
  if (grad_steps_ % cfg_.target_sync_period == 0) target_ = online_;
  return loss;
}

void BdqAgent::save(BinaryWriter& w) const {
  w.str("bdq");
  w.u32(double_q_ ? 1 : 0);
  w.u32(static_cast<std::uint32_t>(online_.opt.input_size));
  w.u32(static_cast<std::uint32_t>(assoc_actions_));
  for (const auto* arr : static_cast<const BranchingNet&>(online_).param_arrays()) w.vec(*arr);
  for (const auto* arr : static_cast<const BranchingNet&>(target_).param_arrays()) w.vec(*arr);
  w.i64(adam_.t);
  for (const auto& v : adam_.m) w.vec(v);
  for (const auto& v : adam_.v) w.vec(v);
  w.i64(grad_steps_);
  w.str(rng_.serialize());
  w.str(buffer_.rng().serialize());
}

void BdqAgent::load(BinaryReader& r) {
  if (r.str() != "bdq") throw std::runtime_error("checkpoint: not a BDQ agent payload");
  const bool dq = r.u32() != 0;
  const auto in = static_cast<int>(r.u32());
  const auto n = static_cast<int>(r.u32());
  if (dq != double_q_ || in != online_.opt.input_size || n != assoc_actions_) {
    throw std::runtime_error("checkpoint: agent shape/variant mismatch");
  }
  auto load_net = [&r](BranchingNet& net) {
    for (auto* arr : net.param_arrays()) {
      std::vector<double> v = r.vec();
      if (v.size() != arr->size()) throw std::runtime_error("checkpoint: weight shape mismatch");
      *arr = std::move(v);
    }
  };
  load_net(online_);
  load_net(target_);
  adam_.t = r.i64();
  for (auto& v : adam_.m) {
    std::vector<double> in_v = r.vec();
    if (in_v.size() != v.size()) throw std::runtime_error("checkpoint: adam shape mismatch");
    v = std::move(in_v);
  }
  for (auto& v : adam_.v) {
    std::vector<double> in_v = r.vec();
    if (in_v.size() != v.size()) throw std::runtime_error("checkpoint: adam shape mismatch");
    v = std::move(in_v);
  }
  grad_steps_ = r.i64();
  rng_.deserialize(r.str());
  buffer_.rng().deserialize(r.str());
}

// --- DdqnAgent --------------------------------------------------------------------

DdqnAgent::DdqnAgent(int obs_size, int assoc_actions, const TrainConfig& cfg,
                     std::uint64_t seed, int transport_actions)
    : cfg_(cfg),
      assoc_actions_(assoc_actions),
      buffer_(cfg.buffer_capacity, mix_seed(seed, 1)),
      rng_(mix_seed(seed, 2)) {
  cfg_.validate();
  Rng init_rng(mix_seed(seed, 0));
  online_ = JointNet(net_options_for(obs_size, assoc_actions, cfg_, transport_actions),
                     init_rng);
  target_ = online_;
  grad_.zero_like(online_);
  opt_cfg_ = optimizer_config_for(cfg_);
  adam_.init_for(static_cast<const JointNet&>(online_).param_arrays());
}

BranchedAction DdqnAgent::select_action(const Observation& s, double eps) {
  if (eps < 0.0 || eps > 1.0) throw std::invalid_argument("select_action: eps outside [0, 1]");
  if (rng_.uniform01() < eps) {
    const int j = static_cast<int>(rng_.uniform_int(online_.joint_actions()));
    return BranchedAction{j / assoc_actions_, j % assoc_actions_};
  }
  return greedy_action(s);
}

BranchedAction DdqnAgent::greedy_action(const Observation& s) const {
  const std::vector<double> q = online_.forward_one(s);
  const int j = argmax_index(q.data(), static_cast<int>(q.size()));
  return BranchedAction{j / assoc_actions_, j % assoc_actions_};
}

double DdqnAgent::td_target(const Transition& tr) const {
  return td_target_ddqn(target_, online_, tr, cfg_.gamma);
}

double DdqnAgent::train_step() {
  const std::size_t m = static_cast<std::size_t>(cfg_.batch_size);
  if (buffer_.size() < static_cast<std::size_t>(cfg_.warmup_transitions) ||
      !buffer_.can_sample(m)) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  const std::vector<const Transition*> batch = buffer_.sample(m);

  std::vector<double> x2;
  gather_states(batch, online_.opt.input_size, true, x2);
  online_.forward(x2.data(), static_cast<int>(m), ws_next_);
  target_.forward(x2.data(), static_cast<int>(m), ws_tgt_);
  const int k = online_.joint_actions();
  std::vector<double> targets(m);
  for (std::size_t s = 0; s < m; ++s) {
    const double r = batch[s]->r_tele + batch[s]->r_tran;
    if (batch[s]->terminal) {
      targets[s] = r;
      continue;
    }
    const int a = argmax_index(ws_next_.q.data() + s * k, k);
    targets[s] = r + cfg_.gamma * ws_tgt_.q[s * k + a];
  }

  const double loss = ddqn_loss_and_gradients(online_, batch, targets, grad_, ws_);
  optimizer_step(online_.param_arrays(),
                 static_cast<const JointNet&>(grad_).param_arrays(), adam_, opt_cfg_);
  ++grad_steps_;
  if (grad_steps_ % cfg_.target_sync_period == 0) target_ = online_;
  return loss;
}

void DdqnAgent::save(BinaryWriter& w) const {
  w.str("ddqn");
  w.u32(static_cast<std::uint32_t>(online_.opt.input_size));
  w.u32(static_cast<std::uint32_t>(assoc_actions_));
  for (const auto* arr : static_cast<const JointNet&>(online_).param_arrays()) w.vec(*arr);
  for (const auto* arr : static_cast<const JointNet&>(target_).param_arrays()) w.vec(*arr);
  w.i64(adam_.t);
  for (const auto& v : adam_.m) w.vec(v);
  for (const auto& v : adam_.v) w.vec(v);
  w.i64(grad_steps_);
  w.str(rng_.serialize());
  w.str(buffer_.rng().serialize());
}

void DdqnAgent::load(BinaryReader& r) {
  if (r.str() != "ddqn") throw std::runtime_error("checkpoint: not a DDQN agent payload");
  const auto in = static_cast<int>(r.u32());
  const auto n = static_cast<int>(r.u32());
  if (in != online_.opt.input_size || n != assoc_actions_) {
    throw std::runtime_error("checkpoint: agent shape mismatch");
  }
  auto load_net = [&r](JointNet& net) {
    for (auto* arr : net.param_arrays()) {
      std::vector<double> v = r.vec();
      if (v.size() != arr->size()) throw std::runtime_error("checkpoint: weight shape mismatch");
      *arr = std::move(v);
    }
  };
  load_net(online_);
  load_net(target_);
  adam_.t = r.i64();
  for (auto& v : adam_.m) {
    std::vector<double> in_v = r.vec();
    if (in_v.size() != v.size()) throw std::runtime_error("checkpoint: adam shape mismatch");
    v = std::move(in_v);
  }
  for (auto& v : adam_.v) {
    std::vector<double> in_v = r.vec();
    if (in_v.size() != v.size()) throw std::runtime_error("checkpoint: adam shape mismatch");
    v = std::move(in_v);
  }
  grad_steps_ = r.i64();
  rng_.deserialize(r.str());
  buffer_.rng().deserialize(r.str());
}

}  // namespace uavnet
