#include "uavnet/highway_env.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace uavnet {

namespace {

double clamp_unit(double v) { return std::clamp(v, -1.0, 1.0); }

}  // namespace

IdmParams IdmParams::from_config(const KeyValueConfig& cfg) {
  IdmParams p;
  p.max_accel_mps2 = cfg.get_double("idm.max_accel_mps2", p.max_accel_mps2);
  p.comfort_decel_mps2 = cfg.get_double("idm.comfort_decel_mps2", p.comfort_decel_mps2);
  p.min_gap_m = cfg.get_double("idm.min_gap_m", p.min_gap_m);
  p.time_headway_s = cfg.get_double("idm.time_headway_s", p.time_headway_s);
  p.accel_exponent = cfg.get_double("idm.accel_exponent", p.accel_exponent);
  if (p.max_accel_mps2 <= 0 || p.comfort_decel_mps2 <= 0 || p.min_gap_m <= 0 ||
      p.time_headway_s <= 0 || p.accel_exponent <= 0) {
    throw std::runtime_error("idm.* parameters must all be positive");
  }
  return p;
}

void IdmParams::to_config(KeyValueConfig& cfg) const {
  cfg.set_double("idm.max_accel_mps2", max_accel_mps2);
  cfg.set_double("idm.comfort_decel_mps2", comfort_decel_mps2);
  cfg.set_double("idm.min_gap_m", min_gap_m);
  cfg.set_double("idm.time_headway_s", time_headway_s);
  cfg.set_double("idm.accel_exponent", accel_exponent);
}

HighwayConfig HighwayConfig::from_config(const KeyValueConfig& cfg) {
  HighwayConfig c;
  c.lane_count = static_cast<int>(cfg.get_int("env.lane_count", c.lane_count));
  c.lane_width_m = cfg.get_double("env.lane_width_m", c.lane_width_m);
  c.highway_length_m = cfg.get_double("env.highway_length_m", c.highway_length_m);
  c.altitude_m = cfg.get_double("env.altitude_m", c.altitude_m);
  c.uav_count = static_cast<int>(cfg.get_int("env.uav_count", c.uav_count));
  c.bs_count = static_cast<int>(cfg.get_int("env.bs_count", c.bs_count));
  c.bs_area_halfwidth_m = cfg.get_double("env.bs_area_halfwidth_m", c.bs_area_halfwidth_m);
  c.spawn_window_m = cfg.get_double("env.spawn_window_m", c.spawn_window_m);
  c.spawn_speed_mps = cfg.get_double("env.spawn_speed_mps", c.spawn_speed_mps);
  c.decision_period_s = cfg.get_double("env.decision_period_s", c.decision_period_s);
  c.physics_substeps = static_cast<int>(cfg.get_int("env.physics_substeps", c.physics_substeps));
  c.idm = IdmParams::from_config(cfg);
  c.omega1 = cfg.get_double("env.omega1", c.omega1);
  c.omega3 = cfg.get_double("env.omega3", c.omega3);
  c.collision_distance_m = cfg.get_double("env.collision_distance_m", c.collision_distance_m);
  c.max_brake_mps2 = cfg.get_double("env.max_brake_mps2", c.max_brake_mps2);
  c.horizon_steps = static_cast<int>(cfg.get_int("env.horizon_steps", c.horizon_steps));
  c.v_min_mps = cfg.get_double("env.v_min_mps", c.v_min_mps);
  c.v_max_mps = cfg.get_double("env.v_max_mps", c.v_max_mps);
  c.speed_step_mps = cfg.get_double("env.speed_step_mps", c.speed_step_mps);
  c.bs_quota = static_cast<int>(cfg.get_int("env.bs_quota", c.bs_quota));
  c.bs_element_count = static_cast<int>(cfg.get_int("env.bs_element_count", c.bs_element_count));
  c.bs_downtilt_rad = cfg.get_double("env.bs_downtilt_rad", c.bs_downtilt_rad);
  c.observed_uavs = static_cast<int>(cfg.get_int("env.observed_uavs", c.observed_uavs));
  c.assoc_slots = static_cast<int>(cfg.get_int("env.assoc_slots", c.assoc_slots));
  c.wr_ho_penalty = cfg.get_double("env.wr_ho_penalty", c.wr_ho_penalty);
  c.obs_position_scale_m = cfg.get_double("env.obs_position_scale_m", c.obs_position_scale_m);
  c.channel = ChannelParams::from_config(cfg);
  c.validate();
  return c;
}

void HighwayConfig::to_config(KeyValueConfig& cfg) const {
  cfg.set_int("env.lane_count", lane_count);
  cfg.set_double("env.lane_width_m", lane_width_m);
  cfg.set_double("env.highway_length_m", highway_length_m);
  cfg.set_double("env.altitude_m", altitude_m);
  cfg.set_int("env.uav_count", uav_count);
  cfg.set_int("env.bs_count", bs_count);
  cfg.set_double("env.bs_area_halfwidth_m", bs_area_halfwidth_m);
  cfg.set_double("env.spawn_window_m", spawn_window_m);
  cfg.set_double("env.spawn_speed_mps", spawn_speed_mps);
  cfg.set_double("env.decision_period_s", decision_period_s);
  cfg.set_int("env.physics_substeps", physics_substeps);
  idm.to_config(cfg);
  cfg.set_double("env.omega1", omega1);
  cfg.set_double("env.omega3", omega3);
  cfg.set_double("env.collision_distance_m", collision_distance_m);
  cfg.set_double("env.max_brake_mps2", max_brake_mps2);
  cfg.set_int("env.horizon_steps", horizon_steps);
  cfg.set_double("env.v_min_mps", v_min_mps);
  cfg.set_double("env.v_max_mps", v_max_mps);
  cfg.set_double("env.speed_step_mps", speed_step_mps);
  cfg.set_int("env.bs_quota", bs_quota);
  cfg.set_int("env.bs_element_count", bs_element_count);
  cfg.set_double("env.bs_downtilt_rad", bs_downtilt_rad);
  cfg.set_int("env.observed_uavs", observed_uavs);
  cfg.set_int("env.assoc_slots", assoc_slots);
  cfg.set_double("env.wr_ho_penalty", wr_ho_penalty);
  cfg.set_double("env.obs_position_scale_m", obs_position_scale_m);
  channel.to_config(cfg);
}

void HighwayConfig::validate() const {
  auto fail = [](const std::string& msg) { throw std::runtime_error("HighwayConfig: " + msg); };
  if (lane_count < 1) fail("lane_count must be >= 1");
  if (lane_width_m <= 0) fail("lane_width_m must be > 0");
  if (highway_length_m <= 0) fail("highway_length_m must be > 0");
  if (altitude_m < 22.5 || altitude_m > 300.0) fail("altitude_m must be in [22.5, 300]");
  if (uav_count < 1) fail("uav_count must be >= 1");
  if (bs_count < 1) fail("bs_count must be >= 1");
  if (decision_period_s <= 0) fail("decision_period_s must be > 0");
  if (physics_substeps < 1) fail("physics_substeps must be >= 1");
  if (horizon_steps < 1) fail("horizon_steps must be >= 1");
  if (v_min_mps <= 0 || v_max_mps <= v_min_mps) fail("need 0 < v_min_mps < v_max_mps");
  if (speed_step_mps <= 0) fail("speed_step_mps must be > 0");
  if (omega1 < 0 || omega1 > 1) fail("omega1 must be in [0, 1]");
  if (omega3 < 0) fail("omega3 must be >= 0");
  if (collision_distance_m <= 0) fail("collision_distance_m must be > 0");
  if (max_brake_mps2 <= 0) fail("max_brake_mps2 must be > 0");
  if (bs_quota < 1) fail("bs_quota must be >= 1");
  if (bs_element_count < 1) fail("bs_element_count must be >= 1");
  if (observed_uavs < 1) fail("observed_uavs must be >= 1");
  if (assoc_slots < 1) fail("assoc_slots must be >= 1");
  if (wr_ho_penalty < 0 || wr_ho_penalty >= 1) fail("wr_ho_penalty must be in [0, 1)");
  if (obs_position_scale_m <= 0) fail("obs_position_scale_m must be > 0");
  if (spawn_speed_mps >= 0 && spawn_speed_mps > 2.0 * v_max_mps) fail("spawn_speed_mps too large");
  if ((uav_count - 1) * 2.0 * idm.min_gap_m >= spawn_window_m) {
    fail("spawn_window_m too small to place uav_count UAVs with 2*min_gap spacing");
  }
  if (spawn_window_m > highway_length_m) fail("spawn_window_m exceeds highway_length_m");
  if (channel.bandwidth_hz <= 0) fail("channel.bandwidth_hz must be > 0");
  if (channel.candidate_count < 1) fail("channel.candidate_count must be >= 1");
}

// --- pure pieces -----------------------------------------------------------

double idm_acceleration(double speed, double target_speed, const IdmParams& p) {
  return p.max_accel_mps2 * (1.0 - std::pow(speed / target_speed, p.accel_exponent));
}

double idm_desired_gap(double speed, double speed_delta, const IdmParams& p) {
  const double dynamic =
      speed * p.time_headway_s +
      speed * speed_delta / (2.0 * std::sqrt(p.max_accel_mps2 * p.comfort_decel_mps2));
  return p.min_gap_m + std::max(0.0, dynamic);
}

double idm_acceleration(double speed, double target_speed, double gap_m,
                        double leader_speed, const IdmParams& p) {
  if (gap_m <= 0.0) throw std::domain_error("idm_acceleration: non-positive gap");
  const double z = idm_desired_gap(speed, speed - leader_speed, p) / gap_m;
  return p.max_accel_mps2 *
         (1.0 - std::pow(speed / target_speed, p.accel_exponent) - z * z);
}

double weighted_rate(double rate_bps, int quota, int load, bool ho_triggered,
                     double ho_penalty) {
  if (quota < 1) throw std::invalid_argument("weighted_rate: quota must be >= 1");
  const int denom = std::max(1, std::min(quota, load));
  return rate_bps / denom * (ho_triggered ? 1.0 - ho_penalty : 1.0);
}

double transport_reward(double speed_magnitude, bool collided, const HighwayConfig& cfg) {
  const double ratio = std::clamp(
      (speed_magnitude - cfg.v_min_mps) / (cfg.v_max_mps - cfg.v_min_mps), 0.0, 1.0);
  return std::max(0.0, cfg.omega1 * ratio - cfg.omega2() * (collided ? 1.0 : 0.0));
}

double comm_reward(double rate_bps, double ho_prob, double rate_ref_bps,
                   const HighwayConfig& cfg) {
  const double rate_norm = std::clamp(rate_bps / rate_ref_bps, 0.0, 1.0);
  return cfg.omega3 * rate_norm * (1.0 - std::min(1.0, ho_prob));
}

// --- environment -----------------------------------------------------------

HighwayEnv::HighwayEnv(HighwayConfig config) : config_(std::move(config)) {
  config_.validate();
  rate_ref_bps_ = achievable_rate_bps(config_.channel.sir_cap_db, config_.channel);
}

std::vector<Observation> HighwayEnv::reset(std::uint64_t seed) {
  Rng rng(seed);
  const double road_center = 0.5 * (config_.lane_count - 1) * config_.lane_width_m;

  bss_.clear();
  bss_.reserve(config_.bs_count);
  for (int i = 0; i < config_.bs_count; ++i) {
    BaseStation b;
    b.id = i;
    b.pose.x = rng.uniform(0.0, config_.highway_length_m);
    b.pose.y = rng.uniform(road_center - config_.bs_area_halfwidth_m,
                           road_center + config_.bs_area_halfwidth_m);
    b.pose.h = 0.0;
    b.element_count = config_.bs_element_count;
    b.downtilt_rad = config_.bs_downtilt_rad;
    b.quota = config_.bs_quota;
    b.load_count = 0;
    bss_.push_back(b);
  }

  // Spawn positions: uniform over the window subject to pairwise gaps of
  // 2*min_gap, sampled constructively (sorted offsets plus mandatory gaps).
  const double min_spacing = 2.0 * config_.idm.min_gap_m;
  const double slack = config_.spawn_window_m - (config_.uav_count - 1) * min_spacing;
  std::vector<double> xs(config_.uav_count);
  std::vector<int> lanes(config_.uav_count);
  for (int k = 0; k < config_.uav_count; ++k) xs[k] = rng.uniform(0.0, slack);
  std::sort(xs.begin(), xs.end());
  for (int k = 0; k < config_.uav_count; ++k) {
    xs[k] += k * min_spacing;
    lanes[k] = static_cast<int>(rng.uniform_int(config_.lane_count));
  }

  const double spawn_speed =
      config_.spawn_speed_mps < 0.0 ? config_.v_max_mps : config_.spawn_speed_mps;
  uavs_.clear();
  uavs_.reserve(config_.uav_count);
  for (int k = 0; k < config_.uav_count; ++k) {
    UavState u;
    u.id = k;
    u.lane = lanes[k];
    u.target_lane = lanes[k];
    u.pose.x = xs[k];
    u.pose.y = lane_center(lanes[k]);
    u.pose.h = config_.altitude_m;
    u.v_x = spawn_speed;
    u.v_y = 0.0;
    u.target_speed = config_.v_max_mps;
    u.serving_bs = -1;
    u.ho_count = 0;
    u.crashed = false;
    uavs_.push_back(u);
  }

  step_count_ = 0;
  done_ = false;
  started_ = true;

  recompute_link_state();
  rebuild_slots(current_loads());

  // Initial association: shortest-distance rule restricted by quotas.
  for (auto& u : uavs_) {
    for (int id : dist_candidates_[u.id]) {
      if (bss_[id].load_count < bss_[id].quota) {
        u.serving_bs = id;
        ++bss_[id].load_count;
        break;
      }
    }
  }
  rebuild_slots(current_loads());  // slot HO penalties now reflect initial association

  std::vector<Observation> obs(uavs_.size());
  for (const auto& u : uavs_) obs[u.id] = build_observation(u.id);
  return obs;
}

std::vector<Observation> HighwayEnv::reset_manual(std::vector<BaseStation> bss,
                                                  std::vector<UavState> uavs) {
  if (bss.empty() || uavs.empty()) {
    throw std::invalid_argument("reset_manual: need at least one BS and one UAV");
  }
  for (std::size_t i = 0; i < bss.size(); ++i) {
    if (bss[i].id != static_cast<int>(i)) {
      throw std::invalid_argument("reset_manual: BS ids must be 0..N-1 in order");
    }
    if (bss[i].quota < 1) throw std::invalid_argument("reset_manual: quota must be >= 1");
    bss[i].load_count = 0;
  }
  for (std::size_t k = 0; k < uavs.size(); ++k) {
    if (uavs[k].id != static_cast<int>(k)) {
      throw std::invalid_argument("reset_manual: UAV ids must be 0..N-1 in order");
    }
    if (uavs[k].crashed) throw std::invalid_argument("reset_manual: crashed UAVs not allowed");
    if (uavs[k].serving_bs >= static_cast<int>(bss.size())) {
      throw std::invalid_argument("reset_manual: serving_bs out of range");
    }
  }
  config_.validate();
  bss_ = std::move(bss);
  uavs_ = std::move(uavs);
  config_.bs_count = static_cast<int>(bss_.size());
  config_.uav_count = static_cast<int>(uavs_.size());
  for (auto& u : uavs_) {
    u.pose.x = wrap_x(u.pose.x);
    u.lane = current_lane(u.pose.y);
    u.target_lane = std::clamp(u.target_lane, 0, config_.lane_count - 1);
    if (u.serving_bs >= 0) ++bss_[u.serving_bs].load_count;
  }
  for (const auto& b : bss_) {
    if (b.load_count > b.quota) {
      throw std::invalid_argument("reset_manual: BS load exceeds quota");
    }
  }

  step_count_ = 0;
  done_ = false;
  started_ = true;
  recompute_link_state();
  rebuild_slots(current_loads());
  // Unassociated UAVs get the same quota-restricted shortest-distance
  // association as reset(); explicit serving_bs values are kept.
  for (auto& u : uavs_) {
    if (u.serving_bs >= 0) continue;
    for (int id : dist_candidates_[u.id]) {
      if (bss_[id].load_count < bss_[id].quota) {
        u.serving_bs = id;
        ++bss_[id].load_count;
        break;
      }
    }
  }
  rebuild_slots(current_loads());
  std::vector<Observation> obs(uavs_.size());
  for (const auto& u : uavs_) obs[u.id] = build_observation(u.id);
  return obs;
}

double HighwayEnv::wrap_x(double x) const {
  const double L = config_.highway_length_m;
  x = std::fmod(x, L);
  return x < 0.0 ? x + L : x;
}

double HighwayEnv::ring_dx(double from_x, double to_x) const {
  const double L = config_.highway_length_m;
  double dx = std::fmod(to_x - from_x, L);
  if (dx > 0.5 * L) dx -= L;
  if (dx <= -0.5 * L) dx += L;
  return dx;
}

int HighwayEnv::current_lane(double y) const {
  const long lane = std::lround(y / config_.lane_width_m);
  return static_cast<int>(std::clamp<long>(lane, 0, config_.lane_count - 1));
}

const UavState* HighwayEnv::leader_of(int uav_id) const {
  // Nearest UAV ahead in the same lane, ring distance.
  const UavState& u = uavs_[uav_id];
  const UavState* leader = nullptr;
  double best_gap = 0.0;
  for (const auto& other : uavs_) {
    if (other.id == uav_id) continue;
    if (current_lane(other.pose.y) != current_lane(u.pose.y)) continue;
    double gap = ring_dx(u.pose.x, other.pose.x);
    if (gap < 0.0) gap += config_.highway_length_m;  // ahead around the ring
    if (gap == 0.0) continue;                        // overlap; collision check handles it
    if (!leader || gap < best_gap || (gap == best_gap && other.id < leader->id)) {
      leader = &other;
      best_gap = gap;
    }
  }
  return leader;
}

void HighwayEnv::integrate_substeps() {
  const double dt = config_.decision_period_s / config_.physics_substeps;
  std::vector<double> accel(uavs_.size(), 0.0);
  for (int sub = 0; sub < config_.physics_substeps; ++sub) {
    // Synchronous update: accelerations from the state at substep start.
    // IDM drives the path speed |v|; lane changes redirect it, they do not
    // add to it.
    for (auto& u : uavs_) {
      const double speed = std::hypot(u.v_x, u.v_y);
      const UavState* leader = leader_of(u.id);
      if (leader) {
        double gap = ring_dx(u.pose.x, leader->pose.x);
        if (gap < 0.0) gap += config_.highway_length_m;
        if (gap <= 0.0) {
          accel[u.id] = 0.0;  // overlap; collision check below flags it
          continue;
        }
        const double leader_speed = std::hypot(leader->v_x, leader->v_y);
        accel[u.id] =
            idm_acceleration(speed, u.target_speed, gap, leader_speed, config_.idm);
      } else {
        accel[u.id] = idm_acceleration(speed, u.target_speed, config_.idm);
      }
    }
    const double remaining = config_.decision_period_s - sub * dt;
    for (auto& u : uavs_) {
      const double a = std::max(accel[u.id], -config_.max_brake_mps2);
      const double speed = std::max(0.0, std::hypot(u.v_x, u.v_y) + a * dt);
      const double lateral_demand = (lane_center(u.target_lane) - u.pose.y) / remaining;
      // bank limit: lateral speed spends the path-speed budget, at most 45 deg
      const double lateral_cap = speed * 0.7071067811865476;
      u.v_y = std::clamp(lateral_demand, -lateral_cap, lateral_cap);
      u.v_x = std::sqrt(std::max(0.0, speed * speed - u.v_y * u.v_y));
      u.pose.y += u.v_y * dt;
      u.pose.x = wrap_x(u.pose.x + u.v_x * dt);
      u.lane = current_lane(u.pose.y);
    }
    for (std::size_t a = 0; a < uavs_.size(); ++a) {
      for (std::size_t b = a + 1; b < uavs_.size(); ++b) {
        if (uavs_[a].lane != uavs_[b].lane) continue;
        if (std::abs(ring_dx(uavs_[a].pose.x, uavs_[b].pose.x)) <
            config_.collision_distance_m) {
          uavs_[a].crashed = true;
          uavs_[b].crashed = true;
        }
      }
    }
  }
}

void HighwayEnv::recompute_link_state() {
  // Channel math is Euclidean; the ring maps each BS into the UAV's local
  // frame through the minimum-image displacement before the link budget.
  powers_dbm_.assign(uavs_.size(), std::vector<double>(bss_.size()));
  dists_m_.assign(uavs_.size(), std::vector<double>(bss_.size()));
  for (const auto& u : uavs_) {
    for (std::size_t i = 0; i < bss_.size(); ++i) {
      BaseStation local = bss_[i];
      local.pose.x = u.pose.x - ring_dx(bss_[i].pose.x, u.pose.x);
      const LinkGeometry geom = make_link_geometry(local.pose, u.pose);
      dists_m_[u.id][i] = geom.dist_3d_m;
      powers_dbm_[u.id][i] = received_power_dbm(local, u.pose, config_.channel);
    }
  }
}

std::vector<CandidateSlot> HighwayEnv::make_slots(int uav_id,
                                                  const std::vector<int>& loads) const {
  std::vector<int> ids(bss_.size());
  for (std::size_t i = 0; i < bss_.size(); ++i) ids[i] = bss_[i].id;
  const std::vector<int> cands = candidate_bs_set_from_link_state(
      ids, dists_m_[uav_id], powers_dbm_[uav_id], config_.channel);

  std::vector<CandidateSlot> slots;
  slots.reserve(cands.size());
  for (int id : cands) {
    CandidateSlot s;
    s.bs_id = id;
    s.sir_db = sir_from_powers_db(powers_dbm_[uav_id], id, config_.channel.sir_cap_db);
    s.rate_bps = achievable_rate_bps(s.sir_db, config_.channel);
    s.quota = bss_[id].quota;
    s.load = loads[id];
    s.wr_score = weighted_rate(s.rate_bps, s.quota, s.load,
                               id != uavs_[uav_id].serving_bs, config_.wr_ho_penalty);
    slots.push_back(s);
  }
  std::sort(slots.begin(), slots.end(), [](const CandidateSlot& a, const CandidateSlot& b) {
    if (a.wr_score != b.wr_score) return a.wr_score > b.wr_score;
    return a.bs_id < b.bs_id;
  });
  if (slots.size() > static_cast<std::size_t>(config_.assoc_slots)) {
    slots.resize(config_.assoc_slots);
  }
  return slots;
}

void HighwayEnv::rebuild_slots(const std::vector<int>& loads) {
  slots_.assign(uavs_.size(), {});
  dist_candidates_.assign(uavs_.size(), {});
  std::vector<int> ids(bss_.size());
  for (std::size_t i = 0; i < bss_.size(); ++i) ids[i] = bss_[i].id;
  for (const auto& u : uavs_) {
    slots_[u.id] = make_slots(u.id, loads);
    dist_candidates_[u.id] = candidate_bs_set_from_link_state(
        ids, dists_m_[u.id], powers_dbm_[u.id], config_.channel);
  }
}

std::vector<int> HighwayEnv::current_loads() const {
  std::vector<int> loads(bss_.size());
  for (std::size_t i = 0; i < bss_.size(); ++i) loads[i] = bss_[i].load_count;
  return loads;
}

int HighwayEnv::feasible_bs_count(int uav_id) const {
  int count = 0;
  for (std::size_t i = 0; i < bss_.size(); ++i) {
    if (dists_m_[uav_id][i] > config_.channel.max_link_dist_m) continue;
    if (sir_from_powers_db(powers_dbm_[uav_id], i, config_.channel.sir_cap_db) <
        config_.channel.sir_threshold_db) {
      continue;
    }
    ++count;
  }
  return count;
}

Observation HighwayEnv::build_observation(int uav_id) const {
  const UavState& self = uavs_[uav_id];
  Observation obs;
  obs.reserve(config_.observation_size());

  // Nearest neighbors by 3D distance, ties by id.
  struct Neighbor {
    double dist;
    int id;
  };
  std::vector<Neighbor> others;
  for (const auto& u : uavs_) {
    if (u.id == uav_id) continue;
    const double dx = ring_dx(self.pose.x, u.pose.x);
    const double dy = u.pose.y - self.pose.y;
    const double dh = u.pose.h - self.pose.h;
    others.push_back({std::sqrt(dx * dx + dy * dy + dh * dh), u.id});
  }
  std::sort(others.begin(), others.end(), [](const Neighbor& a, const Neighbor& b) {
    if (a.dist != b.dist) return a.dist < b.dist;
    return a.id < b.id;
  });

  const double pos_scale = config_.obs_position_scale_m;
  auto push_uav = [&](const UavState& u) {
    obs.push_back(clamp_unit(ring_dx(self.pose.x, u.pose.x) / pos_scale));
    obs.push_back(clamp_unit((u.pose.y - self.pose.y) / pos_scale));
    obs.push_back(clamp_unit((u.pose.h - self.pose.h) / pos_scale));
    obs.push_back(clamp_unit(u.v_x / config_.v_max_mps));
    obs.push_back(clamp_unit(u.v_y / config_.v_max_mps));
  };
  push_uav(self);
  for (int v = 0; v < config_.observed_uavs - 1; ++v) {
    if (v < static_cast<int>(others.size())) {
      push_uav(uavs_[others[v].id]);
    } else {
      for (int f = 0; f < 5; ++f) obs.push_back(0.0);
    }
  }

  obs.push_back(clamp_unit(static_cast<double>(feasible_bs_count(uav_id)) /
                           std::max(1, config_.bs_count)));

  const auto& slots = slots_[uav_id];
  for (int s = 0; s < config_.assoc_slots; ++s) {
    if (s < static_cast<int>(slots.size())) {
      const CandidateSlot& slot = slots[s];
      obs.push_back(clamp_unit(slot.sir_db / config_.channel.sir_cap_db));
      obs.push_back(clamp_unit(static_cast<double>(slot.quota) /
                               std::max(1, config_.uav_count)));
      obs.push_back(clamp_unit(static_cast<double>(slot.load) / std::max(1, slot.quota)));
      // id mask: +(id+1)/N for candidates, negated for the slot holding the
      // current serving BS, 0 for an empty slot.
      const double id_mask =
          static_cast<double>(slot.bs_id + 1) / std::max(1, config_.bs_count);
      obs.push_back(clamp_unit(slot.bs_id == self.serving_bs ? -id_mask : id_mask));
    } else {
      for (int f = 0; f < 4; ++f) obs.push_back(0.0);
    }
  }
  return obs;
}

void HighwayEnv::apply_association(int uav_id, int slot_index, std::vector<int>& loads,
                                   bool& handover) {
  UavState& u = uavs_[uav_id];
  const auto& slots = slots_[uav_id];
  int new_bs = u.serving_bs;
  if (!slots.empty()) {
    const int start =
        (slot_index >= 0 && slot_index < static_cast<int>(slots.size())) ? slot_index : 0;
    for (int j = start; j < static_cast<int>(slots.size()); ++j) {
      const int id = slots[j].bs_id;
      if (id == u.serving_bs || loads[id] < bss_[id].quota) {
        new_bs = id;
        break;
      }
    }
  }
  handover = (new_bs != u.serving_bs);
  if (handover) {
    if (u.serving_bs >= 0) --loads[u.serving_bs];
    ++loads[new_bs];
    u.serving_bs = new_bs;
    ++u.ho_count;
  }
}

StepOutcome HighwayEnv::step(const std::vector<BranchedAction>& actions) {
  if (!started_) throw std::logic_error("HighwayEnv::step before reset");
  if (done_) throw std::logic_error("HighwayEnv::step on a finished episode");
  if (actions.size() != uavs_.size()) {
    throw std::invalid_argument("HighwayEnv::step: need one action per UAV");
  }

  // Transport sub-actions; invalid lane changes degrade to IDLE.
  for (auto& u : uavs_) {
    switch (actions[u.id].transport) {
      case kFaster:
        u.target_speed = std::min(u.target_speed + config_.speed_step_mps, config_.v_max_mps);
        break;
      case kSlower:
        u.target_speed = std::max(u.target_speed - config_.speed_step_mps, config_.v_min_mps);
        break;
      case kLaneLeft:
        if (u.lane > 0) u.target_lane = u.lane - 1;
        break;
      case kLaneRight:
        if (u.lane < config_.lane_count - 1) u.target_lane = u.lane + 1;
        break;
      case kIdle:
        break;
      default:
        throw std::invalid_argument("HighwayEnv::step: transport action out of range");
    }
    if (actions[u.id].assoc < 0 || actions[u.id].assoc >= config_.assoc_slots) {
      throw std::invalid_argument("HighwayEnv::step: assoc action out of range");
    }
  }

  integrate_substeps();
  bool any_collision = false;
  for (const auto& u : uavs_) any_collision = any_collision || u.crashed;

  // Association actions index the slot list the agent observed (slots_ is
  // still aligned with the observations returned by the previous step or
  // reset; its WR scores already use start-of-step loads). Resolving against
  // a post-motion rebuild would silently remap the chosen slot.
  std::vector<int> live_loads = current_loads();
  std::vector<bool> handovers(uavs_.size(), false);
  for (auto& u : uavs_) {
    bool ho = false;
    apply_association(u.id, actions[u.id].assoc, live_loads, ho);
    handovers[u.id] = ho;
  }
  for (std::size_t i = 0; i < bss_.size(); ++i) bss_[i].load_count = live_loads[i];

  // Post-motion link state prices rewards and the next observations.
  recompute_link_state();

  ++step_count_;

  StepOutcome out;
  out.step_index = step_count_;
  out.uav.resize(uavs_.size());
  for (const auto& u : uavs_) {
    UavStepResult& r = out.uav[u.id];
    r.collision = u.crashed;
    r.handover = handovers[u.id];
    r.serving_bs = u.serving_bs;
    if (u.serving_bs >= 0) {
      r.sir_db = sir_from_powers_db(powers_dbm_[u.id], u.serving_bs,
                                    config_.channel.sir_cap_db);
      const bool feasible =
          dists_m_[u.id][u.serving_bs] <= config_.channel.max_link_dist_m &&
          r.sir_db >= config_.channel.sir_threshold_db;
      r.rate_bps = feasible ? achievable_rate_bps(r.sir_db, config_.channel) : 0.0;
    } else {
      r.sir_db = std::numeric_limits<double>::quiet_NaN();
      r.rate_bps = 0.0;
    }
    const double speed_mag = std::hypot(u.v_x, u.v_y);
    r.r_tran = transport_reward(speed_mag, u.crashed, config_);
    const double ho_prob =
        static_cast<double>(u.ho_count) / std::max(1, step_count_);
    r.r_tele = comm_reward(r.rate_bps, ho_prob, rate_ref_bps_, config_);
    r.x = u.pose.x;
    r.y = u.pose.y;
    r.h = u.pose.h;
    r.v_x = u.v_x;
    r.v_y = u.v_y;
    r.lane = u.lane;
  }

  done_ = any_collision || step_count_ >= config_.horizon_steps;
  out.episode_done = done_;

  // Next observations see post-association loads and serving BSs.
  rebuild_slots(current_loads());
  for (const auto& u : uavs_) out.uav[u.id].observation = build_observation(u.id);
  return out;
}

BranchedAction HighwayEnv::sdb_action(int uav_id) const {
  BranchedAction a;
  a.transport = kIdle;
  a.assoc = 0;
  const UavState& u = uavs_[uav_id];

  // Nearest in-range BS with vacancy (or the current serving BS).
  const auto& slots = slots_[uav_id];
  for (int id : dist_candidates_[uav_id]) {
    if (id == u.serving_bs || bss_[id].load_count < bss_[id].quota) {
      for (std::size_t j = 0; j < slots.size(); ++j) {
        if (slots[j].bs_id == id) {
          a.assoc = static_cast<int>(j);
          break;
        }
      }
      break;
    }
  }

  const UavState* leader = leader_of(uav_id);
  if (leader) {
    double gap = ring_dx(u.pose.x, leader->pose.x);
    if (gap < 0.0) gap += config_.highway_length_m;
    const double desired = idm_desired_gap(u.v_x, u.v_x - leader->v_x, config_.idm);
    if (gap < desired) {
      a.transport = kSlower;
    } else if (u.v_x < config_.v_max_mps - 1e-9 && gap > 2.0 * desired) {
      a.transport = kFaster;
    }
  } else if (u.v_x < config_.v_max_mps - 1e-9) {
    a.transport = kFaster;
  }
  return a;
}

}  // namespace uavnet
