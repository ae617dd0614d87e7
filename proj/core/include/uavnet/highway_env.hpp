#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "uavnet/channel.hpp"
#include "uavnet/config.hpp"
#include "uavnet/rng.hpp"

namespace uavnet {

// Intelligent driver model parameters.
struct IdmParams {
  double max_accel_mps2 = 3.0;      // a_max
  double comfort_decel_mps2 = 5.0;  // b
  double min_gap_m = 10.0;          // s0
  double time_headway_s = 1.5;      // T
  double accel_exponent = 4.0;      // delta

  static IdmParams from_config(const KeyValueConfig& cfg);
  void to_config(KeyValueConfig& cfg) const;
};

enum TransportAction : int {
  kLaneLeft = 0,
  kIdle = 1,
  kLaneRight = 2,
  kFaster = 3,
  kSlower = 4,
};
constexpr int kTransportActionCount = 5;

// One sub-action per branch: transport in [0,5), assoc a slot index in
// [0, assoc_slots).
struct BranchedAction {
  int transport = kIdle;
  int assoc = 0;
};

struct HighwayConfig {
  int lane_count = 5;
  double lane_width_m = 10.0;
  // Longitudinal coordinate is periodic with this circumference (closed
  // ring), which keeps traffic density stationary over long horizons.
  double highway_length_m = 2500.0;
  double altitude_m = 100.0;
  int uav_count = 5;
  int bs_count = 15;
  double bs_area_halfwidth_m = 1200.0;
  double spawn_window_m = 120.0;
  double spawn_speed_mps = -1.0;  // < 0 means "spawn at v_max"
  double decision_period_s = 1.0;
  int physics_substeps = 5;
  IdmParams idm;
  double omega1 = 0.5;  // transport reward speed weight; omega2 = 1 - omega1
  double omega3 = 1.0;  // communication reward weight
  double collision_distance_m = 5.0;
  double max_brake_mps2 = 6.0;  // actuator limit on applied deceleration
  int horizon_steps = 100;
  double v_min_mps = 5.0;
  double v_max_mps = 20.0;  // the run's target speed
  double speed_step_mps = 5.0;
  int bs_quota = 5;
  int bs_element_count = 1;
  double bs_downtilt_rad = -0.17453292519943295;
  int observed_uavs = 3;       // V (self included)
  int assoc_slots = 4;         // n
  double wr_ho_penalty = 0.1;  // mu
  double obs_position_scale_m = 200.0;
  ChannelParams channel;

  double omega2() const { return 1.0 - omega1; }
  int observation_size() const { return 5 * observed_uavs + 1 + 4 * assoc_slots; }

  static HighwayConfig from_config(const KeyValueConfig& cfg);
  void to_config(KeyValueConfig& cfg) const;
  void validate() const;  // throws std::runtime_error on bad combinations
};

struct UavState {
  int id = 0;
  Pose3 pose;
  double v_x = 0.0;
  double v_y = 0.0;
  int lane = 0;
  int target_lane = 0;
  double target_speed = 0.0;
  int serving_bs = -1;  // -1: not associated
  int ho_count = 0;
  bool crashed = false;
};

// Fixed-length normalized state vector; see HighwayEnv::reset for layout.
using Observation = std::vector<double>;

// One entry of the WR-ranked candidate list shown to the agent.
struct CandidateSlot {
  int bs_id = -1;
  double wr_score = 0.0;
  double sir_db = 0.0;
  double rate_bps = 0.0;
  int quota = 0;
  int load = 0;
};

struct UavStepResult {
  Observation observation;
  double r_tran = 0.0;
  double r_tele = 0.0;
  bool collision = false;
  bool handover = false;
  int serving_bs = -1;
  double sir_db = 0.0;  // NaN when not associated
  double rate_bps = 0.0;
  double x = 0.0, y = 0.0, h = 0.0, v_x = 0.0, v_y = 0.0;
  int lane = 0;
};

struct StepOutcome {
  std::vector<UavStepResult> uav;
  bool episode_done = false;
  int step_index = 0;  // 1-based step just completed
};

// --- pure pieces of the MDP, unit-testable in isolation -------------------

// IDM acceleration; the no-leader overload drops the interaction term.
// Throws std::domain_error when gap_m <= 0 (overlap is a collision).
double idm_acceleration(double speed, double target_speed, const IdmParams& p);
double idm_acceleration(double speed, double target_speed, double gap_m,
                        double leader_speed, const IdmParams& p);

// IDM desired gap s*(v, dv).
double idm_desired_gap(double speed, double speed_delta, const IdmParams& p);

// WR = rate / max(1, min(quota, load)) * (1 - mu if HO else 1).
double weighted_rate(double rate_bps, int quota, int load, bool ho_triggered,
                     double ho_penalty);

// r_tran = max(0, w1 * clamp01((|v|-v_min)/(v_max-v_min)) - w2 * collision).
double transport_reward(double speed_magnitude, bool collided, const HighwayConfig& cfg);

// r_tele = w3 * min(1, rate/rate_ref) * (1 - min(1, ho_prob)).
double comm_reward(double rate_bps, double ho_prob, double rate_ref_bps,
                   const HighwayConfig& cfg);

// --- the environment -------------------------------------------------------

// Multi-lane aerial highway with BS association. Deterministic for a fixed
// (config, seed, action sequence). Single-threaded per instance.
//
// Observation layout (all entries clamped to [-1, 1]):
//   V blocks of 5: dx/200, dy/200, dh/200, vx/v_max, vy/v_max
//     (self first, then nearest neighbors by 3D distance; positions relative
//     to the acting UAV; zero-padded when fewer UAVs exist)
//   1: feasible-BS count / bs_count
//   n blocks of 4: sir/sir_cap, quota/uav_count, load/quota, id_mask
//     (WR-descending candidate slots; id_mask = (bs_id+1)/bs_count, negated
//     when the slot holds the current serving BS, 0 for an empty slot)
class HighwayEnv {
 public:
  explicit HighwayEnv(HighwayConfig config);

  // Seeded world generation: uniform BS field, gap-checked UAV spawn,
  // quota-restricted shortest-distance initial association.
  std::vector<Observation> reset(std::uint64_t seed);

  // Explicit world state, used by tests and scripted scenarios. UAV ids must
  // be 0..N-1 in order; loads are recomputed from serving_bs fields.
  std::vector<Observation> reset_manual(std::vector<BaseStation> bss,
                                        std::vector<UavState> uavs);

  // One decision period. Expects one action per UAV (all of them, in id
  // order). Throws if the episode is already done.
  StepOutcome step(const std::vector<BranchedAction>& actions);

  bool done() const { return done_; }
  int step_count() const { return step_count_; }
  int elapsed_steps() const { return step_count_; }
  const HighwayConfig& config() const { return config_; }
  const std::vector<BaseStation>& base_stations() const { return bss_; }
  const std::vector<UavState>& uav_states() const { return uavs_; }

  // Candidate slots aligned with the most recent observations.
  const std::vector<CandidateSlot>& slots(int uav_id) const { return slots_[uav_id]; }

  // Shortest-distance baseline: nearest vacant candidate plus an IDM-style
  // speed heuristic, no lane changes.
  BranchedAction sdb_action(int uav_id) const;

  // Rate at the SIR cap; normalizes the communication reward.
  double reference_rate_bps() const { return rate_ref_bps_; }

  int observation_size() const { return config_.observation_size(); }

 private:
  void recompute_link_state();
  void rebuild_slots(const std::vector<int>& loads);
  std::vector<int> current_loads() const;
  std::vector<CandidateSlot> make_slots(int uav_id, const std::vector<int>& loads) const;
  Observation build_observation(int uav_id) const;
  int current_lane(double y) const;
  double lane_center(int lane) const { return lane * config_.lane_width_m; }
  double wrap_x(double x) const;
  // signed displacement from -> to, wrapped into (-L/2, L/2]
  double ring_dx(double from_x, double to_x) const;
  const UavState* leader_of(int uav_id) const;
  void integrate_substeps();
  void apply_association(int uav_id, int slot_index, std::vector<int>& loads, bool& handover);
  int feasible_bs_count(int uav_id) const;

  HighwayConfig config_;
  std::vector<BaseStation> bss_;
  std::vector<UavState> uavs_;
  std::vector<std::vector<double>> powers_dbm_;  // [uav][bs]
  std::vector<std::vector<double>> dists_m_;     // [uav][bs]
  std::vector<std::vector<CandidateSlot>> slots_;
  std::vector<std::vector<int>> dist_candidates_;  // distance-ordered ids per uav
  double rate_ref_bps_ = 0.0;
  int step_count_ = 0;
  bool done_ = false;
  bool started_ = false;
};

}  // namespace uavnet
