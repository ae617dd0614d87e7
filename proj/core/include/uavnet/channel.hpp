#pragma once

#include <cstdint>
#include <vector>

#include "uavnet/config.hpp"
#include "uavnet/geometry.hpp"

namespace uavnet {

// Terrestrial BS with a uniform linear array. load_count is the number of
// UAVs currently associated and may never exceed quota.
struct BaseStation {
  int id = 0;
  Pose3 pose;            // h = 0 for ground BSs
  int element_count = 8;
  double downtilt_rad = -0.17453292519943295;  // -10 deg
  int quota = 5;
  int load_count = 0;
};

// Link-budget parameters. Angles in radians, powers in dBm, gains in dB(i),
// frequencies in Hz.
struct ChannelParams {
  double carrier_freq_hz = 2.1e9;
  double bandwidth_hz = 10.0e6;
  double tx_power_dbm = 40.0;
  double noise_power_dbm = -94.0;
  double eta_los_db = 1.0;
  double eta_nlos_db = 20.0;
  double g_max_dbi = 8.0;
  double g_m_db = 30.0;
  double sla_db = 30.0;
  double phi_3db_rad = 1.1344640137963142;    // 65 deg
  double theta_3db_rad = 1.1344640137963142;  // 65 deg
  double max_link_dist_m = 1000.0;            // d_th
  double sir_threshold_db = -20.0;            // gamma_th
  int candidate_count = 15;                   // n_rf
  double sir_cap_db = 20.0;
  // Antenna element pattern: false follows the gain expressions used here
  // verbatim (linear in angle, no sign flip); true switches to the squared,
  // negated 3GPP sidelobe convention.
  bool antenna_standard_3gpp = false;

  static ChannelParams from_config(const KeyValueConfig& cfg);
  void to_config(KeyValueConfig& cfg) const;
};

// --- antenna pattern ---------------------------------------------------

double azimuth_gain_db(double phi_rad, const ChannelParams& params);
double elevation_gain_db(double theta_rad, const ChannelParams& params);
double element_gain_db(const LinkGeometry& geom, const ChannelParams& params);

// ULA array factor (amplitude). At sin(theta) == sin(downtilt) the removable
// singularity evaluates to the limit sqrt(N).
double array_factor(double theta_rad, const BaseStation& bs);

// Element gain plus array factor in dB; |AF| is floored at 1e-6 before the
// dB conversion.
double radiation_pattern_db(const LinkGeometry& geom, const BaseStation& bs,
                            const ChannelParams& params);

// --- propagation --------------------------------------------------------

// Valid for altitude_m in [22.5, 300]; above 100 m the LoS probability is 1.
double los_probability(const LinkGeometry& geom, double altitude_m);

// Free-space path loss at dist_3d plus the LoS/NLoS excess losses mixed by
// the LoS probability (dB-domain mixture).
double mean_path_loss_db(const LinkGeometry& geom, double altitude_m,
                         const ChannelParams& params);

// P = P_T + G - L - P_n, all dB-scale.
double received_power_dbm(const BaseStation& bs, const Pose3& uav_pose,
                          const ChannelParams& params);

// --- link quality ---------------------------------------------------------

// SIR of powers_dbm[serving_index] against the sum of all other entries,
// capped at sir_cap_db. A single-entry vector returns the cap.
double sir_from_powers_db(const std::vector<double>& powers_dbm,
                          std::size_t serving_index, double sir_cap_db);

double sir_db(std::size_t serving_index, const std::vector<BaseStation>& all_bs,
              const Pose3& uav_pose, const ChannelParams& params);

// Shannon rate over the shared bandwidth, bits/s.
double achievable_rate_bps(double sir_db_value, const ChannelParams& params);

// BS ids with dist_3d <= d_th and SIR >= gamma_th, nearest first (ties by
// id), truncated to n_rf entries. May be empty.
std::vector<int> candidate_bs_set(const Pose3& uav_pose,
                                  const std::vector<BaseStation>& all_bs,
                                  const ChannelParams& params);

// Same filter over precomputed per-BS distances and received powers (one
// entry per BS, aligned with bs_ids).
std::vector<int> candidate_bs_set_from_link_state(
    const std::vector<int>& bs_ids, const std::vector<double>& dists_3d_m,
    const std::vector<double>& powers_dbm, const ChannelParams& params);

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

}  // namespace uavnet
