#include "uavnet/channel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace uavnet {

namespace {
constexpr double kSpeedOfLight = 299792458.0;
constexpr double kAfAmplitudeFloor = 1e-6;
}  // namespace

ChannelParams ChannelParams::from_config(const KeyValueConfig& cfg) {
  ChannelParams p;
  p.carrier_freq_hz = cfg.get_double("channel.carrier_freq_hz", p.carrier_freq_hz);
  p.bandwidth_hz = cfg.get_double("channel.bandwidth_hz", p.bandwidth_hz);
  p.tx_power_dbm = cfg.get_double("channel.tx_power_dbm", p.tx_power_dbm);
  p.noise_power_dbm = cfg.get_double("channel.noise_power_dbm", p.noise_power_dbm);
  p.eta_los_db = cfg.get_double("channel.eta_los_db", p.eta_los_db);
  p.eta_nlos_db = cfg.get_double("channel.eta_nlos_db", p.eta_nlos_db);
  p.g_max_dbi = cfg.get_double("channel.g_max_dbi", p.g_max_dbi);
  p.g_m_db = cfg.get_double("channel.g_m_db", p.g_m_db);
  p.sla_db = cfg.get_double("channel.sla_db", p.sla_db);
  p.phi_3db_rad = cfg.get_double("channel.phi_3db_rad", p.phi_3db_rad);
  p.theta_3db_rad = cfg.get_double("channel.theta_3db_rad", p.theta_3db_rad);
  p.max_link_dist_m = cfg.get_double("channel.max_link_dist_m", p.max_link_dist_m);
  p.sir_threshold_db = cfg.get_double("channel.sir_threshold_db", p.sir_threshold_db);
  p.candidate_count = static_cast<int>(cfg.get_int("channel.candidate_count", p.candidate_count));
  p.sir_cap_db = cfg.get_double("channel.sir_cap_db", p.sir_cap_db);
  p.antenna_standard_3gpp = cfg.get_bool("channel.antenna_standard_3gpp", p.antenna_standard_3gpp);
  if (p.bandwidth_hz <= 0.0) throw std::runtime_error("channel.bandwidth_hz must be > 0");
  if (p.candidate_count < 1) throw std::runtime_error("channel.candidate_count must be >= 1");
  return p;
}

void ChannelParams::to_config(KeyValueConfig& cfg) const {
  cfg.set_double("channel.carrier_freq_hz", carrier_freq_hz);
  cfg.set_double("channel.bandwidth_hz", bandwidth_hz);
  cfg.set_double("channel.tx_power_dbm", tx_power_dbm);
  cfg.set_double("channel.noise_power_dbm", noise_power_dbm);
  cfg.set_double("channel.eta_los_db", eta_los_db);
  cfg.set_double("channel.eta_nlos_db", eta_nlos_db);
  cfg.set_double("channel.g_max_dbi", g_max_dbi);
  cfg.set_double("channel.g_m_db", g_m_db);
  cfg.set_double("channel.sla_db", sla_db);
  cfg.set_double("channel.phi_3db_rad", phi_3db_rad);
  cfg.set_double("channel.theta_3db_rad", theta_3db_rad);
  cfg.set_double("channel.max_link_dist_m", max_link_dist_m);
  cfg.set_double("channel.sir_threshold_db", sir_threshold_db);
  cfg.set_int("channel.candidate_count", candidate_count);
  cfg.set_double("channel.sir_cap_db", sir_cap_db);
  cfg.set_bool("channel.antenna_standard_3gpp", antenna_standard_3gpp);
}

double azimuth_gain_db(double phi_rad, const ChannelParams& params) {
  if (params.antenna_standard_3gpp) {
    const double r = phi_rad / params.phi_3db_rad;
    return -std::min(12.0 * r * r, params.g_m_db);
  }
  return std::min(12.0 * (phi_rad / params.phi_3db_rad), params.g_m_db);
}

double elevation_gain_db(double theta_rad, const ChannelParams& params) {
  if (params.antenna_standard_3gpp) {
    const double r = theta_rad / params.theta_3db_rad;
    return -std::min(12.0 * r * r, params.sla_db);
  }
  return std::min(12.0 * (theta_rad / params.theta_3db_rad), params.sla_db);
}

double element_gain_db(const LinkGeometry& geom, const ChannelParams& params) {
  const double pattern = azimuth_gain_db(geom.azimuth_rad, params) +
                         elevation_gain_db(geom.elevation_rad, params);
  return params.g_max_dbi - std::min(-pattern, params.g_m_db);
}

double array_factor(double theta_rad, const BaseStation& bs) {
  const int n = bs.element_count;
  if (n < 1) throw std::invalid_argument("array_factor: element_count must be >= 1");
  const double delta = std::sin(theta_rad) - std::sin(bs.downtilt_rad);
  const double denom = std::sin(0.5 * M_PI * delta);
  if (std::abs(denom) < 1e-12) return std::sqrt(static_cast<double>(n));
  return std::sin(0.5 * n * M_PI * delta) / (std::sqrt(static_cast<double>(n)) * denom);
}

double radiation_pattern_db(const LinkGeometry& geom, const BaseStation& bs,
                            const ChannelParams& params) {
  const double af = std::max(std::abs(array_factor(geom.elevation_rad, bs)), kAfAmplitudeFloor);
  return element_gain_db(geom, params) + 20.0 * std::log10(af);
}

double los_probability(const LinkGeometry& geom, double altitude_m) {
  if (!(altitude_m >= 22.5 && altitude_m <= 300.0)) {
    throw std::invalid_argument("los_probability: altitude must be in [22.5, 300] m");
  }
  if (altitude_m > 100.0) return 1.0;
  const double d1 = std::max(460.0 * std::log10(altitude_m) - 700.0, 18.0);
  const double p1 = 4300.0 * std::log10(altitude_m) - 3800.0;
  const double d = geom.dist_2d_m;
  if (d <= d1) return 1.0;
  const double frac = d1 / d;
  return frac + std::exp(-d / p1) * (1.0 - frac);
}

double mean_path_loss_db(const LinkGeometry& geom, double altitude_m,
                         const ChannelParams& params) {
  if (geom.dist_3d_m <= 0.0) {
    throw std::invalid_argument("mean_path_loss_db: 3D distance must be > 0");
  }
  const double fspl =
      20.0 * std::log10(4.0 * M_PI * params.carrier_freq_hz * geom.dist_3d_m / kSpeedOfLight);
  const double p_los = los_probability(geom, altitude_m);
  return (fspl + params.eta_los_db) * p_los + (fspl + params.eta_nlos_db) * (1.0 - p_los);
}

double received_power_dbm(const BaseStation& bs, const Pose3& uav_pose,
                          const ChannelParams& params) {
  const LinkGeometry geom = make_link_geometry(bs.pose, uav_pose);
  return params.tx_power_dbm + radiation_pattern_db(geom, bs, params) -
         mean_path_loss_db(geom, uav_pose.h, params) - params.noise_power_dbm;
}

double sir_from_powers_db(const std::vector<double>& powers_dbm,
                          std::size_t serving_index, double sir_cap_db) {
  if (serving_index >= powers_dbm.size()) {
    throw std::invalid_argument("sir_from_powers_db: serving index out of range");
  }
  if (powers_dbm.size() < 2) return sir_cap_db;
  double interference = 0.0;
  for (std::size_t j = 0; j < powers_dbm.size(); ++j) {
    if (j != serving_index) interference += db_to_linear(powers_dbm[j]);
  }
  const double sir = linear_to_db(db_to_linear(powers_dbm[serving_index]) / interference);
  return std::min(sir, sir_cap_db);
}

double sir_db(std::size_t serving_index, const std::vector<BaseStation>& all_bs,
              const Pose3& uav_pose, const ChannelParams& params) {
  std::vector<double> powers(all_bs.size());
  for (std::size_t j = 0; j < all_bs.size(); ++j) {
    powers[j] = received_power_dbm(all_bs[j], uav_pose, params);
  }
  return sir_from_powers_db(powers, serving_index, params.sir_cap_db);
}

double achievable_rate_bps(double sir_db_value, const ChannelParams& params) {
  return params.bandwidth_hz * std::log2(1.0 + db_to_linear(sir_db_value));
}

std::vector<int> candidate_bs_set_from_link_state(
    const std::vector<int>& bs_ids, const std::vector<double>& dists_3d_m,
    const std::vector<double>& powers_dbm, const ChannelParams& params) {
  if (bs_ids.size() != dists_3d_m.size() || bs_ids.size() != powers_dbm.size()) {
    throw std::invalid_argument("candidate_bs_set: mismatched link state sizes");
  }
  struct Entry {
    double dist;
    int id;
  };
  std::vector<Entry> qualifying;
  for (std::size_t i = 0; i < bs_ids.size(); ++i) {
    if (dists_3d_m[i] > params.max_link_dist_m) continue;
    if (sir_from_powers_db(powers_dbm, i, params.sir_cap_db) < params.sir_threshold_db) continue;
    qualifying.push_back({dists_3d_m[i], bs_ids[i]});
  }
  std::sort(qualifying.begin(), qualifying.end(), [](const Entry& a, const Entry& b) {
    if (a.dist != b.dist) return a.dist < b.dist;
    return a.id < b.id;
  });
  if (qualifying.size() > static_cast<std::size_t>(params.candidate_count)) {
    qualifying.resize(params.candidate_count);
  }
  std::vector<int> ids;
  ids.reserve(qualifying.size());
  for (const Entry& e : qualifying) ids.push_back(e.id);
  return ids;
}

std::vector<int> candidate_bs_set(const Pose3& uav_pose,
                                  const std::vector<BaseStation>& all_bs,
                                  const ChannelParams& params) {
  std::vector<int> ids(all_bs.size());
  std::vector<double> dists(all_bs.size());
  std::vector<double> powers(all_bs.size());
  for (std::size_t i = 0; i < all_bs.size(); ++i) {
    ids[i] = all_bs[i].id;
    dists[i] = make_link_geometry(all_bs[i].pose, uav_pose).dist_3d_m;
    powers[i] = received_power_dbm(all_bs[i], uav_pose, params);
  }
  return candidate_bs_set_from_link_state(ids, dists, powers, params);
}

}  // namespace uavnet
