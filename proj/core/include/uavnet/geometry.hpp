#pragma once

#include <cmath>
#include <stdexcept>

namespace uavnet {

// Position in meters; h is height above ground.
struct Pose3 {
  double x = 0.0;
  double y = 0.0;
  double h = 0.0;
};

// BS->UAV link geometry. azimuth_rad = arctan(h/d) in [0, pi/2];
// elevation_rad = four-quadrant bearing arctan((y_u-y_b)/(x_u-x_b)).
struct LinkGeometry {
  double dist_3d_m = 0.0;    // q_ik
  double dist_2d_m = 0.0;    // d_ik
  double azimuth_rad = 0.0;  // phi_ik
  double elevation_rad = 0.0;  // theta_ik
};

inline LinkGeometry make_link_geometry(const Pose3& bs, const Pose3& uav) {
  if (!(std::isfinite(bs.x) && std::isfinite(bs.y) && std::isfinite(uav.x) &&
        std::isfinite(uav.y) && std::isfinite(uav.h)) ||
      uav.h < 0.0) {
    throw std::invalid_argument("make_link_geometry: non-finite pose or negative altitude");
  }
  const double dx = uav.x - bs.x;
  const double dy = uav.y - bs.y;
  const double dh = uav.h - bs.h;
  LinkGeometry g;
  g.dist_2d_m = std::hypot(dx, dy);
  g.dist_3d_m = std::hypot(g.dist_2d_m, dh);
  g.azimuth_rad = std::atan2(uav.h, g.dist_2d_m);
  g.elevation_rad = std::atan2(dy, dx);
  return g;
}

}  // namespace uavnet
