#pragma once

#include <Eigen/Core>
#include <cmath>
#include <numbers>

namespace p2pbeam {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;

constexpr double kGravity = 9.81;

constexpr double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }
constexpr double rad_to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }

// Wraps to (-pi, pi].
inline double wrap_pi(double a) {
  a = std::remainder(a, 2.0 * std::numbers::pi);
  if (a <= -std::numbers::pi) a += 2.0 * std::numbers::pi;
  return a;
}

// Wraps to (-180, 180].
inline double wrap_deg(double a) {
  a = std::remainder(a, 360.0);
  if (a <= -180.0) a += 360.0;
  return a;
}

}  // namespace p2pbeam
