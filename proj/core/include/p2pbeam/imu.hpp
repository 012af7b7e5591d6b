#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Geometry>

#include "p2pbeam/geometry.hpp"
#include "p2pbeam/types.hpp"

namespace p2pbeam {

using Quaternion = Eigen::Quaterniond;

struct CalibrationProfile {
  Vec3 accel_bias = Vec3::Zero();
  Vec3 gyro_bias = Vec3::Zero();
};

// Orientation maps body-frame vectors to the global frame (v_g = q v_b q*).
struct ClientMotion {
  ClientId client_id = 0;
  Vec3 velocity_mps = Vec3::Zero();  // global frame
  Quaternion orientation = Quaternion::Identity();
  double last_update_s = 0.0;
  bool gyro_only = false;  // last update skipped the accelerometer correction
};

// Rest-window bias estimate: gyro bias = mean gyro, accel bias = mean accel - (0, 0, g).
// Throws CalibrationError on fewer than 10 samples.
CalibrationProfile calibrate(std::span<const ImuSample> rest_samples);

// Trapezoidal velocity update: v_prev + t * (a_prev + a_curr) / 2.
Vec3 integrate_velocity(const Vec3& v_prev, const Vec3& a_prev, const Vec3& a_curr, double t);

// 6-axis Madgwick step (gyro + accelerometer, no magnetometer). The sample is
// expected to be bias-corrected already.
ClientMotion madgwick_update(const ClientMotion& state, const ImuSample& sample, double dt, double beta);

// Rotates v_body into the global frame. Throws ContractError if |q| deviates
// from 1 by more than 1e-6.
Vec3 to_global_frame(const Vec3& v_body, const Quaternion& orientation);

Quaternion yaw_quaternion(double yaw);
double yaw_of(const Quaternion& q);
// Angle between the body z axis and the global z axis.
double tilt_of(const Quaternion& q);

struct ImuTrackerConfig {
  double beta = 0.1;
  double calibration_window_s = 1.0;
};

// Per-client inertial chain: rest calibration, then Madgwick + trapezoidal
// velocity integration on every sample.
class ImuTracker {
 public:
  ImuTracker(ClientId id, double initial_yaw, ImuTrackerConfig config = {});

  // Samples must arrive in timestamp order; older or duplicate ones are ignored.
  void process(const ImuSample& raw);

  bool calibrated() const { return calibration_.has_value(); }
  const std::optional<CalibrationProfile>& calibration() const { return calibration_; }
  const ClientMotion& motion() const { return motion_; }
  Vec2 horizontal_velocity() const { return motion_.velocity_mps.head<2>(); }
  double yaw() const { return yaw_of(motion_.orientation); }
  std::size_t gyro_only_updates() const { return gyro_only_updates_; }

  // Replaces the horizontal velocity (e.g. with a radar-derived estimate).
  void reanchor_velocity(const Vec2& v);

 private:
  ImuTrackerConfig config_;
  ClientMotion motion_;
  std::optional<CalibrationProfile> calibration_;
  std::vector<ImuSample> rest_;
  std::optional<Vec3> prev_accel_global_;
  std::optional<double> last_t_;
  std::size_t gyro_only_updates_ = 0;
};

}  // namespace p2pbeam
