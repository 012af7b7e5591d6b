#include "p2pbeam/imu.hpp"

#include <algorithm>
#include <cmath>

#include "p2pbeam/errors.hpp"

namespace p2pbeam {

CalibrationProfile calibrate(std::span<const ImuSample> rest_samples) {
  if (rest_samples.size() < 10)
    throw CalibrationError("calibration needs at least 10 rest samples, got " +
                           std::to_string(rest_samples.size()));
  Vec3 sa = Vec3::Zero(), sg = Vec3::Zero();
  for (const auto& s : rest_samples) {
    sa += s.accel_mps2;
    sg += s.gyro_radps;
  }
  const double n = static_cast<double>(rest_samples.size());
  return {sa / n - Vec3(0.0, 0.0, kGravity), sg / n};
}

Vec3 integrate_velocity(const Vec3& v_prev, const Vec3& a_prev, const Vec3& a_curr, double t) {
  return v_prev + (a_curr + a_prev) / 2.0 * t;
}

ClientMotion madgwick_update(const ClientMotion& state, const ImuSample& sample, double dt, double beta) {
  if (!(dt > 0.0)) throw ContractError("madgwick_update: dt must be > 0");
  double q0 = state.orientation.w(), q1 = state.orientation.x(), q2 = state.orientation.y(),
         q3 = state.orientation.z();
  const double gx = sample.gyro_radps.x(), gy = sample.gyro_radps.y(), gz = sample.gyro_radps.z();

  // Rate of change of quaternion from gyroscope.
  double qd0 = 0.5 * (-q1 * gx - q2 * gy - q3 * gz);
  double qd1 = 0.5 * (q0 * gx + q2 * gz - q3 * gy);
  double qd2 = 0.5 * (q0 * gy - q1 * gz + q3 * gx);
  double qd3 = 0.5 * (q0 * gz + q1 * gy - q2 * gx);

  ClientMotion out = state;
  const double an = sample.accel_mps2.norm();
  out.gyro_only = !(an > 0.0) || !std::isfinite(an);
  if (!out.gyro_only) {
    const double ax = sample.accel_mps2.x() / an, ay = sample.accel_mps2.y() / an,
                 az = sample.accel_mps2.z() / an;
    const double _2q0 = 2.0 * q0, _2q1 = 2.0 * q1, _2q2 = 2.0 * q2, _2q3 = 2.0 * q3;
    const double _4q0 = 4.0 * q0, _4q1 = 4.0 * q1, _4q2 = 4.0 * q2;
    const double _8q1 = 8.0 * q1, _8q2 = 8.0 * q2;
    const double q0q0 = q0 * q0, q1q1 = q1 * q1, q2q2 = q2 * q2, q3q3 = q3 * q3;

    // Gradient of the gravity-direction objective.
    double s0 = _4q0 * q2q2 + _2q2 * ax + _4q0 * q1q1 - _2q1 * ay;
    double s1 = _4q1 * q3q3 - _2q3 * ax + 4.0 * q0q0 * q1 - _2q0 * ay - _4q1 + _8q1 * q1q1 + _8q1 * q2q2 +
                _4q1 * az;
    double s2 = 4.0 * q0q0 * q2 + _2q0 * ax + _4q2 * q3q3 - _2q3 * ay - _4q2 + _8q2 * q1q1 + _8q2 * q2q2 +
                _4q2 * az;
    double s3 = 4.0 * q1q1 * q3 - _2q1 * ax + 4.0 * q2q2 * q3 - _2q2 * ay;
    const double sn = std::sqrt(s0 * s0 + s1 * s1 + s2 * s2 + s3 * s3);
    if (sn > 0.0) {
      qd0 -= beta * s0 / sn;
      qd1 -= beta * s1 / sn;
      qd2 -= beta * s2 / sn;
      qd3 -= beta * s3 / sn;
    }
  }

  q0 += qd0 * dt;
  q1 += qd1 * dt;
  q2 += qd2 * dt;
  q3 += qd3 * dt;
  out.orientation = Quaternion(q0, q1, q2, q3).normalized();
  out.last_update_s = sample.timestamp_s;
  return out;
}

Vec3 to_global_frame(const Vec3& v_body, const Quaternion& orientation) {
  if (std::abs(orientation.norm() - 1.0) > 1e-6)
    throw ContractError("to_global_frame: orientation is not a unit quaternion");
  return orientation * v_body;
}

Quaternion yaw_quaternion(double yaw) { return {std::cos(yaw / 2.0), 0.0, 0.0, std::sin(yaw / 2.0)}; }

double yaw_of(const Quaternion& q) {
  return std::atan2(2.0 * (q.w() * q.z() + q.x() * q.y()), 1.0 - 2.0 * (q.y() * q.y() + q.z() * q.z()));
}

double tilt_of(const Quaternion& q) {
  const Vec3 up = q * Vec3::UnitZ();
  return std::acos(std::clamp(up.z() / up.norm(), -1.0, 1.0));
}

ImuTracker::ImuTracker(ClientId id, double initial_yaw, ImuTrackerConfig config) : config_(config) {
  motion_.client_id = id;
  motion_.orientation = yaw_quaternion(initial_yaw);
}

void ImuTracker::process(const ImuSample& raw) {
  if (last_t_ && raw.timestamp_s <= *last_t_) return;

  if (!calibration_) {
    rest_.push_back(raw);
    last_t_ = raw.timestamp_s;
    motion_.last_update_s = raw.timestamp_s;
    if (raw.timestamp_s + 1e-9 >= config_.calibration_window_s && rest_.size() >= 10) {
      calibration_ = calibrate(rest_);
      rest_.clear();
      rest_.shrink_to_fit();
    }
    return;
  }

  ImuSample s = raw;
  s.accel_mps2 -= calibration_->accel_bias;
  s.gyro_radps -= calibration_->gyro_bias;

  const double dt = s.timestamp_s - *last_t_;
  motion_ = madgwick_update(motion_, s, dt, config_.beta);
  if (motion_.gyro_only) ++gyro_only_updates_;
  const Vec3 a_global = to_global_frame(s.accel_mps2, motion_.orientation) - Vec3(0.0, 0.0, kGravity);
  if (prev_accel_global_) motion_.velocity_mps = integrate_velocity(motion_.velocity_mps, *prev_accel_global_, a_global, dt);
  prev_accel_global_ = a_global;
  last_t_ = s.timestamp_s;
}

void ImuTracker::reanchor_velocity(const Vec2& v) {
  motion_.velocity_mps.x() = v.x();
  motion_.velocity_mps.y() = v.y();
  motion_.velocity_mps.z() = 0.0;
}

}  // namespace p2pbeam
