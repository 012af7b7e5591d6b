#include "p2pbeam/kalman.hpp"

#include <cmath>

#include <Eigen/Dense>

#include "p2pbeam/errors.hpp"

namespace p2pbeam {

namespace {

using Mat2x4 = Eigen::Matrix<double, 2, 4>;
using Mat4x2 = Eigen::Matrix<double, 4, 2>;

Mat2x4 observation() {
  Mat2x4 H = Mat2x4::Zero();
  H(0, 0) = 1.0;
  H(1, 1) = 1.0;
  return H;
}

}  // namespace

void validate(const KalmanConfig& cfg) {
  if (!(cfg.sigma_accel_mps2 > 0.0)) throw ValidationError("sigma_accel_mps2", "must be > 0");
  if (!(cfg.sigma_meas_m > 0.0)) throw ValidationError("sigma_meas_m", "must be > 0");
  if (!(cfg.dt_nominal_s > 0.0)) throw ValidationError("dt_nominal_s", "must be > 0");
}

KalmanState kf_init(const Vec2& pos, const Vec2& vel, const KalmanConfig& cfg) {
  validate(cfg);
  KalmanState s;
  s.x << pos, vel;
  s.P = Vec4(10.0, 10.0, 4.0, 4.0).asDiagonal();
  return s;
}

Mat4 kf_transition(double dt) {
  Mat4 F = Mat4::Identity();
  F(0, 2) = dt;
  F(1, 3) = dt;
  return F;
}

Mat4 kf_process_noise(double dt, double sigma_accel) {
  const double q = sigma_accel * sigma_accel;
  const double a = dt * dt * dt * dt / 4.0, b = dt * dt * dt / 2.0, c = dt * dt;
  Mat4 Q = Mat4::Zero();
  Q(0, 0) = Q(1, 1) = a * q;
  Q(0, 2) = Q(2, 0) = Q(1, 3) = Q(3, 1) = b * q;
  Q(2, 2) = Q(3, 3) = c * q;
  return Q;
}

KalmanState kf_predict(const KalmanState& state, double dt, const KalmanConfig& cfg) {
  if (!(dt > 0.0)) throw ContractError("kf_predict: dt must be > 0");
  const Mat4 F = kf_transition(dt);
  KalmanState out = state;
  out.x = F * state.x;
  out.P = F * state.P * F.transpose() + kf_process_noise(dt, cfg.sigma_accel_mps2);
  out.P = 0.5 * (out.P + out.P.transpose());
  out.last_t = state.last_t + dt;
  out.predicted_only = true;
  return out;
}

KalmanState kf_step(const KalmanState& state, const Vec2& measurement, double dt, const KalmanConfig& cfg) {
  KalmanState out = kf_predict(state, dt, cfg);
  if (!measurement.allFinite()) return out;

  const Mat2x4 H = observation();
  const Eigen::Matrix2d R = Eigen::Matrix2d::Identity() * cfg.sigma_meas_m * cfg.sigma_meas_m;
  const Vec2 y = measurement - H * out.x;
  const Eigen::Matrix2d S = H * out.P * H.transpose() + R;
  const Eigen::Matrix2d S_inv = S.inverse();
  const Mat4x2 K = out.P * H.transpose() * S_inv;
  const Mat4 I_KH = Mat4::Identity() - K * H;

  out.x += K * y;
  out.P = I_KH * out.P * I_KH.transpose() + K * R * K.transpose();
  out.P = 0.5 * (out.P + out.P.transpose());
  out.predicted_only = false;
  out.last_nis = y.dot(S_inv * y);
  return out;
}

double innovation_sigma(const KalmanState& predicted, const Vec2& measurement, const KalmanConfig& cfg) {
  const Mat2x4 H = observation();
  const Eigen::Matrix2d S =
      H * predicted.P * H.transpose() + Eigen::Matrix2d::Identity() * cfg.sigma_meas_m * cfg.sigma_meas_m;
  const Vec2 y = measurement - H * predicted.x;
  return std::sqrt(y.dot(S.ldlt().solve(y)));
}

ReacquireAction kf_reacquire(const KalmanState& predicted, const Vec2& measurement, double gate_sigma,
                             const KalmanConfig& cfg) {
  if (!measurement.allFinite()) return ReacquireAction::kReacquire;
  return innovation_sigma(predicted, measurement, cfg) > gate_sigma ? ReacquireAction::kReacquire
                                                                   : ReacquireAction::kAccept;
}

bool ReacquireMonitor::record(ReacquireAction action) {
  if (action == ReacquireAction::kAccept) {
    consecutive_ = 0;
    return false;
  }
  ++consecutive_;
  return consecutive_ >= limit_;
}

}  // namespace p2pbeam
