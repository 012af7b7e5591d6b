#pragma once

#include <Eigen/Core>

#include "p2pbeam/geometry.hpp"

namespace p2pbeam {

using Vec4 = Eigen::Vector4d;
using Mat4 = Eigen::Matrix4d;

struct KalmanConfig {
  double sigma_accel_mps2 = 1.0;  // white-acceleration (random force) std
  double sigma_meas_m = 0.1;
  double dt_nominal_s = 0.5;      // mean frame interval
};

// Constant-velocity state (px, py, vx, vy).
struct KalmanState {
  Vec4 x = Vec4::Zero();
  Mat4 P = Mat4::Identity();
  double last_t = 0.0;
  bool predicted_only = false;  // last step had no usable measurement
  double last_nis = 0.0;        // normalised innovation squared of the last update

  Vec2 position() const { return x.head<2>(); }
  Vec2 velocity() const { return x.tail<2>(); }
};

void validate(const KalmanConfig& cfg);

KalmanState kf_init(const Vec2& pos, const Vec2& vel, const KalmanConfig& cfg);

// Transition [I dt*I; 0 I] and discrete white-noise-acceleration Q.
Mat4 kf_transition(double dt);
Mat4 kf_process_noise(double dt, double sigma_accel);

KalmanState kf_predict(const KalmanState& state, double dt, const KalmanConfig& cfg);

// Predict by dt, then fuse a position measurement (Joseph-form update). A
// non-finite measurement degrades to predict-only with predicted_only set.
KalmanState kf_step(const KalmanState& state, const Vec2& measurement, double dt, const KalmanConfig& cfg);

// Innovation of `measurement` against a predicted state, in Mahalanobis sigmas.
double innovation_sigma(const KalmanState& predicted, const Vec2& measurement, const KalmanConfig& cfg);

enum class ReacquireAction { kAccept, kReacquire };

ReacquireAction kf_reacquire(const KalmanState& predicted, const Vec2& measurement, double gate_sigma,
                             const KalmanConfig& cfg);

// Counts consecutive reacquire signals; reports an identification error once
// `limit` happen in a row.
class ReacquireMonitor {
 public:
  explicit ReacquireMonitor(int limit = 3) : limit_(limit) {}

  // Returns true when the error flag should be raised.
  bool record(ReacquireAction action);
  void reset() { consecutive_ = 0; }
  int consecutive() const { return consecutive_; }

 private:
  int limit_;
  int consecutive_ = 0;
};

}  // namespace p2pbeam
