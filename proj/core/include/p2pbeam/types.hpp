#pragma once

#include <cstdint>
#include <vector>

#include "p2pbeam/geometry.hpp"

namespace p2pbeam {

using ClientId = std::uint32_t;

// One radar return in the radar frame.
struct RadarPoint {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double doppler_mps = 0.0;  // positive: receding from the radar

  friend bool operator==(const RadarPoint&, const RadarPoint&) = default;
};

struct PointCloudFrame {
  std::int64_t frame_index = 0;
  double timestamp_s = 0.0;
  std::vector<RadarPoint> points;

  friend bool operator==(const PointCloudFrame&, const PointCloudFrame&) = default;
};

struct ImuSample {
  ClientId client_id = 0;
  std::uint32_t seq = 0;
  double timestamp_s = 0.0;
  Vec3 accel_mps2 = Vec3::Zero();
  Vec3 gyro_radps = Vec3::Zero();

  friend bool operator==(const ImuSample& a, const ImuSample& b) {
    return a.client_id == b.client_id && a.seq == b.seq && a.timestamp_s == b.timestamp_s &&
           a.accel_mps2 == b.accel_mps2 && a.gyro_radps == b.gyro_radps;
  }
};

struct GroundTruthPose {
  ClientId client_id = 0;
  Vec2 position = Vec2::Zero();
  Vec2 velocity = Vec2::Zero();
  double heading = 0.0;  // radians, direction of motion
};

}  // namespace p2pbeam
