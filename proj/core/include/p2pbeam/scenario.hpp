#pragma once

#include <cstdint>
#include <filesystem>
#include <string_view>
#include <vector>

#include "p2pbeam/geometry.hpp"
#include "p2pbeam/types.hpp"

namespace p2pbeam {

struct PathSpec {
  std::vector<Vec2> waypoints;
  double speed_mps = 0.5;
  double initial_hold_s = 0.0;
};

struct ClutterObject {
  Vec2 position = Vec2::Zero();
  int point_count = 150;
  double radius_m = 0.2;
};

// The sensor origin sits at position + (0, 0, mounting_height_m). Radar-frame
// coordinates are world coordinates relative to that origin (axes aligned).
struct RadarPose {
  Vec3 position = Vec3::Zero();
  double mounting_height_m = 1.0;

  Vec3 origin() const { return position + Vec3(0.0, 0.0, mounting_height_m); }
};

struct RadarSettings {
  int instants_per_frame = 5;  // 10 Hz at the default 0.5 s frame
  double doppler_noise_mps = 0.05;
  double fov_deg = 120.0;
  double boresight_deg = 90.0;  // world azimuth of the radar axis (+y)
  double max_range_m = 12.0;
};

struct ImuSettings {
  double rate_hz = 100.0;
  double accel_noise_mps2 = 0.05;
  double gyro_noise_radps = 0.005;
  Vec3 accel_bias_mps2 = Vec3(0.04, -0.03, 0.02);
  Vec3 gyro_bias_radps = Vec3(0.002, -0.001, 0.003);
};

struct ScenarioConfig {
  double frame_time_s = 0.5;
  double duration_s = 10.0;
  RadarPose radar_pose;
  std::vector<PathSpec> clients;
  std::vector<ClutterObject> clutter;
  std::vector<PathSpec> distractors;
  double noise_sigma_m = 0.05;
  double body_radius_m = 0.25;
  int points_per_client_per_frame = 400;
  std::uint64_t seed = 0;
  RadarSettings radar;
  ImuSettings imu;
};

// Throws ValidationError naming the first offending field.
void validate(const ScenarioConfig& config);

// Structured-text (JSON) config. Unknown keys are rejected.
ScenarioConfig parse_scenario_config(std::string_view text);
ScenarioConfig load_scenario_config(const std::filesystem::path& path);
std::string dump_scenario_config(const ScenarioConfig& config);

// The two P-shaped client paths, one background walker and static desks.
ScenarioConfig default_p_path_config(std::uint64_t seed = 42);

// Piecewise-linear constant-speed motion along a polyline.
class PathTrack {
 public:
  explicit PathTrack(PathSpec spec);

  const PathSpec& spec() const { return spec_; }
  double length() const { return cumulative_.back(); }
  double motion_end_s() const;

  // Arc length travelled at time t (any real t).
  double distance_at(double t) const;
  Vec2 position(double t) const;
  Vec2 velocity(double t) const;
  // Direction of motion, held at the first/last segment heading while at rest.
  double heading(double t) const;
  // Heading unwrapped along the path (continuous across the +-pi seam).
  double unwrapped_heading(double t) const;
  // Integral of unwrapped_heading over [t0, t1].
  double heading_integral(double t0, double t1) const;
  // Time at which the walker reaches waypoint `i`.
  double waypoint_time(std::size_t i) const;

 private:
  std::size_t segment_at(double s) const;

  PathSpec spec_;
  std::vector<double> cumulative_;
  std::vector<double> unwrapped_;  // per segment
};

class Scenario {
 public:
  // Width of the finite-difference window used to synthesise IMU signals.
  static constexpr double kImuDiffWindow = 0.2;
  static constexpr double kBodyCenterHeight = 1.0;

  explicit Scenario(ScenarioConfig config);

  const ScenarioConfig& config() const { return config_; }
  std::size_t client_count() const { return clients_.size(); }
  const PathTrack& client_track(ClientId id) const;
  const std::vector<PathTrack>& distractor_tracks() const { return distractors_; }

  std::int64_t frame_count() const;
  int instants_per_frame() const { return config_.radar.instants_per_frame; }
  double frame_start(std::int64_t frame_index) const;
  double instant_time(std::int64_t frame_index, int instant) const;

  std::vector<GroundTruthPose> ground_truth(double t) const;
  GroundTruthPose client_truth(ClientId id, double t) const;

  PointCloudFrame sample_point_cloud(std::int64_t frame_index, int instant) const;
  // Every measurement instant of one frame window, in time order.
  std::vector<PointCloudFrame> sample_radar_window(std::int64_t frame_index) const;

  ImuSample sample_imu(ClientId id, double t) const;
  // All IMU samples with timestamp in (t0, t1], at the configured rate.
  std::vector<ImuSample> imu_samples(ClientId id, double t0, double t1) const;
  double imu_period() const { return 1.0 / config_.imu.rate_hz; }

  // Whether an object at world position p is inside the radar's field of view.
  bool visible(const Vec2& p) const;

 private:
  void emit_body(std::vector<RadarPoint>& out, const PathTrack& track, double t,
                 std::uint64_t stream, std::int64_t frame_index, int instant) const;
  ImuSample imu_at(ClientId id, double t, std::uint32_t seq, std::uint64_t key) const;

  ScenarioConfig config_;
  std::vector<PathTrack> clients_;
  std::vector<PathTrack> distractors_;
  std::vector<RadarPoint> clutter_points_;
};

Scenario build_scenario(const ScenarioConfig& config);

}  // namespace p2pbeam
